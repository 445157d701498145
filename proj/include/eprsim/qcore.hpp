#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

#include "eprsim/rng.hpp"

namespace eprsim {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

enum class Axis { x, y, z };

/// Pure state of n qubits (n = 1..4), amplitudes in basis order with
/// qubit 0 the most significant bit, i.e. index 0 is the leftmost label
/// in ket notation: |q0 q1 ... q(n-1)>.
struct PureState {
    int n_qubits = 0;
    CVec amplitudes;

    static PureState computational(int n_qubits, std::uint32_t basis_index);
    static PureState from_amplitudes(int n_qubits, const CVec& amps);

    Eigen::Index dim() const { return amplitudes.size(); }
    double norm_error() const;  // | sum |amp|^2 - 1 |
};

/// Density operator over n qubits.  Hermitian, unit trace, PSD.
struct MixedState {
    int n_qubits = 0;
    CMat rho;

    static MixedState from_pure(const PureState& psi);
    static MixedState from_density(int n_qubits, const CMat& rho);
    static MixedState maximally_mixed(int n_qubits);

    Eigen::Index dim() const { return rho.rows(); }
    double hermiticity_error() const;
    double trace_error() const;
    double min_eigenvalue() const;
    void check_invariants() const;  // throws on violation
};

/// Unitary operator; the factory checks U^dag U = I to 1e-12 elementwise.
struct Unitary {
    Eigen::Index dim = 0;
    CMat matrix;

    static Unitary checked(const CMat& m);
    static Unitary identity(Eigen::Index dim);
};

struct MeasurementRecord {
    int qubit_index = 0;
    double basis_angle = 0.0;  // radians, measurement direction in the x-z plane
    int outcome = 0;           // +1 or -1
};

/// exp(-i theta sigma_axis / 2).  Convention fixed here once: all
/// composite-gate identities in the control module are validated against
/// this sign choice.
Unitary rotation(Axis axis, double theta);

/// Embed `u` acting on the listed target qubits (u's qubit 0 maps to
/// targets[0], preserving significance order) into an n-qubit unitary,
/// identity elsewhere.
Unitary embed(const Unitary& u, const std::vector<int>& targets, int n_qubits);

PureState apply(const Unitary& u, const PureState& s);
MixedState apply(const Unitary& u, const MixedState& s);

/// Measurement observable sigma_theta = cos(theta) sigma_z + sin(theta)
/// sigma_x, i.e. direction (sin theta, 0, cos theta) on the Bloch sphere.
/// Realized as conjugation by rotation(y, -theta) followed by a sigma_z
/// readout, which reproduces the singlet correlation -cos(thetaL - thetaR).
CMat sigma_theta(double theta);

/// Projector onto the +/- eigenspace of sigma_theta.
CMat sigma_theta_projector(double theta, int outcome);

std::pair<MeasurementRecord, PureState> measure_qubit(const PureState& s, int qubit,
                                                      double theta,
                                                      rng::UniformSource& rng);
std::pair<MeasurementRecord, MixedState> measure_qubit(const MixedState& s, int qubit,
                                                       double theta,
                                                       rng::UniformSource& rng);

/// Born probability of outcome +1 for sigma_theta on one qubit.
double outcome_probability(const MixedState& s, int qubit, double theta, int outcome);

double expectation(const PureState& s, const CMat& observable);
double expectation(const MixedState& s, const CMat& observable);

PureState tensor(const PureState& a, const PureState& b);
MixedState tensor(const MixedState& a, const MixedState& b);

/// Trace out every qubit not listed in `keep`.  Kept qubits retain their
/// relative order.
MixedState partial_trace(const MixedState& s, const std::vector<int>& keep);

// ---- small matrix helpers shared across modules ----

CMat kron(const CMat& a, const CMat& b);
CMat pauli(Axis axis);

/// min over a global phase of the Frobenius distance ||U - e^{i phi} V||.
double phase_distance(const CMat& u, const CMat& v);

bool is_hermitian(const CMat& m, double tol = 1e-10);

}  // namespace eprsim
