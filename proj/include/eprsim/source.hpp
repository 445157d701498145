#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

#include "eprsim/qcore.hpp"

#include <nlohmann/json.hpp>

namespace eprsim {

enum class DissociationMethod { rf_spin_flip, field_sweep, photodissociation };

std::string to_string(DissociationMethod m);
DissociationMethod dissociation_method_from_string(const std::string& s);

/// Parameters of one dissociation pulse.  `mean_momentum_hkrec` and
/// `momentum_spread_hkrec` are per-atom values in units of hbar*k_rec.
/// `binding_coupling` is the 1D coupling constant g_ud, carried as an
/// opaque scalar (no numeric value is established for it).
struct DissociationSpec {
    DissociationMethod method = DissociationMethod::field_sweep;
    double timescale_s = 2e-3;
    double mean_momentum_hkrec = 1.0;
    double momentum_spread_hkrec = 0.02;
    double binding_coupling = 1.0;

    /// Throws unless timescale sits inside the catalog range for the
    /// method (rf: < 1 ms; sweep: 0.5-10 ms; optical: 1 ns - 1 us).
    void validate() const;
};

struct PreparationConfig {
    double pair_prep_fidelity = 0.97;
    double singlet_fidelity = 1.0;
    double association_fidelity = 1.0;

    void validate() const;  // all probabilities in [0, 1]
};

/// Gaussian second-moment model of the dissociated pair, variables
/// ordered (x1, p1, x2, p2); lengths in um, momenta in hbar/um.
struct GaussianPairState {
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();

    double var_x(int atom) const { return cov(atom == 0 ? 0 : 2, atom == 0 ? 0 : 2); }
    double var_p(int atom) const { return cov(atom == 0 ? 1 : 3, atom == 0 ? 1 : 3); }

    /// Symmetry + positive definiteness; throws with a diagnostic when
    /// the covariance is unusable.
    void check_positive_definite() const;
    /// Var(x_i) Var(p_i) >= 1/4 for both atoms (hbar = 1 units).
    bool satisfies_heisenberg() const;
};

struct CvStateOptions {
    /// The kinematic model permits sub-Heisenberg marginals in idealized
    /// limit studies; the default rejects them.
    bool enforce_heisenberg = true;
};

/// Werner mixture F |psi><psi| + (1 - F) I/4 of the two-qubit spin
/// singlet (|ud> - |du>)/sqrt(2) over modes L (qubit 0) and R (qubit 1).
MixedState prepare_singlet(const PreparationConfig& cfg);

/// Same mixture with the path singlet (|A B> - |B A>)/sqrt(2); path
/// basis encodes A -> 0, B -> 1 per side.
MixedState prepare_path_state(const PreparationConfig& cfg);

/// Four-qubit hyperentangled GHZ (|0011> - |1100>)/sqrt(2) over qubits
/// (spin_L, path_L, spin_R, path_R) with up,A -> 0 and down,B -> 1,
/// Werner-mixed with I/16 at fidelity F.
MixedState prepare_ghz_hyper(const PreparationConfig& cfg);

/// Covariance construction:
///   Var(x1 - x2) = 2 sigma0^2,   Var(p1 + p2) = spread^2,
///   Var(x_i) = (10 sigma0)^2,    Var(p_i) = p0^2/4 + spread^2,
/// momentum means +/- p0 on the two atoms, x-p cross blocks zero.
GaussianPairState prepare_cv_state(const DissociationSpec& spec, double initial_size_um,
                                   const CvStateOptions& options = {});

struct DissociationCatalogEntry {
    DissociationMethod method;
    std::string timescale;       // catalog text, e.g. "sub-ms"
    std::string key_features;
    std::string limitations;
    double timescale_min_s;
    double timescale_max_s;
    bool suitable;               // photodissociation is ruled out
    std::string unsuitable_reason;

    bool operator==(const DissociationCatalogEntry&) const = default;
};

std::vector<DissociationCatalogEntry> dissociation_catalog();

nlohmann::ordered_json catalog_to_json(const std::vector<DissociationCatalogEntry>& c);
std::vector<DissociationCatalogEntry> catalog_from_json(const nlohmann::ordered_json& j);

}  // namespace eprsim
