#pragma once

// Shared test helpers: an independent matrix-exponential oracle and
// seeded random-state generators.  Everything here is test-only and
// deliberately avoids the library's own rotation/apply code paths.

#include <complex>
#include <random>

#include "eprsim/qcore.hpp"

namespace testutil {

using eprsim::CMat;
using eprsim::CVec;
using eprsim::cplx;

/// Taylor-series matrix exponential with scaling and squaring.
inline CMat expm(CMat a) {
    int squarings = 0;
    double norm = a.cwiseAbs().maxCoeff() * static_cast<double>(a.rows());
    while (norm > 0.5) {
        a /= 2.0;
        norm /= 2.0;
        ++squarings;
    }
    CMat sum = CMat::Identity(a.rows(), a.cols());
    CMat term = CMat::Identity(a.rows(), a.cols());
    for (int k = 1; k <= 30; ++k) {
        term = (term * a / static_cast<double>(k)).eval();
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) {
        sum = (sum * sum).eval();
    }
    return sum;
}

/// Direct oracle for exp(-i theta sigma_axis / 2).
inline CMat rotation_oracle(eprsim::Axis axis, double theta) {
    const cplx i01{0.0, 1.0};
    return expm((-i01 * theta / 2.0) * eprsim::pauli(axis));
}

inline CVec random_ket(std::mt19937_64& gen, Eigen::Index dim) {
    std::normal_distribution<double> normal;
    CVec v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        v(k) = cplx(normal(gen), normal(gen));
    }
    return v / v.norm();
}

inline eprsim::PureState random_pure_state(std::mt19937_64& gen, int n_qubits) {
    return eprsim::PureState::from_amplitudes(n_qubits,
                                              random_ket(gen, Eigen::Index(1) << n_qubits));
}

/// Product of independent single-qubit kets.
inline eprsim::PureState random_product_state(std::mt19937_64& gen, int n_qubits) {
    CVec v = random_ket(gen, 2);
    for (int q = 1; q < n_qubits; ++q) {
        const CVec single = random_ket(gen, 2);
        CVec next(v.size() * 2);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            next(2 * i) = v(i) * single(0);
            next(2 * i + 1) = v(i) * single(1);
        }
        v = next;
    }
    return eprsim::PureState::from_amplitudes(n_qubits, v);
}

inline eprsim::MixedState random_density(std::mt19937_64& gen, int n_qubits) {
    std::normal_distribution<double> normal;
    const Eigen::Index dim = Eigen::Index(1) << n_qubits;
    CMat g(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            g(r, c) = cplx(normal(gen), normal(gen));
        }
    }
    CMat rho = g * g.adjoint();
    rho /= rho.trace().real();
    return eprsim::MixedState::from_density(n_qubits, rho);
}

inline CMat random_hermitian(std::mt19937_64& gen, Eigen::Index dim) {
    std::normal_distribution<double> normal;
    CMat g(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            g(r, c) = cplx(normal(gen), normal(gen));
        }
    }
    return 0.5 * (g + g.adjoint());
}

}  // namespace testutil
