#include "eprsim/source.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

#include "eprsim/constants.hpp"

namespace eprsim {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) {
        throw std::invalid_argument(what);
    }
}

MixedState werner_mixture(const PureState& target, double fidelity) {
    const Eigen::Index dim = target.dim();
    MixedState m;
    m.n_qubits = target.n_qubits;
    m.rho = fidelity * (target.amplitudes * target.amplitudes.adjoint()) +
            (1.0 - fidelity) / static_cast<double>(dim) * CMat::Identity(dim, dim);
    return m;
}

PureState two_mode_singlet() {
    CVec amps = CVec::Zero(4);
    amps(1) = 1.0 / std::sqrt(2.0);   // |01>
    amps(2) = -1.0 / std::sqrt(2.0);  // |10>
    return PureState::from_amplitudes(2, amps);
}

}  // namespace

std::string to_string(DissociationMethod m) {
    switch (m) {
        case DissociationMethod::rf_spin_flip:
            return "rf_spin_flip";
        case DissociationMethod::field_sweep:
            return "field_sweep";
        case DissociationMethod::photodissociation:
            return "photodissociation";
    }
    return "unknown";
}

DissociationMethod dissociation_method_from_string(const std::string& s) {
    if (s == "rf_spin_flip") return DissociationMethod::rf_spin_flip;
    if (s == "field_sweep") return DissociationMethod::field_sweep;
    if (s == "photodissociation") return DissociationMethod::photodissociation;
    throw std::invalid_argument("unknown dissociation method: " + s);
}

void DissociationSpec::validate() const {
    require(timescale_s > 0.0, "DissociationSpec: timescale must be positive");
    require(momentum_spread_hkrec > 0.0,
            "DissociationSpec: momentum spread must be positive");
    for (const auto& entry : dissociation_catalog()) {
        if (entry.method != method) {
            continue;
        }
        require(timescale_s >= entry.timescale_min_s &&
                    timescale_s <= entry.timescale_max_s,
                "DissociationSpec: timescale outside the " + to_string(method) +
                    " range");
        return;
    }
    throw std::logic_error("DissociationSpec: method missing from catalog");
}

void PreparationConfig::validate() const {
    for (double p : {pair_prep_fidelity, singlet_fidelity, association_fidelity}) {
        require(p >= 0.0 && p <= 1.0, "PreparationConfig: fidelity outside [0, 1]");
    }
}

void GaussianPairState::check_positive_definite() const {
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    require(asym < 1e-12, "GaussianPairState: covariance not symmetric");
    Eigen::LLT<Eigen::Matrix4d> llt(cov);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(cov, Eigen::EigenvaluesOnly);
        throw std::invalid_argument(
            "GaussianPairState: covariance not positive definite (min eigenvalue " +
            std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
}

bool GaussianPairState::satisfies_heisenberg() const {
    const double bound = PhysicalConstants::hbar_over_two * PhysicalConstants::hbar_over_two;
    return var_x(0) * var_p(0) >= bound * (1.0 - 1e-12) &&
           var_x(1) * var_p(1) >= bound * (1.0 - 1e-12);
}

MixedState prepare_singlet(const PreparationConfig& cfg) {
    cfg.validate();
    return werner_mixture(two_mode_singlet(), cfg.singlet_fidelity);
}

MixedState prepare_path_state(const PreparationConfig& cfg) {
    cfg.validate();
    // Same amplitudes as the spin singlet under the A -> 0, B -> 1 encoding.
    return werner_mixture(two_mode_singlet(), cfg.singlet_fidelity);
}

MixedState prepare_ghz_hyper(const PreparationConfig& cfg) {
    cfg.validate();
    CVec amps = CVec::Zero(16);
    amps(0b0011) = 1.0 / std::sqrt(2.0);
    amps(0b1100) = -1.0 / std::sqrt(2.0);
    return werner_mixture(PureState::from_amplitudes(4, amps), cfg.singlet_fidelity);
}

GaussianPairState prepare_cv_state(const DissociationSpec& spec, double initial_size_um,
                                   const CvStateOptions& options) {
    require(initial_size_um > 0.0, "prepare_cv_state: initial size must be positive");
    require(spec.momentum_spread_hkrec > 0.0,
            "prepare_cv_state: momentum spread must be positive");

    const double sigma0 = initial_size_um;
    const double spread =
        spec.momentum_spread_hkrec * PhysicalConstants::k_rec_per_um;  // hbar/um
    const double p0 = spec.mean_momentum_hkrec * PhysicalConstants::k_rec_per_um;

    const double var_x = 100.0 * sigma0 * sigma0;       // (10 sigma0)^2
    const double var_p = 0.25 * p0 * p0 + spread * spread;
    const double cov_x = var_x - sigma0 * sigma0;        // Var(x1 - x2) = 2 sigma0^2
    const double cov_p = -(var_p - 0.5 * spread * spread);  // Var(p1 + p2) = spread^2

    GaussianPairState state;
    state.mean << 0.0, p0, 0.0, -p0;
    state.cov.setZero();
    state.cov(0, 0) = var_x;
    state.cov(2, 2) = var_x;
    state.cov(0, 2) = state.cov(2, 0) = cov_x;
    state.cov(1, 1) = var_p;
    state.cov(3, 3) = var_p;
    state.cov(1, 3) = state.cov(3, 1) = cov_p;

    state.check_positive_definite();
    if (options.enforce_heisenberg && !state.satisfies_heisenberg()) {
        throw std::invalid_argument(
            "prepare_cv_state: per-atom Var(x) Var(p) below (hbar/2)^2; widen the "
            "marginals or disable enforce_heisenberg for limit studies");
    }
    return state;
}

std::vector<DissociationCatalogEntry> dissociation_catalog() {
    return {
        {DissociationMethod::rf_spin_flip, "sub-ms",
         "Fast, coherent, minimal recoil", "Requires strong, homogeneous RF fields",
         0.0, 1e-3, true, ""},
        {DissociationMethod::field_sweep, "0.5–10 ms",
         "Deterministic, tunable momentum spectrum", "Relatively slow", 0.5e-3, 10e-3,
         true, ""},
        {DissociationMethod::photodissociation, "ns–µs",
         "Fast, precise timing", "Photon recoil; spontaneous emission", 1e-9, 1e-6,
         false, "photon recoil; spontaneous emission"},
    };
}

nlohmann::ordered_json catalog_to_json(const std::vector<DissociationCatalogEntry>& c) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : c) {
        arr.push_back({{"method", to_string(e.method)},
                       {"timescale", e.timescale},
                       {"key_features", e.key_features},
                       {"limitations", e.limitations},
                       {"timescale_min_s", e.timescale_min_s},
                       {"timescale_max_s", e.timescale_max_s},
                       {"suitable", e.suitable},
                       {"unsuitable_reason", e.unsuitable_reason}});
    }
    return arr;
}

std::vector<DissociationCatalogEntry> catalog_from_json(const nlohmann::ordered_json& j) {
    std::vector<DissociationCatalogEntry> out;
    for (const auto& e : j) {
        DissociationCatalogEntry entry;
        entry.method = dissociation_method_from_string(e.at("method").get<std::string>());
        entry.timescale = e.at("timescale").get<std::string>();
        entry.key_features = e.at("key_features").get<std::string>();
        entry.limitations = e.at("limitations").get<std::string>();
        entry.timescale_min_s = e.at("timescale_min_s").get<double>();
        entry.timescale_max_s = e.at("timescale_max_s").get<double>();
        entry.suitable = e.at("suitable").get<bool>();
        entry.unsuitable_reason = e.at("unsuitable_reason").get<std::string>();
        out.push_back(entry);
    }
    return out;
}

}  // namespace eprsim
