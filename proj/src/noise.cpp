#include "eprsim/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace eprsim {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) {
        throw std::invalid_argument(what);
    }
}

constexpr double t2_cap_s = 1e4;

}  // namespace

NoiseConfig NoiseConfig::ideal() {
    NoiseConfig cfg;
    cfg.detection_fidelity = 1.0;
    cfg.singlet_fidelity = 1.0;
    cfg.t2_prime_s = t2_cap_s;
    cfg.basis_misalignment_sigma = 0.0;
    cfg.residual_visibility = 1.0;
    return cfg;
}

void NoiseConfig::validate() const {
    require(detection_fidelity >= 0.0 && detection_fidelity <= 1.0,
            "NoiseConfig: detection_fidelity outside [0, 1]");
    require(singlet_fidelity >= 0.0 && singlet_fidelity <= 1.0,
            "NoiseConfig: singlet_fidelity outside [0, 1]");
    require(t2_prime_s > 0.0, "NoiseConfig: t2_prime must be positive");
    require(basis_misalignment_sigma >= 0.0,
            "NoiseConfig: basis_misalignment_sigma must be non-negative");
    require(residual_visibility >= 0.0 && residual_visibility <= 1.0,
            "NoiseConfig: residual_visibility outside [0, 1]");
}

void FieldNoiseSpec::validate() const {
    require(sensitivity_hz_per_mg >= 0.0 && field_stability_mg >= 0.0,
            "FieldNoiseSpec: parameters must be non-negative");
}

double t2_estimate(const FieldNoiseSpec& spec) {
    spec.validate();
    const double excursion_hz = spec.sensitivity_hz_per_mg * spec.field_stability_mg;
    if (excursion_hz <= 0.0) {
        return t2_cap_s;
    }
    return std::min(1.0 / excursion_hz, t2_cap_s);
}

double effective_visibility(const NoiseConfig& cfg) {
    cfg.validate();
    const double flip = 2.0 * cfg.detection_fidelity - 1.0;
    const double mis = std::exp(-cfg.basis_misalignment_sigma *
                                cfg.basis_misalignment_sigma);
    return flip * flip * cfg.singlet_fidelity * cfg.residual_visibility * mis;
}

double predicted_S(const NoiseConfig& cfg) {
    return 2.0 * std::sqrt(2.0) * effective_visibility(cfg);
}

MixedState apply_noise_channels(const MixedState& state, const NoiseConfig& cfg,
                                double elapsed_s) {
    cfg.validate();
    require(elapsed_s >= 0.0, "apply_noise_channels: elapsed must be non-negative");
    if (elapsed_s == 0.0) {
        return state;
    }
    // Phase damping, Kraus form K0 = diag(1, sqrt(1-lambda)),
    // K1 = diag(0, sqrt(lambda)): rho01 -> sqrt(1-lambda) rho01.
    const double lambda = 1.0 - std::exp(-elapsed_s / cfg.t2_prime_s);
    const double keep = std::sqrt(1.0 - lambda);

    MixedState out = state;
    const int n = state.n_qubits;
    const Eigen::Index dim = state.dim();
    for (int q = 0; q < n; ++q) {
        const Eigen::Index bit = Eigen::Index(1) << (n - 1 - q);
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c) {
                if (((r ^ c) & bit) != 0) {
                    out.rho(r, c) *= keep;
                }
            }
        }
    }
    return out;
}

int flip_outcome(int outcome, double detection_fidelity, rng::UniformSource& rng) {
    require(outcome == 1 || outcome == -1, "flip_outcome: outcome must be +/-1");
    require(detection_fidelity >= 0.0 && detection_fidelity <= 1.0,
            "flip_outcome: fidelity outside [0, 1]");
    return (rng.next() < 1.0 - detection_fidelity) ? -outcome : outcome;
}

nlohmann::ordered_json to_json(const NoiseConfig& cfg) {
    return {{"detection_fidelity", cfg.detection_fidelity},
            {"singlet_fidelity", cfg.singlet_fidelity},
            {"t2_prime_s", cfg.t2_prime_s},
            {"basis_misalignment_sigma", cfg.basis_misalignment_sigma},
            {"residual_visibility", cfg.residual_visibility}};
}

NoiseConfig noise_config_from_json(const nlohmann::ordered_json& j) {
    NoiseConfig cfg;
    cfg.detection_fidelity = j.value("detection_fidelity", cfg.detection_fidelity);
    cfg.singlet_fidelity = j.value("singlet_fidelity", cfg.singlet_fidelity);
    cfg.t2_prime_s = j.value("t2_prime_s", cfg.t2_prime_s);
    cfg.basis_misalignment_sigma =
        j.value("basis_misalignment_sigma", cfg.basis_misalignment_sigma);
    cfg.residual_visibility = j.value("residual_visibility", cfg.residual_visibility);
    cfg.validate();
    return cfg;
}

nlohmann::ordered_json to_json(const FieldNoiseSpec& spec) {
    return {{"sensitivity_hz_per_mg", spec.sensitivity_hz_per_mg},
            {"field_stability_mg", spec.field_stability_mg}};
}

FieldNoiseSpec field_noise_from_json(const nlohmann::ordered_json& j) {
    FieldNoiseSpec spec;
    spec.sensitivity_hz_per_mg =
        j.value("sensitivity_hz_per_mg", spec.sensitivity_hz_per_mg);
    spec.field_stability_mg = j.value("field_stability_mg", spec.field_stability_mg);
    spec.validate();
    return spec;
}

}  // namespace eprsim
