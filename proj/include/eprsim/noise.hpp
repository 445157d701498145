#pragma once

#include <nlohmann/json.hpp>

#include "eprsim/qcore.hpp"
#include "eprsim/rng.hpp"

namespace eprsim {

/// Scalar noise parameterization.  Everything composes multiplicatively
/// into an effective fringe/correlation visibility.
struct NoiseConfig {
    double detection_fidelity = 0.99;        // per-atom readout fidelity f_d
    double singlet_fidelity = 0.97;          // Werner fidelity F of the prepared pair
    double t2_prime_s = 0.2;                 // echo-limited coherence time
    double basis_misalignment_sigma = 0.0;   // rad, per-side Gaussian basis jitter
    double residual_visibility = 1.0;        // catch-all multiplicative factor

    static NoiseConfig ideal();
    void validate() const;
};

struct FieldNoiseSpec {
    double sensitivity_hz_per_mg = 5.0;
    double field_stability_mg = 1.0;

    void validate() const;
};

/// T2' = 1 / (sensitivity * stability), capped at 1e4 s when the rms
/// frequency excursion vanishes.
double t2_estimate(const FieldNoiseSpec& spec);

/// V_eff = (2 f_d - 1)^2 * F * residual_visibility * exp(-sigma_mis^2).
double effective_visibility(const NoiseConfig& cfg);

/// Predicted CHSH value at the standard angles: 2*sqrt(2) * V_eff.
double predicted_S(const NoiseConfig& cfg);

/// Per-qubit phase damping with parameter lambda = 1 - exp(-elapsed/T2'),
/// i.e. each single-qubit coherence scales by exp(-elapsed / (2 T2')) and
/// a two-qubit singlet coherence by exp(-elapsed / T2').
MixedState apply_noise_channels(const MixedState& state, const NoiseConfig& cfg,
                                double elapsed_s);

/// Symmetric readout flip: the reported outcome is wrong with
/// probability 1 - f_d.
int flip_outcome(int outcome, double detection_fidelity, rng::UniformSource& rng);

nlohmann::ordered_json to_json(const NoiseConfig& cfg);
NoiseConfig noise_config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const FieldNoiseSpec& spec);
FieldNoiseSpec field_noise_from_json(const nlohmann::ordered_json& j);

}  // namespace eprsim
