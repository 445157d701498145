#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eprsim/noise.hpp"
#include "eprsim/qcore.hpp"
#include "eprsim/source.hpp"

namespace eprsim {

/// CHSH analyzer angles; the standard configuration is
/// (3pi/4, pi/4, pi/2, 0).
struct CHSHSettings {
    double theta_l;
    double theta_lp;
    double theta_r;
    double theta_rp;

    static CHSHSettings standard();
};

struct ExperimentResult {
    std::string estimator;
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t shots = 0;  // 0 = analytic
    std::uint64_t seed = 0;
    nlohmann::ordered_json settings;
};

// ---- correlation plumbing shared by the estimators ----

/// Joint outcome probabilities for sigma_thetaL (x) sigma_thetaR on a
/// two-qubit state, in outcome order (++, +-, -+, --).
std::array<double, 4> pair_joint_probabilities(const MixedState& state, double theta_l,
                                               double theta_r);

/// Fold the residual-visibility twirl (white-noise admixture) and
/// independent per-atom detection flips into a joint distribution.
std::array<double, 4> fold_pair_noise(const std::array<double, 4>& p,
                                      double detection_fidelity,
                                      double residual_visibility);

double correlation_of(const std::array<double, 4>& p);

/// Analytic E(thetaL, thetaR) including detection, residual-visibility,
/// and basis-misalignment factors.
double pair_correlation_noisy(const MixedState& state, double theta_l, double theta_r,
                              const NoiseConfig& noise);

/// S = |E(L,R) - E(L,R')| + |E(L',R) + E(L',R')|.  shots = 0 evaluates
/// analytically; otherwise `shots` Monte Carlo shots per setting pair.
ExperimentResult chsh_S(const CHSHSettings& settings, const MixedState& state,
                        std::uint64_t shots, const NoiseConfig& noise,
                        std::uint64_t seed, unsigned workers = 1);

struct WignerResult {
    double p_ab = 0.0, p_ac = 0.0, p_cb = 0.0;  // same-outcome (+,+) probabilities
    double se_ab = 0.0, se_ac = 0.0, se_cb = 0.0;
    double margin = 0.0;       // p_ab - p_ac - p_cb
    double sigma_level = 0.0;  // margin / combined std error (sampled mode)
    bool violation = false;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
};

/// Wigner's three-setting Bell test: flags violation when
/// P++(a,b) > P++(a,c) + P++(c,b), beyond three standard errors in
/// sampled mode.
WignerResult wigner_test(double a, double b, double c, const MixedState& state,
                         std::uint64_t shots, std::uint64_t seed, unsigned workers = 1);

struct FringePoint {
    double phi_l = 0.0;
    double phi_r = 0.0;
    double p_plus = 0.0;
    double p_minus = 0.0;
    double se = 0.0;
};

struct FringeScan {
    std::vector<FringePoint> points;
    double visibility = 0.0;
    double visibility_se = 0.0;
    std::uint64_t shots_per_point = 0;
    std::uint64_t seed = 0;
};

/// Two-atom interferometer over the four path modes: a phase shift on
/// each side's B path followed by a 50:50 recombiner.  The crossing
/// geometry leaves the pairing of far waveguide ends unresolved, so the
/// joint statistics average the two mode pairings (realized as a mode
/// swap ahead of the right interferometer); right-detector labels are
/// calibrated so equal phases give correlated outcomes.  The ideal state
/// then yields P+- = (1 +/- V cos(phiL) cos(phiR)) / 2, and the scan
/// fits V by least squares.
FringeScan fringe_scan(const std::vector<double>& phi_l_grid,
                       const std::vector<double>& phi_r_grid,
                       const MixedState& path_state, std::uint64_t shots_per_point,
                       const NoiseConfig& noise, std::uint64_t seed,
                       unsigned workers = 1);

struct EPRResult {
    double dx_um = 0.0;        // inferred Delta(x2|x1)
    double dp_hbar_um = 0.0;   // inferred Delta(p2|p1)
    double product_hbar = 0.0;
    double heisenberg_bound = 0.5;
    double dx_se = 0.0;
    double dp_se = 0.0;
    double product_se = 0.0;
    /// Momentum-reconstruction systematic from neglecting the initial
    /// position: (m / hbar t) * sqrt(Var(x0) + sigma_img^2), in hbar/um.
    double tof_systematic_hbar_um = 0.0;
    bool epr_violation = false;  // product < hbar/2
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
};

/// Conditional-variance EPR inference.  Position branch: in-situ images
/// (x1, x2) with independent Gaussian blur sigma_img.  Momentum branch:
/// ballistic time of flight x = x0 + p t / m, blurred, inverted with x0
/// neglected.  Conditional spreads come from linear-regression residuals
/// in sampled mode and from exact Gaussian conditioning when shots = 0.
EPRResult epr_infer(const GaussianPairState& cv, double sigma_img_um, double t_tof_s,
                    std::uint64_t shots, std::uint64_t seed, unsigned workers = 1);

/// Product-of-outcomes correlators on a 4-qubit state, one result per
/// basis-setting vector (per-qubit sigma_theta angles).
std::vector<ExperimentResult> ghz_correlations(
    const MixedState& state, const std::vector<std::array<double, 4>>& settings,
    std::uint64_t shots, std::uint64_t seed, unsigned workers = 1);

struct CollapseTrial {
    int measured_qubit = 0;
    double basis_angle = 0.0;
    int outcome = 0;
    MixedState collapsed;  // remaining qubits after tracing out the measured one
};

/// Measure one qubit projectively and return the renormalized state of
/// the remaining qubits (collapse verification support).
CollapseTrial ghz_collapse(const MixedState& state, int qubit, double theta,
                           rng::UniformSource& rng);

}  // namespace eprsim
