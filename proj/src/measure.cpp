#include "eprsim/measure.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "eprsim/constants.hpp"
#include "eprsim/kernels.hpp"

namespace eprsim {

namespace {

constexpr double pi = std::numbers::pi;

void require(bool cond, const std::string& what) {
    if (!cond) {
        throw std::invalid_argument(what);
    }
}

std::vector<double> to_cdf(std::span<const double> probs) {
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += std::max(0.0, probs[i]);
        cdf[i] = acc;
    }
    for (double& c : cdf) {
        c = std::min(c, 1.0);
    }
    cdf.back() = 1.0;
    return cdf;
}

/// Deterministic parallel categorical tally: per-block counts land in
/// block-indexed slots and are folded in index order.
std::vector<std::uint64_t> tally(std::uint64_t seed, std::uint32_t stream,
                                 std::uint64_t shots, std::span<const double> probs,
                                 unsigned workers) {
    const auto cdf = to_cdf(probs);
    const std::uint64_t block = kern::default_block_size;
    const std::uint64_t n_blocks = (shots + block - 1) / block;
    std::vector<std::vector<std::uint64_t>> partials(
        n_blocks, std::vector<std::uint64_t>(probs.size(), 0));
    kern::for_blocks(shots, block, workers,
                     [&](std::uint64_t b, std::uint64_t begin, std::uint64_t end) {
                         kern::categorical_tally(seed, stream, begin, end - begin, cdf,
                                                 partials[b].data());
                     });
    std::vector<std::uint64_t> counts(probs.size(), 0);
    for (const auto& part : partials) {
        for (std::size_t i = 0; i < counts.size(); ++i) {
            counts[i] += part[i];
        }
    }
    return counts;
}

struct PairEstimate {
    double value = 0.0;
    double se = 0.0;
};

/// E estimate from (++, +-, -+, --) counts.
PairEstimate correlation_from_counts(const std::vector<std::uint64_t>& counts) {
    const double n = static_cast<double>(counts[0] + counts[1] + counts[2] + counts[3]);
    const double e = (static_cast<double>(counts[0]) + static_cast<double>(counts[3]) -
                      static_cast<double>(counts[1]) - static_cast<double>(counts[2])) /
                     n;
    return {e, std::sqrt(std::max(0.0, 1.0 - e * e) / n)};
}

/// Sampled E for one setting pair.  Misalignment-free distributions are
/// precomputed once and tallied by the shot kernel; with basis jitter
/// the joint distribution is rebuilt per shot.
PairEstimate sample_pair_correlation(const MixedState& state, double theta_l,
                                     double theta_r, const NoiseConfig& noise,
                                     std::uint64_t shots, std::uint64_t seed,
                                     std::uint32_t stream, unsigned workers) {
    if (noise.basis_misalignment_sigma == 0.0) {
        const auto p = fold_pair_noise(pair_joint_probabilities(state, theta_l, theta_r),
                                       noise.detection_fidelity,
                                       noise.residual_visibility);
        const auto counts = tally(seed, stream, shots, p, workers);
        return correlation_from_counts(counts);
    }

    const double sigma = noise.basis_misalignment_sigma;
    const std::uint64_t block = kern::default_block_size;
    const std::uint64_t n_blocks = (shots + block - 1) / block;
    std::vector<std::array<std::uint64_t, 4>> partials(n_blocks,
                                                       std::array<std::uint64_t, 4>{});
    kern::for_blocks(shots, block, workers,
                     [&](std::uint64_t b, std::uint64_t begin, std::uint64_t end) {
                         for (std::uint64_t i = begin; i < end; ++i) {
                             const auto [dl, dr] = rng::normal_pair(seed, stream, i, 1);
                             const auto p = fold_pair_noise(
                                 pair_joint_probabilities(state, theta_l + sigma * dl,
                                                          theta_r + sigma * dr),
                                 noise.detection_fidelity, noise.residual_visibility);
                             const double u = rng::uniform(seed, stream, i, 0);
                             std::size_t bin = 3;
                             double acc = 0.0;
                             for (std::size_t j = 0; j < 3; ++j) {
                                 acc += p[j];
                                 if (u < acc) {
                                     bin = j;
                                     break;
                                 }
                             }
                             ++partials[b][bin];
                         }
                     });
    std::vector<std::uint64_t> counts(4, 0);
    for (const auto& part : partials) {
        for (std::size_t i = 0; i < 4; ++i) {
            counts[i] += part[i];
        }
    }
    return correlation_from_counts(counts);
}

}  // namespace

CHSHSettings CHSHSettings::standard() {
    return {3.0 * pi / 4.0, pi / 4.0, pi / 2.0, 0.0};
}

std::array<double, 4> pair_joint_probabilities(const MixedState& state, double theta_l,
                                               double theta_r) {
    require(state.n_qubits == 2, "pair_joint_probabilities: two-qubit state required");
    std::array<double, 4> p{};
    int idx = 0;
    for (int sl : {+1, -1}) {
        for (int sr : {+1, -1}) {
            const CMat proj =
                kron(sigma_theta_projector(theta_l, sl), sigma_theta_projector(theta_r, sr));
            p[idx++] = std::clamp((proj * state.rho).trace().real(), 0.0, 1.0);
        }
    }
    return p;
}

std::array<double, 4> fold_pair_noise(const std::array<double, 4>& p,
                                      double detection_fidelity,
                                      double residual_visibility) {
    std::array<double, 4> twirled{};
    for (int i = 0; i < 4; ++i) {
        twirled[i] = residual_visibility * p[i] + (1.0 - residual_visibility) * 0.25;
    }
    const double f = detection_fidelity;
    const double q = 1.0 - f;
    auto t = [&](int from, int to) { return from == to ? f : q; };
    std::array<double, 4> out{};
    for (int sl = 0; sl < 2; ++sl) {
        for (int sr = 0; sr < 2; ++sr) {
            double acc = 0.0;
            for (int ul = 0; ul < 2; ++ul) {
                for (int ur = 0; ur < 2; ++ur) {
                    acc += t(ul, sl) * t(ur, sr) * twirled[2 * ul + ur];
                }
            }
            out[2 * sl + sr] = acc;
        }
    }
    return out;
}

double correlation_of(const std::array<double, 4>& p) {
    return p[0] - p[1] - p[2] + p[3];
}

double pair_correlation_noisy(const MixedState& state, double theta_l, double theta_r,
                              const NoiseConfig& noise) {
    noise.validate();
    const auto p = fold_pair_noise(pair_joint_probabilities(state, theta_l, theta_r),
                                   noise.detection_fidelity, noise.residual_visibility);
    const double mis = std::exp(-noise.basis_misalignment_sigma *
                                noise.basis_misalignment_sigma);
    return mis * correlation_of(p);
}

ExperimentResult chsh_S(const CHSHSettings& settings, const MixedState& state,
                        std::uint64_t shots, const NoiseConfig& noise,
                        std::uint64_t seed, unsigned workers) {
    require(state.n_qubits == 2, "chsh_S: two-qubit state required");
    noise.validate();
    const std::array<std::pair<double, double>, 4> pairs{{
        {settings.theta_l, settings.theta_r},
        {settings.theta_l, settings.theta_rp},
        {settings.theta_lp, settings.theta_r},
        {settings.theta_lp, settings.theta_rp},
    }};
    std::array<double, 4> e{};
    std::array<double, 4> se{};
    if (shots == 0) {
        for (int i = 0; i < 4; ++i) {
            e[i] = pair_correlation_noisy(state, pairs[i].first, pairs[i].second, noise);
        }
    } else {
        for (int i = 0; i < 4; ++i) {
            const auto est = sample_pair_correlation(state, pairs[i].first,
                                                     pairs[i].second, noise, shots, seed,
                                                     static_cast<std::uint32_t>(i),
                                                     workers);
            e[i] = est.value;
            se[i] = est.se;
        }
    }
    ExperimentResult result;
    result.estimator = "chsh_S";
    result.value = std::abs(e[0] - e[1]) + std::abs(e[2] + e[3]);
    result.std_error =
        std::sqrt(se[0] * se[0] + se[1] * se[1] + se[2] * se[2] + se[3] * se[3]);
    result.shots = shots;
    result.seed = seed;
    result.settings = {{"theta_l", settings.theta_l},
                       {"theta_lp", settings.theta_lp},
                       {"theta_r", settings.theta_r},
                       {"theta_rp", settings.theta_rp},
                       {"correlations", {e[0], e[1], e[2], e[3]}},
                       {"correlation_errors", {se[0], se[1], se[2], se[3]}},
                       {"noise", to_json(noise)}};
    return result;
}

WignerResult wigner_test(double a, double b, double c, const MixedState& state,
                         std::uint64_t shots, std::uint64_t seed, unsigned workers) {
    require(state.n_qubits == 2, "wigner_test: two-qubit state required");
    const std::array<std::pair<double, double>, 3> pairs{{{a, b}, {a, c}, {c, b}}};
    std::array<double, 3> p{};
    std::array<double, 3> se{};
    for (int i = 0; i < 3; ++i) {
        const auto joint =
            pair_joint_probabilities(state, pairs[i].first, pairs[i].second);
        if (shots == 0) {
            p[i] = joint[0];
        } else {
            const auto counts =
                tally(seed, static_cast<std::uint32_t>(i), shots, joint, workers);
            p[i] = static_cast<double>(counts[0]) / static_cast<double>(shots);
            se[i] = std::sqrt(std::max(0.0, p[i] * (1.0 - p[i])) /
                              static_cast<double>(shots));
        }
    }
    WignerResult r;
    r.p_ab = p[0];
    r.p_ac = p[1];
    r.p_cb = p[2];
    r.se_ab = se[0];
    r.se_ac = se[1];
    r.se_cb = se[2];
    r.margin = p[0] - p[1] - p[2];
    const double combined =
        std::sqrt(se[0] * se[0] + se[1] * se[1] + se[2] * se[2]);
    r.sigma_level = combined > 0.0 ? r.margin / combined : 0.0;
    r.violation = shots == 0 ? r.margin > 0.0 : r.margin > 3.0 * combined;
    r.shots = shots;
    r.seed = seed;
    return r;
}

namespace {

/// Joint detector-outcome probabilities (++, +-, -+, --) at one fringe
/// point, averaging the two unresolved mode pairings.
std::array<double, 4> fringe_joint(const MixedState& path_state, double phi_l,
                                   double phi_r, const NoiseConfig& noise) {
    CMat splitter(2, 2);
    splitter << 1.0, 1.0, 1.0, -1.0;
    splitter /= std::sqrt(2.0);
    auto phase = [](double phi) {
        CMat m = CMat::Identity(2, 2);
        m(1, 1) = std::polar(1.0, phi);
        return m;
    };
    const CMat mode_swap = pauli(Axis::x);

    std::array<double, 4> port_probs{};  // (00, 01, 10, 11)
    for (int pairing = 0; pairing < 2; ++pairing) {
        CMat network = kron(splitter * phase(phi_l), splitter * phase(phi_r));
        if (pairing == 1) {
            network = network * kron(CMat::Identity(2, 2), mode_swap);
        }
        const CMat rho_out = network * path_state.rho * network.adjoint();
        for (int i = 0; i < 4; ++i) {
            port_probs[i] += 0.5 * std::clamp(rho_out(i, i).real(), 0.0, 1.0);
        }
    }
    // Detector labels: left +1 = port 0, right +1 = port 1 (calibrated so
    // equal phases give correlated outcomes on the ideal state).
    std::array<double, 4> p{};
    p[0] = port_probs[1];  // ++
    p[1] = port_probs[0];  // +-
    p[2] = port_probs[3];  // -+
    p[3] = port_probs[2];  // --
    return fold_pair_noise(p, noise.detection_fidelity, noise.residual_visibility);
}

}  // namespace

FringeScan fringe_scan(const std::vector<double>& phi_l_grid,
                       const std::vector<double>& phi_r_grid,
                       const MixedState& path_state, std::uint64_t shots_per_point,
                       const NoiseConfig& noise, std::uint64_t seed, unsigned workers) {
    require(!phi_l_grid.empty() && !phi_r_grid.empty(), "fringe_scan: empty grid");
    require(path_state.n_qubits == 2, "fringe_scan: two-qubit path state required");
    noise.validate();

    FringeScan scan;
    scan.shots_per_point = shots_per_point;
    scan.seed = seed;

    double num = 0.0;    // sum c_i y_i
    double den = 0.0;    // sum c_i^2
    double var_num = 0.0;  // sum c_i^2 Var(y_i)

    std::uint32_t stream = 0;
    for (double phi_l : phi_l_grid) {
        for (double phi_r : phi_r_grid) {
            const auto p = fringe_joint(path_state, phi_l, phi_r, noise);
            FringePoint point;
            point.phi_l = phi_l;
            point.phi_r = phi_r;
            if (shots_per_point == 0) {
                point.p_plus = p[0] + p[3];
                point.p_minus = p[1] + p[2];
            } else {
                const auto counts = tally(seed, stream, shots_per_point, p, workers);
                point.p_plus = static_cast<double>(counts[0] + counts[3]) /
                               static_cast<double>(shots_per_point);
                point.p_minus = 1.0 - point.p_plus;
                point.se = std::sqrt(std::max(0.0, point.p_plus * (1.0 - point.p_plus)) /
                                     static_cast<double>(shots_per_point));
            }
            const double c = std::cos(phi_l) * std::cos(phi_r);
            const double y = 2.0 * point.p_plus - 1.0;
            num += c * y;
            den += c * c;
            var_num += c * c * 4.0 * point.se * point.se;
            scan.points.push_back(point);
            ++stream;
        }
    }
    require(den > 0.0, "fringe_scan: grid has no fringe contrast (all cos terms zero)");
    scan.visibility = num / den;
    scan.visibility_se = std::sqrt(var_num) / den;
    return scan;
}

namespace {

struct RegressionStats {
    double conditional_sd = 0.0;
    double se = 0.0;
};

/// Two-pass least-squares residual: sd of y given x.
RegressionStats regress_residual(const std::vector<double>& x,
                                 const std::vector<double>& y) {
    const std::size_t n = x.size();
    require(n >= 3, "epr_infer: need at least 3 shots per branch");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    const double ss_res = syy - sxy * sxy / sxx;
    RegressionStats out;
    out.conditional_sd = std::sqrt(std::max(0.0, ss_res) / static_cast<double>(n - 2));
    out.se = out.conditional_sd / std::sqrt(2.0 * static_cast<double>(n - 2));
    return out;
}

double conditional_sd(double var_given, double var_target, double covar) {
    return std::sqrt(std::max(0.0, var_target - covar * covar / var_given));
}

}  // namespace

EPRResult epr_infer(const GaussianPairState& cv, double sigma_img_um, double t_tof_s,
                    std::uint64_t shots, std::uint64_t seed, unsigned workers) {
    require(sigma_img_um >= 0.0, "epr_infer: imaging blur must be non-negative");
    require(t_tof_s > 0.0, "epr_infer: time of flight must be positive");
    cv.check_positive_definite();

    const double blur2 = sigma_img_um * sigma_img_um;
    const double kappa = PhysicalConstants::mass_over_hbar_s_per_um2 / t_tof_s;

    EPRResult r;
    r.shots = shots;
    r.seed = seed;
    r.tof_systematic_hbar_um =
        kappa * std::sqrt(std::max(cv.cov(0, 0), cv.cov(2, 2)) + blur2);

    if (shots == 0) {
        // Exact Gaussian conditioning on the blurred covariance.
        r.dx_um = conditional_sd(cv.cov(0, 0) + blur2, cv.cov(2, 2) + blur2,
                                 cv.cov(0, 2));
        // p_hat_i = kappa (x0_i + blur_i) + p_i
        const double var_p1 = kappa * kappa * (cv.cov(0, 0) + blur2) + cv.cov(1, 1) +
                              2.0 * kappa * cv.cov(0, 1);
        const double var_p2 = kappa * kappa * (cv.cov(2, 2) + blur2) + cv.cov(3, 3) +
                              2.0 * kappa * cv.cov(2, 3);
        const double cov_p = kappa * kappa * cv.cov(0, 2) + cv.cov(1, 3) +
                             kappa * (cv.cov(0, 3) + cv.cov(2, 1));
        r.dp_hbar_um = conditional_sd(var_p1, var_p2, cov_p);
    } else {
        // Position branch (stream 0): draw (x1, x2) plus blur.
        {
            Eigen::Matrix2d cov_x;
            cov_x << cv.cov(0, 0), cv.cov(0, 2), cv.cov(2, 0), cv.cov(2, 2);
            const Eigen::Matrix2d l = cov_x.llt().matrixL();
            std::vector<double> z(shots * 4);
            kern::for_blocks(shots, kern::default_block_size, workers,
                             [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
                                 kern::normal_fill(seed, 0, begin, end - begin, 2,
                                                   z.data() + begin * 4);
                             });
            std::vector<double> x1(shots);
            std::vector<double> x2(shots);
            for (std::uint64_t i = 0; i < shots; ++i) {
                const double* zi = z.data() + i * 4;
                x1[i] = cv.mean(0) + l(0, 0) * zi[0] + sigma_img_um * zi[2];
                x2[i] = cv.mean(2) + l(1, 0) * zi[0] + l(1, 1) * zi[1] +
                        sigma_img_um * zi[3];
            }
            const auto stats = regress_residual(x1, x2);
            r.dx_um = stats.conditional_sd;
            r.dx_se = stats.se;
        }
        // Momentum branch (stream 1): draw the full 4-vector, fly, blur.
        {
            const Eigen::Matrix4d l = cv.cov.llt().matrixL();
            std::vector<double> z(shots * 6);
            kern::for_blocks(shots, kern::default_block_size, workers,
                             [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
                                 kern::normal_fill(seed, 1, begin, end - begin, 3,
                                                   z.data() + begin * 6);
                             });
            std::vector<double> p1(shots);
            std::vector<double> p2(shots);
            for (std::uint64_t i = 0; i < shots; ++i) {
                const double* zi = z.data() + i * 6;
                Eigen::Vector4d v = cv.mean + l * Eigen::Vector4d(zi[0], zi[1], zi[2], zi[3]);
                const double x_tof1 = v(0) + v(1) / kappa + sigma_img_um * zi[4];
                const double x_tof2 = v(2) + v(3) / kappa + sigma_img_um * zi[5];
                p1[i] = kappa * x_tof1;
                p2[i] = kappa * x_tof2;
            }
            const auto stats = regress_residual(p1, p2);
            r.dp_hbar_um = stats.conditional_sd;
            r.dp_se = stats.se;
        }
    }
    r.product_hbar = r.dx_um * r.dp_hbar_um;
    if (r.dx_um > 0.0 && r.dp_hbar_um > 0.0) {
        const double rel2 = (r.dx_se / r.dx_um) * (r.dx_se / r.dx_um) +
                            (r.dp_se / r.dp_hbar_um) * (r.dp_se / r.dp_hbar_um);
        r.product_se = r.product_hbar * std::sqrt(rel2);
    }
    r.epr_violation = r.product_hbar < r.heisenberg_bound;
    return r;
}

std::vector<ExperimentResult> ghz_correlations(
    const MixedState& state, const std::vector<std::array<double, 4>>& settings,
    std::uint64_t shots, std::uint64_t seed, unsigned workers) {
    require(state.n_qubits == 4, "ghz_correlations: four-qubit state required");
    std::vector<ExperimentResult> results;
    std::uint32_t stream = 0;
    for (const auto& thetas : settings) {
        // Joint distribution over the 16 sign patterns; bit j of the
        // index is 1 when qubit j reads -1.
        std::array<double, 16> p{};
        for (int idx = 0; idx < 16; ++idx) {
            CMat proj = CMat::Identity(1, 1);
            for (int q = 0; q < 4; ++q) {
                const int outcome = ((idx >> (3 - q)) & 1) ? -1 : +1;
                proj = kron(proj, sigma_theta_projector(thetas[q], outcome)).eval();
            }
            p[idx] = std::clamp((proj * state.rho).trace().real(), 0.0, 1.0);
        }
        ExperimentResult res;
        res.estimator = "ghz_correlator";
        res.shots = shots;
        res.seed = seed;
        res.settings = {{"basis_angles", thetas}};
        if (shots == 0) {
            double e = 0.0;
            for (int idx = 0; idx < 16; ++idx) {
                const int parity = __builtin_popcount(static_cast<unsigned>(idx)) % 2;
                e += (parity ? -1.0 : 1.0) * p[idx];
            }
            res.value = e;
        } else {
            const auto counts = tally(seed, stream, shots, p, workers);
            double e = 0.0;
            for (int idx = 0; idx < 16; ++idx) {
                const int parity = __builtin_popcount(static_cast<unsigned>(idx)) % 2;
                e += (parity ? -1.0 : 1.0) * static_cast<double>(counts[idx]);
            }
            e /= static_cast<double>(shots);
            res.value = e;
            res.std_error =
                std::sqrt(std::max(0.0, 1.0 - e * e) / static_cast<double>(shots));
        }
        results.push_back(std::move(res));
        ++stream;
    }
    return results;
}

CollapseTrial ghz_collapse(const MixedState& state, int qubit, double theta,
                           rng::UniformSource& rng) {
    auto [record, post] = measure_qubit(state, qubit, theta, rng);
    std::vector<int> keep;
    for (int q = 0; q < state.n_qubits; ++q) {
        if (q != qubit) {
            keep.push_back(q);
        }
    }
    CollapseTrial trial;
    trial.measured_qubit = qubit;
    trial.basis_angle = theta;
    trial.outcome = record.outcome;
    trial.collapsed = partial_trace(post, keep);
    return trial;
}

}  // namespace eprsim
