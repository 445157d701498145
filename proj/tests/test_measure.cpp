#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eprsim/constants.hpp"
#include "eprsim/measure.hpp"
#include "eprsim/source.hpp"
#include "test_util.hpp"

using namespace eprsim;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double tsirelson = 2.0 * 1.4142135623730951;

MixedState make_singlet(double f = 1.0) {
    PreparationConfig cfg;
    cfg.singlet_fidelity = f;
    return prepare_singlet(cfg);
}

MixedState make_path(double f = 1.0) {
    PreparationConfig cfg;
    cfg.singlet_fidelity = f;
    return prepare_path_state(cfg);
}

/// Singlet same-outcome probability oracle: P++ = sin^2((a-b)/2) / 2.
double wigner_oracle(double a, double b) {
    const double s = std::sin((a - b) / 2.0);
    return 0.5 * s * s;
}

double chsh_from_correlations(double e1, double e2, double e3, double e4) {
    return std::abs(e1 - e2) + std::abs(e3 + e4);
}

}  // namespace

TEST_CASE("chsh: ideal singlet at the standard angles gives 2 sqrt 2") {
    const auto r =
        chsh_S(CHSHSettings::standard(), make_singlet(), 0, NoiseConfig::ideal(), 0);
    CHECK(std::abs(r.value - 2.0 * std::sqrt(2.0)) < 1e-12);
    CHECK(r.std_error == 0.0);
    CHECK(r.shots == 0);
}

TEST_CASE("chsh: white-noise state scores zero at any settings") {
    std::mt19937_64 gen(29);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
    const MixedState white = make_singlet(0.0);
    for (int i = 0; i < 10; ++i) {
        const CHSHSettings settings{angle(gen), angle(gen), angle(gen), angle(gen)};
        const auto r = chsh_S(settings, white, 0, NoiseConfig::ideal(), 0);
        CHECK(std::abs(r.value) < 1e-12);
    }
}

TEST_CASE("chsh: product state |ud> gives sqrt 2 (product-correlation oracle)") {
    const MixedState ud = MixedState::from_pure(PureState::computational(2, 0b01));
    const auto r = chsh_S(CHSHSettings::standard(), ud, 0, NoiseConfig::ideal(), 0);
    // Oracle: E(tl, tr) = -cos(tl) cos(tr) for |ud>.
    const auto s = CHSHSettings::standard();
    auto e = [](double tl, double tr) { return -std::cos(tl) * std::cos(tr); };
    const double expected =
        chsh_from_correlations(e(s.theta_l, s.theta_r), e(s.theta_l, s.theta_rp),
                               e(s.theta_lp, s.theta_r), e(s.theta_lp, s.theta_rp));
    CHECK(std::abs(r.value - expected) < 1e-12);
    CHECK(std::abs(r.value - std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("chsh: sampled estimate converges to the analytic value") {
    NoiseConfig noise = NoiseConfig::ideal();
    noise.detection_fidelity = 0.99;
    noise.singlet_fidelity = 0.97;
    const MixedState state = make_singlet(0.97);
    const auto analytic = chsh_S(CHSHSettings::standard(), state, 0, noise, 0);
    const auto sampled = chsh_S(CHSHSettings::standard(), state, 100000, noise, 31, 2);
    CHECK(std::abs(sampled.value - analytic.value) < 4.0 * sampled.std_error);
}

TEST_CASE("chsh: basis misalignment jitter matches its analytic factor") {
    NoiseConfig noise = NoiseConfig::ideal();
    noise.basis_misalignment_sigma = 0.05;
    const MixedState state = make_singlet();
    const auto analytic = chsh_S(CHSHSettings::standard(), state, 0, noise, 0);
    // exp(-sigma^2) reduction at the standard angles.
    CHECK(analytic.value ==
          doctest::Approx(2.0 * std::sqrt(2.0) * std::exp(-0.0025)).epsilon(1e-12));
    const auto sampled = chsh_S(CHSHSettings::standard(), state, 200000, noise, 17, 2);
    CHECK(std::abs(sampled.value - analytic.value) < 4.0 * sampled.std_error);
}

TEST_CASE("chsh: wrong qubit count is rejected") {
    const MixedState one = MixedState::maximally_mixed(1);
    CHECK_THROWS_AS(chsh_S(CHSHSettings::standard(), one, 0, NoiseConfig::ideal(), 0),
                    std::invalid_argument);
}

TEST_CASE("wigner: equal angles never coincide on the singlet") {
    const auto r = wigner_test(0.7, 0.7, 1.2, make_singlet(), 0, 0);
    CHECK(std::abs(r.p_ab) < 1e-12);
}

TEST_CASE("wigner: the (0, 2pi/3, pi/3) configuration violates the bound") {
    const auto r = wigner_test(0.0, 2.0 * pi / 3.0, pi / 3.0, make_singlet(), 0, 0);
    CHECK(std::abs(r.p_ab - wigner_oracle(0.0, 2.0 * pi / 3.0)) < 1e-12);
    CHECK(std::abs(r.p_ab - 0.375) < 1e-12);
    CHECK(std::abs(r.p_ac + r.p_cb - 0.250) < 1e-12);
    CHECK(r.violation);

    const auto sampled =
        wigner_test(0.0, 2.0 * pi / 3.0, pi / 3.0, make_singlet(), 100000, 5, 2);
    CHECK(sampled.violation);
    CHECK(sampled.sigma_level > 5.0);
    CHECK(std::abs(sampled.p_ab - 0.375) < 4.0 * sampled.se_ab);
}

TEST_CASE("wigner: degenerate angle triples are allowed, never an error") {
    const auto r = wigner_test(0.9, 0.9, 0.9, make_singlet(), 0, 0);
    CHECK(std::abs(r.p_ab) < 1e-12);
    CHECK_FALSE(r.violation);
    const auto sampled = wigner_test(0.9, 0.9, 0.9, make_singlet(), 1000, 2, 1);
    CHECK_FALSE(sampled.violation);
}

TEST_CASE("wigner: Werner F=0.5 never violates, 100 random triples") {
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
    const MixedState werner = make_singlet(0.5);
    for (int i = 0; i < 100; ++i) {
        const auto r = wigner_test(angle(gen), angle(gen), angle(gen), werner, 0, 0);
        CHECK(r.margin <= 1e-12);
        CHECK_FALSE(r.violation);
    }
}

TEST_CASE("fringes: analytic probabilities equal the product law to 1e-12") {
    const MixedState path = make_path();
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) {
        grid.push_back(2.0 * pi * i / 8.0);
    }
    const auto scan = fringe_scan(grid, grid, path, 0, NoiseConfig::ideal(), 0);
    REQUIRE(scan.points.size() == 81);
    for (const auto& p : scan.points) {
        const double expected =
            0.5 * (1.0 + std::cos(p.phi_l) * std::cos(p.phi_r));
        CHECK(std::abs(p.p_plus - expected) < 1e-12);
        CHECK(p.p_plus + p.p_minus == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(std::abs(scan.visibility - 1.0) < 1e-12);
}

TEST_CASE("fringes: zero-phase point and quadrature point") {
    const MixedState path = make_path();
    const auto scan =
        fringe_scan({0.0, pi / 2}, {0.0, 1.1}, path, 0, NoiseConfig::ideal(), 0);
    // (0, 0): all coincidences in the correlated channel.
    CHECK(std::abs(scan.points[0].p_plus - 1.0) < 1e-12);
    CHECK(std::abs(scan.points[0].p_minus) < 1e-12);
    // (pi/2, anything): fringes wash out.
    CHECK(std::abs(scan.points[2].p_plus - 0.5) < 1e-12);
    CHECK(std::abs(scan.points[3].p_plus - 0.5) < 1e-12);
}

TEST_CASE("fringes: degraded state gives P+(0,0)=0.9 and a V=0.8 fit") {
    const MixedState path = make_path(0.8);
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) {
        grid.push_back(2.0 * pi * i / 8.0);
    }
    const auto analytic = fringe_scan(grid, grid, path, 0, NoiseConfig::ideal(), 0);
    CHECK(std::abs(analytic.points[0].p_plus - 0.9) < 1e-12);
    CHECK(std::abs(analytic.visibility - 0.8) < 1e-12);

    const auto sampled = fringe_scan(grid, grid, path, 10000, NoiseConfig::ideal(), 3, 2);
    CHECK(std::abs(sampled.visibility - 0.8) < 0.01);
    CHECK(std::abs(sampled.visibility - 0.8) < 4.0 * sampled.visibility_se);
}

TEST_CASE("fringes: Werner fidelity maps directly onto the visibility") {
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) {
        grid.push_back(2.0 * pi * i / 8.0);
    }
    const auto scan = fringe_scan(grid, grid, make_path(0.9), 0, NoiseConfig::ideal(), 0);
    CHECK(std::abs(scan.visibility - 0.9) < 1e-12);
}

TEST_CASE("fringes: visibility factors compose across state and detection") {
    NoiseConfig noise = NoiseConfig::ideal();
    noise.detection_fidelity = 0.99;
    noise.residual_visibility = 0.95;
    const MixedState path = make_path(0.9);
    const auto scan = fringe_scan({0.0}, {0.0}, path, 0, noise, 0);
    const double v = 0.9 * 0.98 * 0.98 * 0.95;
    CHECK(std::abs(scan.points[0].p_plus - 0.5 * (1.0 + v)) < 1e-12);
}

TEST_CASE("epr: reference parameter set lands on the blur-limited product") {
    DissociationSpec spec;
    spec.mean_momentum_hkrec = 120.0;
    spec.momentum_spread_hkrec = 0.02;
    const GaussianPairState cv = prepare_cv_state(spec, 1e-4);
    const double oracle = 1.0 * 0.02 * PhysicalConstants::k_rec_per_um;

    const auto analytic = epr_infer(cv, 1.0, 1.0, 0, 0);
    CHECK(std::abs(analytic.product_hbar - oracle) < 1e-6);
    CHECK(analytic.product_hbar < 0.5);
    CHECK(analytic.epr_violation);

    const auto sampled = epr_infer(cv, 1.0, 1.0, 100000, 77, 2);
    CHECK(std::abs(sampled.product_hbar - oracle) < 0.02);
    CHECK(std::abs(sampled.product_hbar - analytic.product_hbar) <
          4.0 * sampled.product_se);
}

TEST_CASE("epr: without blur the conditional momentum spread is recovered") {
    DissociationSpec spec;
    spec.mean_momentum_hkrec = 120.0;
    spec.momentum_spread_hkrec = 0.02;
    const GaussianPairState cv = prepare_cv_state(spec, 1e-3);
    const auto r = epr_infer(cv, 0.0, 100.0, 0, 0);
    const double spread = 0.02 * PhysicalConstants::k_rec_per_um;
    CHECK(r.dp_hbar_um == doctest::Approx(spread).epsilon(1e-6));
}

TEST_CASE("epr: analytic mode equals closed-form Gaussian conditioning") {
    DissociationSpec spec;
    spec.mean_momentum_hkrec = 80.0;
    spec.momentum_spread_hkrec = 0.05;
    const GaussianPairState cv = prepare_cv_state(spec, 0.01);
    const double blur = 0.7;
    const auto r = epr_infer(cv, blur, 2.0, 0, 0);
    // Position branch: sqrt(Var(x2) - Cov^2 / Var(x1)) on the blurred block.
    const double vx = cv.cov(0, 0) + blur * blur;
    const double dx = std::sqrt(vx - cv.cov(0, 2) * cv.cov(0, 2) / vx);
    CHECK(r.dx_um == doctest::Approx(dx).epsilon(1e-12));
}

TEST_CASE("epr: uncorrelated Gaussian shows no violation, conditionals = marginals") {
    GaussianPairState cv;
    cv.mean.setZero();
    cv.cov.setZero();
    const double sx = 1.3;
    const double sp = 0.9;  // sx*sp > 0.5: a valid, unentangled pair
    cv.cov(0, 0) = cv.cov(2, 2) = sx * sx;
    cv.cov(1, 1) = cv.cov(3, 3) = sp * sp;
    const auto r = epr_infer(cv, 0.0, 1000.0, 0, 0);
    CHECK(r.dx_um == doctest::Approx(sx).epsilon(1e-9));
    CHECK(r.dp_hbar_um == doctest::Approx(sp).epsilon(1e-6));
    CHECK_FALSE(r.epr_violation);
}

TEST_CASE("epr: perfect-correlation limit sends the product to zero") {
    DissociationSpec spec;
    spec.mean_momentum_hkrec = 0.0;
    spec.momentum_spread_hkrec = 1e-5;
    CvStateOptions waive;
    waive.enforce_heisenberg = false;
    const GaussianPairState cv = prepare_cv_state(spec, 1e-5, waive);
    const auto r = epr_infer(cv, 0.0, 1e3, 0, 0);
    CHECK(r.product_hbar < 1e-8);
}

TEST_CASE("epr: rejects bad inputs") {
    DissociationSpec spec;
    const GaussianPairState cv = prepare_cv_state(spec, 0.5);
    CHECK_THROWS_AS(epr_infer(cv, -1.0, 1.0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(epr_infer(cv, 1.0, 0.0, 0, 0), std::invalid_argument);
    GaussianPairState broken = cv;
    broken.cov(0, 0) = -1.0;
    CHECK_THROWS_AS(epr_infer(broken, 1.0, 1.0, 0, 0), std::invalid_argument);
}

TEST_CASE("ghz: all-z and all-x correlators, analytic and sampled") {
    PreparationConfig prep;
    const MixedState ghz = prepare_ghz_hyper(prep);
    const std::vector<std::array<double, 4>> settings{
        {0.0, 0.0, 0.0, 0.0}, {pi / 2, pi / 2, pi / 2, pi / 2}};
    const auto analytic = ghz_correlations(ghz, settings, 0, 0);
    CHECK(std::abs(analytic[0].value - 1.0) < 1e-12);
    CHECK(std::abs(analytic[1].value + 1.0) < 1e-12);

    const auto sampled = ghz_correlations(ghz, settings, 100000, 13, 2);
    CHECK(std::abs(sampled[0].value - 1.0) < 4.0 * std::max(sampled[0].std_error, 1e-4));
    CHECK(std::abs(sampled[1].value + 1.0) < 4.0 * std::max(sampled[1].std_error, 1e-4));
}

TEST_CASE("ghz: computational-basis collapse factorizes all correlators") {
    PreparationConfig prep;
    const MixedState ghz = prepare_ghz_hyper(prep);
    std::mt19937_64 gen(47);
    std::uniform_int_distribution<int> pick_qubit(0, 3);
    rng::UniformSource src(71, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const int qubit = pick_qubit(gen);
        const CollapseTrial t = ghz_collapse(ghz, qubit, 0.0, src);
        REQUIRE(t.collapsed.n_qubits == 3);
        // Random product observable: joint expectation must factorize.
        const CMat o1 = testutil::random_hermitian(gen, 2);
        const CMat o2 = testutil::random_hermitian(gen, 2);
        const CMat o3 = testutil::random_hermitian(gen, 2);
        const CMat id = CMat::Identity(2, 2);
        const double joint = expectation(t.collapsed, kron(kron(o1, o2), o3));
        const double product = expectation(t.collapsed, kron(kron(o1, id), id)) *
                               expectation(t.collapsed, kron(kron(id, o2), id)) *
                               expectation(t.collapsed, kron(kron(id, id), o3));
        CHECK(std::abs(joint - product) < 1e-10);
    }
}

TEST_CASE("property: Tsirelson bound over 1000 random entangled states") {
    std::mt19937_64 gen(53);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
    for (int i = 0; i < 1000; ++i) {
        const MixedState state =
            MixedState::from_pure(testutil::random_pure_state(gen, 2));
        const CHSHSettings settings{angle(gen), angle(gen), angle(gen), angle(gen)};
        const auto r = chsh_S(settings, state, 0, NoiseConfig::ideal(), 0);
        CHECK(r.value <= tsirelson + 1e-9);
    }
}

TEST_CASE("property: classical bound for product states, analytic and sampled") {
    std::mt19937_64 gen(59);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
    for (int i = 0; i < 1000; ++i) {
        const MixedState state =
            MixedState::from_pure(testutil::random_product_state(gen, 2));
        const CHSHSettings settings{angle(gen), angle(gen), angle(gen), angle(gen)};
        const auto analytic = chsh_S(settings, state, 0, NoiseConfig::ideal(), 0);
        CHECK(analytic.value <= 2.0 + 1e-9);
        const auto sampled = chsh_S(settings, state, 2000, NoiseConfig::ideal(),
                                    static_cast<std::uint64_t>(i), 1);
        CHECK(sampled.value <= 2.0 + 4.0 * sampled.std_error);
    }
}
