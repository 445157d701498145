#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eprsim/qcore.hpp"
#include "test_util.hpp"

using namespace eprsim;
using testutil::rotation_oracle;

namespace {

constexpr double pi = std::numbers::pi;

MixedState singlet() {
    CVec amps = CVec::Zero(4);
    amps(1) = 1.0 / std::sqrt(2.0);
    amps(2) = -1.0 / std::sqrt(2.0);
    return MixedState::from_pure(PureState::from_amplitudes(2, amps));
}

}  // namespace

TEST_CASE("rotation: fixed-convention values") {
    // (z, 0): identity.
    CHECK(phase_distance(rotation(Axis::z, 0.0).matrix, CMat::Identity(2, 2)) < 1e-15);
    CHECK((rotation(Axis::z, 0.0).matrix - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-15);

    // (x, pi): -i sigma_x, i.e. [[0,-i],[-i,0]] under exp(-i theta sigma/2).
    CMat expect_x(2, 2);
    expect_x << cplx(0, 0), cplx(0, -1), cplx(0, -1), cplx(0, 0);
    CHECK((rotation(Axis::x, pi).matrix - expect_x).cwiseAbs().maxCoeff() < 1e-15);

    // (y, pi/2): (1/sqrt2) [[1,-1],[1,1]], cross-checked against the
    // series-expansion oracle.
    CMat expect_y(2, 2);
    expect_y << 1, -1, 1, 1;
    expect_y /= std::sqrt(2.0);
    CHECK((rotation(Axis::y, pi / 2).matrix - expect_y).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rotation_oracle(Axis::y, pi / 2) - expect_y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rotation matches the matrix-exponential oracle on a grid") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> angle(-2 * pi, 2 * pi);
    for (int i = 0; i < 50; ++i) {
        const double theta = angle(gen);
        for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
            CHECK((rotation(axis, theta).matrix - rotation_oracle(axis, theta))
                      .cwiseAbs()
                      .maxCoeff() < 1e-12);
        }
    }
    CHECK_THROWS_AS(rotation(Axis::x, std::nan("")), std::invalid_argument);
}

TEST_CASE("rotation group composition") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> angle(-pi, pi);
    for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
        for (int i = 0; i < 25; ++i) {
            const double a = angle(gen);
            const double b = angle(gen);
            const CMat lhs = rotation(axis, a).matrix * rotation(axis, b).matrix;
            CHECK((lhs - rotation(axis, a + b).matrix).cwiseAbs().maxCoeff() < 1e-10);
        }
        CHECK((rotation(axis, 2 * pi).matrix + CMat::Identity(2, 2))
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
        CHECK((rotation(axis, 4 * pi).matrix - CMat::Identity(2, 2))
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
    }
}

TEST_CASE("embed: examples") {
    // Identity on one qubit of two is the 4x4 identity.
    const Unitary id4 = embed(Unitary::identity(2), {0}, 2);
    CHECK((id4.matrix - CMat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);

    // sigma_x on qubit 1 flips |00> to |01>.
    Unitary flip;
    flip.dim = 2;
    flip.matrix = pauli(Axis::x);
    const Unitary x1 = embed(flip, {1}, 2);
    const PureState flipped = apply(x1, PureState::computational(2, 0b00));
    CHECK(std::abs(flipped.amplitudes(0b01) - 1.0) < 1e-15);

    // R_y(pi/2) on qubit 0 of |00> gives (|00> + |10>)/sqrt2; the oracle
    // is the direct 4x4 product kron(R, I).
    const Unitary ry = rotation(Axis::y, pi / 2);
    const CMat direct = kron(ry.matrix, CMat::Identity(2, 2));
    const Unitary embedded = embed(ry, {0}, 2);
    CHECK((embedded.matrix - direct).cwiseAbs().maxCoeff() < 1e-15);
    const PureState s = apply(embedded, PureState::computational(2, 0b00));
    CHECK(std::abs(s.amplitudes(0b00) - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(s.amplitudes(0b10) - 1.0 / std::sqrt(2.0)) < 1e-12);

    CHECK_THROWS_AS(embed(Unitary::identity(4), {0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(embed(Unitary::identity(4), {0, 0}, 2), std::invalid_argument);
}

TEST_CASE("embed: multi-qubit targets in arbitrary order") {
    // Entangling two-qubit unitary: local rotations then a CZ.
    CMat cz = CMat::Identity(4, 4);
    cz(3, 3) = -1.0;
    const CMat u2 =
        kron(rotation(Axis::x, 0.3).matrix, rotation(Axis::y, 0.7).matrix) * cz;
    Unitary u;
    u.dim = 4;
    u.matrix = u2;

    CHECK((embed(u, {0, 1}, 2).matrix - u2).cwiseAbs().maxCoeff() < 1e-15);

    // Independent oracle: build the embedded matrix by explicit action on
    // basis states, with u's qubit j reading target[j]'s bit.
    auto oracle = [&](const std::vector<int>& targets, int n) {
        const Eigen::Index dim = Eigen::Index(1) << n;
        CMat out = CMat::Zero(dim, dim);
        const int k = static_cast<int>(targets.size());
        for (Eigen::Index col = 0; col < dim; ++col) {
            Eigen::Index sub_col = 0;
            for (int j = 0; j < k; ++j) {
                sub_col |= ((col >> (n - 1 - targets[j])) & 1) << (k - 1 - j);
            }
            for (Eigen::Index sub_row = 0; sub_row < (Eigen::Index(1) << k);
                 ++sub_row) {
                Eigen::Index row = col;
                for (int j = 0; j < k; ++j) {
                    const Eigen::Index bit = Eigen::Index(1) << (n - 1 - targets[j]);
                    row = (row & ~bit) |
                          (((sub_row >> (k - 1 - j)) & 1) ? bit : Eigen::Index(0));
                }
                out(row, col) += u2(sub_row, sub_col);
            }
        }
        return out;
    };
    for (const std::vector<int>& targets :
         {std::vector<int>{1, 0}, {0, 2}, {2, 0}, {1, 2}}) {
        const int n = 3;
        const CMat direct = embed(u, targets, n).matrix;
        CHECK((direct - oracle(targets, n)).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((direct.adjoint() * direct - CMat::Identity(8, 8)).cwiseAbs().maxCoeff() <
              1e-12);
    }
    // Swapped order equals conjugation by SWAP.
    CMat swap = CMat::Zero(4, 4);
    swap(0, 0) = swap(3, 3) = 1.0;
    swap(1, 2) = swap(2, 1) = 1.0;
    CHECK((embed(u, {1, 0}, 2).matrix - swap * u2 * swap).cwiseAbs().maxCoeff() <
          1e-14);
}

TEST_CASE("apply: examples") {
    std::mt19937_64 gen(3);
    const PureState psi = testutil::random_pure_state(gen, 2);
    const PureState same = apply(Unitary::identity(4), psi);
    CHECK((same.amplitudes - psi.amplitudes).cwiseAbs().maxCoeff() == 0.0);

    // R_x(pi)|up> = -i |down>.
    const PureState up = PureState::computational(1, 0);
    const PureState flipped = apply(rotation(Axis::x, pi), up);
    CHECK(std::abs(flipped.amplitudes(1) - cplx(0, -1)) < 1e-15);

    // Two quarter turns equal one half turn (group-composition oracle).
    const PureState once = apply(rotation(Axis::x, pi), up);
    PureState twice = apply(rotation(Axis::x, pi / 2), up);
    twice = apply(rotation(Axis::x, pi / 2), twice);
    CHECK((twice.amplitudes - once.amplitudes).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(apply(Unitary::identity(4), up), std::invalid_argument);
}

TEST_CASE("measure_qubit: eigenstate, equatorial, singlet anticorrelation") {
    rng::UniformSource src(1234, 0);
    const PureState up = PureState::computational(1, 0);
    for (int i = 0; i < 20; ++i) {
        auto [rec, post] = measure_qubit(up, 0, 0.0, src);
        CHECK(rec.outcome == +1);
        CHECK(std::abs(post.amplitudes(0) - 1.0) < 1e-12);
    }

    // theta = pi/2: outcome +1 half the time at 1e5 shots (4 sigma).
    int plus = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        auto [rec, post] = measure_qubit(up, 0, pi / 2, src);
        plus += rec.outcome == +1;
    }
    const double freq = static_cast<double>(plus) / n;
    CHECK(std::abs(freq - 0.5) < 4.0 * std::sqrt(0.25 / n));

    // Singlet: same-angle outcomes are always opposite.
    CVec amps = CVec::Zero(4);
    amps(1) = 1.0 / std::sqrt(2.0);
    amps(2) = -1.0 / std::sqrt(2.0);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> angle(0, 2 * pi);
    for (int i = 0; i < 200; ++i) {
        const double theta = angle(gen);
        PureState state = PureState::from_amplitudes(2, amps);
        auto [rec_l, after_l] = measure_qubit(state, 0, theta, src);
        auto [rec_r, after_r] = measure_qubit(after_l, 1, theta, src);
        CHECK(rec_l.outcome == -rec_r.outcome);
    }
}

TEST_CASE("expectation reproduces the singlet correlation law") {
    const MixedState rho = singlet();
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> angle(-pi, pi);
    for (int i = 0; i < 100; ++i) {
        const double tl = angle(gen);
        const double tr = angle(gen);
        const double e = expectation(rho, kron(sigma_theta(tl), sigma_theta(tr)));
        CHECK(std::abs(e - (-std::cos(tl - tr))) < 1e-12);
    }
    // Equal settings anticorrelate; orthogonal settings decorrelate.
    CHECK(std::abs(expectation(rho, kron(sigma_theta(0.3), sigma_theta(0.3))) + 1.0) <
          1e-12);
    CHECK(std::abs(expectation(rho, kron(sigma_theta(0.0), sigma_theta(pi / 2)))) <
          1e-12);

    // Non-Hermitian observables are rejected.
    CMat bad(2, 2);
    bad << 0, 1, 2, 0;
    CHECK_THROWS_AS(expectation(MixedState::maximally_mixed(1), bad),
                    std::invalid_argument);
}

TEST_CASE("tensor and partial_trace: examples") {
    const PureState up = PureState::computational(1, 0);
    const PureState down = PureState::computational(1, 1);
    const PureState ud = tensor(up, down);
    CHECK(std::abs(ud.amplitudes(0b01) - 1.0) < 1e-15);

    // Tracing one side of the singlet leaves the maximally mixed qubit.
    const MixedState left = partial_trace(singlet(), {0});
    CHECK((left.rho - 0.5 * CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    // Tracing a product state recovers the factors.
    std::mt19937_64 gen(6);
    const MixedState a = testutil::random_density(gen, 1);
    const MixedState b = testutil::random_density(gen, 1);
    const MixedState ab = tensor(a, b);
    CHECK((partial_trace(ab, {0}).rho - a.rho).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((partial_trace(ab, {1}).rho - b.rho).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(partial_trace(ab, {}), std::invalid_argument);
}

TEST_CASE("partial_trace preserves trace and positivity") {
    std::mt19937_64 gen(10);
    const std::vector<std::vector<int>> keeps{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}};
    for (int i = 0; i < 50; ++i) {
        const MixedState rho = testutil::random_density(gen, 3);
        for (const auto& keep : keeps) {
            const MixedState reduced = partial_trace(rho, keep);
            CHECK(reduced.trace_error() < 1e-12);
            CHECK(reduced.hermiticity_error() < 1e-12);
            CHECK(reduced.min_eigenvalue() > -1e-10);
        }
    }
}

TEST_CASE("invariants survive 1000 random operations") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> angle(-2 * pi, 2 * pi);
    std::uniform_int_distribution<int> pick_axis(0, 2);
    std::uniform_int_distribution<int> pick_qubit(0, 2);

    PureState psi = testutil::random_pure_state(gen, 3);
    MixedState rho = testutil::random_density(gen, 3);
    for (int i = 0; i < 1000; ++i) {
        const Axis axis = static_cast<Axis>(pick_axis(gen));
        const Unitary u = embed(rotation(axis, angle(gen)), {pick_qubit(gen)}, 3);
        psi = apply(u, psi);
        rho = apply(u, rho);
    }
    CHECK(psi.norm_error() < 1e-12);
    CHECK(rho.hermiticity_error() < 1e-12);
    CHECK(rho.trace_error() < 1e-12);
    CHECK(rho.min_eigenvalue() > -1e-10);

    // Unitarity of long products.
    CMat prod = CMat::Identity(8, 8);
    for (int i = 0; i < 100; ++i) {
        prod = (embed(rotation(static_cast<Axis>(pick_axis(gen)), angle(gen)),
                      {pick_qubit(gen)}, 3)
                    .matrix *
                prod)
                   .eval();
    }
    CHECK((prod.adjoint() * prod - CMat::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("singlet rotational invariance over 100 random offsets") {
    const MixedState rho = singlet();
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> angle(-pi, pi);
    for (int i = 0; i < 100; ++i) {
        const double tl = angle(gen);
        const double tr = angle(gen);
        const double delta = angle(gen);
        const double base = expectation(rho, kron(sigma_theta(tl), sigma_theta(tr)));
        const double shifted = expectation(
            rho, kron(sigma_theta(tl + delta), sigma_theta(tr + delta)));
        CHECK(std::abs(base - shifted) < 1e-10);
    }
}

TEST_CASE("Unitary::checked rejects non-unitary matrices") {
    CMat not_unitary(2, 2);
    not_unitary << 1, 1, 0, 1;
    CHECK_THROWS_AS(Unitary::checked(not_unitary), std::invalid_argument);
    CHECK_NOTHROW(Unitary::checked(rotation(Axis::y, 0.3).matrix));
    CMat rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(Unitary::checked(rect), std::invalid_argument);
}

TEST_CASE("Born-rule sampling matches analytic probabilities at 1e5 shots") {
    std::mt19937_64 gen(9);
    const PureState psi = testutil::random_pure_state(gen, 2);
    const MixedState rho = MixedState::from_pure(psi);
    const double theta = 0.77;
    const double p_plus = outcome_probability(rho, 1, theta, +1);

    rng::UniformSource src(555, 0);
    const int n = 100000;
    int plus = 0;
    for (int i = 0; i < n; ++i) {
        auto [rec, post] = measure_qubit(psi, 1, theta, src);
        plus += rec.outcome == +1;
    }
    const double freq = static_cast<double>(plus) / n;
    const double se = std::sqrt(p_plus * (1 - p_plus) / n);
    CHECK(std::abs(freq - p_plus) < 4.0 * se);
}
