#include "dyson/bernoulli.hpp"
#include "dyson/fokker_planck.hpp"
#include "dyson/statistics.hpp"

#include <doctest.h>

#include <cmath>

using namespace dyson;
using namespace dyson::bernoulli;

namespace {

// tr S^n from scratch, for every n up to n_max.
std::vector<Int128> brute_traces(const BernoulliMatrix& b, unsigned n_max) {
    const SignPowers p(b, n_max);
    std::vector<Int128> t(n_max + 1);
    for (unsigned k = 0; k <= n_max; ++k) t[k] = p.trace(k);
    return t;
}

}  // namespace

TEST_CASE("samples: tau1 vanishes and tau2 is fixed by the amplitude") {
    RandomStream rng(1, 0);
    for (std::size_t n : {2u, 3u, 10u, 33u}) {
        const auto half = sample_bernoulli(n, rng);
        CHECK(tau(half, 1) == 0.0);
        CHECK(tau(half, 2) == doctest::Approx(static_cast<double>(n - 1) / (2.0 * n)).epsilon(1e-14));
        const auto unit = sample_bernoulli(n, rng, 1.0);
        CHECK(tau(unit, 2) == doctest::Approx(1.0 - 1.0 / static_cast<double>(n)).epsilon(1e-14));
        for (std::size_t p = 0; p < n; ++p) {
            CHECK(half.sign(p, p) == 0);
            for (std::size_t q = 0; q < n; ++q) CHECK(half.sign(p, q) == half.sign(q, p));
        }
    }
}

TEST_CASE("samples: signs are fair") {
    RandomStream rng(2, 0);
    double sum = 0;
    std::size_t count = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto b = sample_bernoulli(4, rng);
        for (std::size_t q = 1; q < 4; ++q) {
            sum += b.sign(0, q);
            ++count;
        }
    }
    CHECK(std::abs(sum / count) < 3.0 / std::sqrt(static_cast<double>(count)));
}

TEST_CASE("invalid matrices and moves") {
    CHECK_THROWS_AS(BernoulliMatrix(1, {0}), std::invalid_argument);
    CHECK_THROWS_AS(BernoulliMatrix(2, {1, 1, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(BernoulliMatrix(2, {0, 1, -1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(BernoulliMatrix(2, {0, 2, 2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(BernoulliMatrix(2, {0, 1, 1, 0}, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(FlipMove(1, 1, 3), std::invalid_argument);
    CHECK_THROWS_AS(FlipMove(2, 1, 3), std::invalid_argument);
    CHECK_THROWS_AS(FlipMove(0, 3, 3), std::invalid_argument);
    RandomStream rng(3, 0);
    CHECK_THROWS_AS(sample_bernoulli(1, rng), std::invalid_argument);
    const auto b = sample_bernoulli(5, rng);
    CHECK_THROWS_AS(exact_first_moment(b, 9), std::out_of_range);
    CHECK_THROWS_AS(exact_second_moment(b, 2, 0), std::out_of_range);
}

TEST_CASE("flip is an involution that preserves t2 and membership") {
    RandomStream rng(4, 0);
    const auto b = sample_bernoulli(9, rng);
    for (std::size_t p = 0; p < 9; ++p)
        for (std::size_t q = p + 1; q < 9; ++q) {
            const FlipMove mv(p, q, 9);
            const auto once = flip_step(b, mv);
            CHECK(once.sign(p, q) == -b.sign(p, q));
            CHECK(once.sign(q, p) == -b.sign(q, p));
            CHECK(flip_step(once, mv) == b);
            CHECK(brute_traces(once, 2)[2] == brute_traces(b, 2)[2]);
            CHECK_NOTHROW(BernoulliMatrix(9, std::vector<std::int8_t>(once.signs().begin(), once.signs().end())));
        }
}

TEST_CASE("random moves are uniform over the upper triangle") {
    RandomStream rng(5, 0);
    const std::size_t n = 5;
    std::vector<int> counts(n * n, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto mv = random_move(n, rng);
        REQUIRE(mv.p < mv.q);
        REQUIRE(mv.q < n);
        ++counts[mv.p * n + mv.q];
    }
    const double expected = draws / 10.0;
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) CHECK(std::abs(counts[p * n + q] - expected) < 5 * std::sqrt(expected));
}

TEST_CASE("zeta: trivial values, symmetry and the Cauchy-Schwarz bound") {
    RandomStream rng(6, 0);
    for (std::size_t n : {4u, 11u, 20u}) {
        const auto b = sample_bernoulli(n, rng);
        CHECK(zeta(b, 0, 0).value == doctest::Approx(1.0));
        CHECK(zeta(b, 1, 1).value == 0.0);
        // (B^2)_pp = a^2 (N - 1), so zeta(0, 2) equals tau2.
        CHECK(zeta(b, 0, 2).value == doctest::Approx(tau(b, 2)));
        for (unsigned r = 0; r <= 4; ++r)
            for (unsigned s = 0; s <= 4; ++s) {
                CHECK(zeta(b, r, s).value == zeta(b, s, r).value);
                const double bound = std::sqrt(zeta(b, 2 * r, 0).value * zeta(b, 2 * s, 0).value);
                const double self_r = zeta(b, r, r).value, self_s = zeta(b, s, s).value;
                CHECK(std::abs(zeta(b, r, s).value) <= std::sqrt(self_r * self_s) * (1 + 1e-12));
                // sum_p (S^r)_pp^2 <= sum_p (S^{2r})_pp, so the stated bound also holds.
                CHECK(std::abs(zeta(b, r, s).value) <= bound * (1 + 1e-12) + 1e-15);
            }
    }
}

TEST_CASE("word expansion of a flip matches recomputation from scratch") {
    RandomStream rng(7, 0);
    for (std::size_t n : {2u, 3u, 6u, 9u}) {
        const auto b = sample_bernoulli(n, rng);
        const unsigned n_max = std::min(8u, max_safe_power(n));
        const SignPowers powers(b, n_max);
        const auto before = brute_traces(b, n_max);
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                std::vector<std::array<std::int64_t, 4>> blocks;
                for (unsigned a = 0; a < n_max; ++a)
                    blocks.push_back({powers.at(a, p, p), powers.at(a, p, q), powers.at(a, q, p), powers.at(a, q, q)});
                const auto delta = flip_trace_changes(blocks, -2 * b.sign(p, q), n_max);
                const auto after = brute_traces(flip_step(b, FlipMove(p, q, n)), n_max);
                for (unsigned k = 1; k <= n_max; ++k) REQUIRE(delta[k] == after[k] - before[k]);
            }
    }
}

TEST_CASE("exact power budget") {
    CHECK(max_safe_power(2) >= 8);
    CHECK(max_safe_power(128) >= 8);
    CHECK(max_safe_power(1u << 20) < 8);
    RandomStream rng(8, 0);
    const auto b = sample_bernoulli(4, rng);
    CHECK_THROWS_AS(SignPowers(b, max_safe_power(4) + 1), std::out_of_range);
}

TEST_CASE("first moment: orders 1 and 2 vanish exactly, order 3 matches the leading formula") {
    RandomStream rng(9, 0);
    for (std::size_t n : {3u, 8u, 24u}) {
        const auto b = sample_bernoulli(n, rng);
        CHECK(exact_first_moment(b, 1).exact == 0.0);
        CHECK(exact_first_moment(b, 2).exact == 0.0);
        const auto m3 = exact_first_moment(b, 3);
        // Odd orders have no higher-order remainder beyond the terms kept.
        CHECK(m3.exact == doctest::Approx(m3.leading).epsilon(1e-9));
    }
}

TEST_CASE("first moment of tau4 approaches the GOE drift at rate 1/N") {
    // Gap measured in rate units against the restoring term 4 tau4.
    std::vector<double> gaps;
    for (std::size_t n : {32u, 64u, 128u}) {
        double gap = 0;
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            RandomStream rng(seed, 10);
            const auto b = sample_bernoulli(n, rng);
            const auto m = exact_first_moment(b, 4);
            gap += std::abs(m.exact - m.goe) / b.delta_s() / (4 * tau(b, 4));
        }
        gaps.push_back(gap / 4);
        CHECK(gaps.back() < 10.0 / n);
    }
    CHECK(gaps[0] / gaps[1] == doctest::Approx(2.0).epsilon(0.25));
    CHECK(gaps[1] / gaps[2] == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("GOE drift in tau units matches the trace drift formula") {
    RandomStream rng(11, 0);
    const auto b = sample_bernoulli(6, rng);
    // R_3 = -3 t_3 + 3 t_0 t_1 + 3 t_1 at beta = 1, with t_1 = 0.
    const SignPowers p(b, 3);
    const double a = b.amplitude();
    const double t3 = static_cast<double>(p.trace(3)) * a * a * a;
    CHECK(goe_drift_tau(b, 3) == doctest::Approx(-3 * t3 * std::pow(6.0, -2.5)));
}

TEST_CASE("second moment: (2,2) vanishes, symmetry, and (3,3) approaches the leading term") {
    RandomStream rng(12, 0);
    for (std::size_t n : {5u, 16u}) {
        const auto b = sample_bernoulli(n, rng);
        CHECK(exact_second_moment(b, 2, 2).exact == 0.0);
        for (unsigned i = 1; i <= 4; ++i)
            for (unsigned j = 1; j <= 4; ++j)
                CHECK(exact_second_moment(b, i, j).exact == doctest::Approx(exact_second_moment(b, j, i).exact));
    }
    for (std::size_t n : {16u, 64u}) {
        RandomStream r(13, n);
        const auto b = sample_bernoulli(n, r);
        const auto m = exact_second_moment(b, 3, 3);
        CHECK(m.exact / m.leading == doctest::Approx(1.0).epsilon(4.0 / n));
    }
}

TEST_CASE("walk: exact conservation of t2 and exact incremental traces") {
    RandomStream rng(14, 0);
    WalkOptions opt;
    opt.steps = 3000;
    opt.refresh = 100;
    opt.observables = {"tau2", "tau3", "tau4", "tau6", "zeta22", "zeta1,3"};
    const auto w = walk_and_measure(20, opt, rng);
    CHECK(w.rows() == 3001);
    CHECK(w.t2_violations == 0);
    CHECK(w.t2_changes == 0);
    CHECK(w.refresh_checks == 30);
    CHECK(w.refresh_mismatches == 0);
    const auto t2 = w.column("tau2");
    for (double x : t2) REQUIRE(x == t2.front());
    CHECK(w.times[10] == doctest::Approx(10 * 2.0 / 190));
    CHECK_THROWS_AS(w.column("tau5"), std::out_of_range);
}

TEST_CASE("walk series agree with a replay of the same flips") {
    WalkOptions opt;
    opt.steps = 200;
    opt.record_every = 50;
    opt.observables = {"tau4", "zeta2,2"};
    RandomStream a(15, 0);
    const auto w = walk_and_measure(12, opt, a);
    RandomStream replay(15, 0);
    auto b = sample_bernoulli(12, replay);
    for (std::size_t step = 1; step <= opt.steps; ++step) {
        const auto mv = random_move(12, replay);
        b.flip(mv.p, mv.q);
        if (step % 50 == 0) {
            const std::size_t row = step / 50;
            CHECK(w.data[row * 2] == doctest::Approx(tau(b, 4)).epsilon(1e-14));
            CHECK(w.data[row * 2 + 1] == doctest::Approx(zeta(b, 2, 2).value).epsilon(1e-14));
        }
    }
    WalkOptions bad = opt;
    bad.observables = {"lambda1"};
    CHECK_THROWS_AS(walk_and_measure(12, bad, a), std::invalid_argument);
}

TEST_CASE("walk: long-run tau4 at N = 128 sits within 5% of the GOE mean") {
    RandomStream rng(16, 0);
    WalkOptions opt;
    opt.steps = 40000;
    opt.record_every = 400;
    opt.refresh = 4000;
    opt.observables = {"tau4"};
    const auto w = walk_and_measure(128, opt, rng);
    const auto s = stats::summarize(w.column("tau4"));
    const auto goe = fokker_planck::mean_trace_recursion(EnsembleSpec(1, 128), 4);
    CHECK(std::abs(s.mean / goe[4].convert_to<double>() - 1) < 0.05);
    // Exact Bernoulli mean: a^4 N^{-3} [N (N-1)^2 + N (N-1)(N-2)].
    const double n = 128;
    const double exact = 0.25 * ((n - 1) * (n - 1) + (n - 1) * (n - 2)) / (n * n);
    CHECK(std::abs(s.mean - exact) < 5 * s.standard_error() + 1e-4);
}

TEST_CASE("eigenvector second moment over the flip neighbourhood") {
    RandomStream rng(17, 0);
    for (std::size_t n : {4u, 12u, 30u}) {
        for (double amp : {kDefaultAmplitude, 1.0}) {
            const auto b = sample_bernoulli(n, rng, amp);
            for (auto [nu, mu] : {std::pair<std::size_t, std::size_t>{0, 0}, {0, n - 1}, {1, 2}}) {
                const auto e = eigenvector_second_moment(b, nu, mu);
                CHECK(e.exact == doctest::Approx(e.formula).epsilon(1e-10));
            }
        }
    }
}
