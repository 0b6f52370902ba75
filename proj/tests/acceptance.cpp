// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "dyson/bernoulli.hpp"
#include "dyson/dyson_sim.hpp"
#include "dyson/fokker_planck.hpp"
#include "dyson/statistics.hpp"
#include "dyson/symfun.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace dyson;
namespace fp = dyson::fokker_planck;
using Q = Rational;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;  // 0: none
    std::function<Verdict()> body;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

void note(const std::string& s) { std::printf("    %s\n", s.c_str()); }

// c_k = (-1)^k / k! det(M_k), M_k[i][j] = t_{i-j+1} for j <= i, M_k[i][i+1] = i.
std::vector<Q> newton_by_determinant(const symfun::TraceVector<Q>& t) {
    const std::size_t n = t.dim();
    std::vector<Q> c{Q(1)};
    Q factorial(1);
    for (std::size_t k = 1; k <= n; ++k) {
        factorial *= Q(static_cast<long>(k));
        std::vector<Q> m(k * k, Q(0));
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j <= i; ++j) m[i * k + j] = t[static_cast<long>(i - j + 1)];
            if (i + 1 < k) m[i * k + i + 1] = Q(static_cast<long>(i + 1));
        }
        c.push_back((k % 2 == 0 ? Q(1) : Q(-1)) * symfun::bareiss_determinant(m, k) / factorial);
    }
    return c;
}

// Central difference of t_k in t_m through root recovery.
double fd_dt_dtm(const std::vector<double>& nodes, std::size_t k, std::size_t m, double h) {
    const std::size_t n = nodes.size();
    const auto t = symfun::power_sums<double>(nodes, n);
    auto shifted = [&](double delta) {
        std::vector<double> v(t.values().begin(), t.values().begin() + static_cast<long>(n));
        v[m - 1] += delta;
        double s = 0.0;
        for (double r : symfun::nodes_from_traces(symfun::TraceVector<double>(n, v))) s += std::pow(r, static_cast<double>(k));
        return s;
    };
    return (shifted(h) - shifted(-h)) / (2 * h);
}

Verdict identity_suite() {
    std::size_t total = 0, nonzero = 0;
    for (std::size_t n = 1; n <= 8; ++n) {
        RandomStream rng(101, n);
        for (int tuple = 0; tuple < 20; ++tuple) {
            const auto nodes = symfun::random_rational_nodes(n, rng);
            const symfun::IdentityChecker<Q> chk(nodes, 12);
            for (std::size_t deg = 0; deg <= 12; ++deg) {
                for (const Q& r : {chk.identity_1(deg), chk.identity_2(deg), chk.identity_appendix(deg)}) {
                    ++total;
                    if (r != 0) ++nonzero;
                }
            }
        }
    }
    return {nonzero == 0, std::to_string(total) + " residuals, " + std::to_string(nonzero) + " nonzero"};
}

Verdict stationarity_exact() {
    std::size_t total = 0, nonzero = 0;
    for (int beta : {1, 2, 4})
        for (std::size_t n = 1; n <= 5; ++n) {
            RandomStream rng(202, 10 * n + static_cast<std::size_t>(beta));
            for (int p = 0; p < 10; ++p) {
                const auto nodes = symfun::random_rational_nodes(n, rng);
                const fp::StationarityCheck<Q> chk(nodes, beta);
                for (std::size_t k = 1; k <= n; ++k) {
                    ++total;
                    if (chk.residual(k).value != 0) ++nonzero;
                }
            }
        }
    return {nonzero == 0, std::to_string(total) + " equations at 150 points, " + std::to_string(nonzero) + " nonzero"};
}

Verdict oracle_equivalences() {
    std::size_t hankel_bad = 0, newton_bad = 0, extend_bad = 0;
    RandomStream rng(303, 0);
    for (std::size_t n = 1; n <= 8; ++n)
        for (int rep = 0; rep < 5; ++rep) {
            const auto nodes = symfun::random_rational_nodes(n, rng);
            const auto t = symfun::power_sums<Q>(nodes, n);
            if (symfun::gram_hankel(t).discriminant != symfun::discriminant_from_nodes<Q>(nodes)) ++hankel_bad;
            if (n <= 5 && symfun::newton_c_from_t(t).c != newton_by_determinant(t)) ++newton_bad;
            const auto direct = symfun::power_sums<Q>(nodes, 2 * n + 4);
            const auto ext = symfun::t_extend(t, n + 4);
            for (long k = 0; k <= static_cast<long>(2 * n + 4); ++k)
                if (ext[k] != direct[k]) ++extend_bad;
        }
    double worst = 0.0;
    const std::vector<std::vector<double>> node_sets{{-0.8, 1.1}, {-1.3, -0.2, 0.7}, {-1.3, -0.2, 0.7, 1.9}, {-2.0, -0.9, 0.1, 1.0, 2.2}};
    for (const auto& nodes : node_sets) {
        const auto basis = symfun::lagrange_basis<double>(nodes);
        const std::size_t n = nodes.size();
        for (std::size_t m = 1; m <= n; ++m)
            for (std::size_t k = n + 1; k <= n + 5; ++k) {
                const double exact = symfun::dt_dtm(basis, k, m);
                const double fd = fd_dt_dtm(nodes, k, m, 1e-5);
                worst = std::max(worst, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
            }
    }
    const bool ok = hankel_bad == 0 && newton_bad == 0 && extend_bad == 0 && worst <= 1e-6;
    return {ok, "hankel " + std::to_string(hankel_bad) + ", newton " + std::to_string(newton_bad) + ", t_extend " +
                    std::to_string(extend_bad) + " mismatches; dt_dtm fd rel " + fmt("%.2e", worst) + " (tol 1e-6)"};
}

Verdict n2_paper_numbers() {
    bool ok = true;
    std::ostringstream d;
    for (int beta : {1, 2, 4}) {
        sim::SdeConfig c;
        c.dt = 1e-3;
        c.burn_in = 5.0;
        c.sample_interval = 1.0;
        c.samples_per_trajectory = 100000;
        c.seed = 400 + static_cast<std::uint64_t>(beta);
        const auto s = sim::simulate_matrix_flow(EnsembleSpec(beta, 2), c);
        const auto t1 = s.column("t1"), t2 = s.column("t2");
        const double expected = 1.0 + 2.0 / beta;
        const double mean = stats::summarize(t2).mean;
        const double rel = std::abs(mean / expected - 1);
        const auto m1 = fp::marginal_t1_n2(beta), m2 = fp::marginal_t2_n2(beta);
        const double ks1 = stats::ks_one_sample(t1, [&](double x) { return m1.cdf(x); });
        const double ks2 = stats::ks_one_sample(t2, [&](double x) { return m2.cdf(x); });
        const double tol = beta == 4 ? 0.015 : 0.01;
        const bool good = rel < 0.02 && ks1 < tol && ks2 < tol;
        ok = ok && good;
        d << "b" << beta << ": <t2>=" << fmt("%.4f", mean) << " KS " << fmt("%.4f", ks1) << "/" << fmt("%.4f", ks2) << "; ";
    }
    return {ok, d.str() + "tol mean 2%, KS 0.01 (0.015 at b4)"};
}

Verdict catalan_moments() {
    const auto tau = fp::mean_trace_recursion(EnsembleSpec(2, 7), 24);
    std::size_t bad = 0;
    for (std::size_t k = 0; k <= 12; ++k)
        if (tau[2 * k] != fp::catalan(k) / ipow(Q(2), k) || (k > 0 && tau[2 * k - 1] != 0)) ++bad;

    sim::SdeConfig c;
    c.dt = 0.005;
    c.burn_in = 1.0;
    c.sample_interval = 0.05;
    c.samples_per_trajectory = 10000;
    c.record_traces = 4;
    c.seed = 505;
    const std::size_t n = 200;
    const auto s = sim::simulate_matrix_flow(EnsembleSpec(2, n), c);
    const double nd = static_cast<double>(n);
    double tau2 = 0, tau4 = 0;
    for (double x : s.column("t2")) tau2 += x / (nd * nd);
    for (double x : s.column("t4")) tau4 += x / (nd * nd * nd);
    tau2 /= static_cast<double>(s.rows());
    tau4 /= static_cast<double>(s.rows());
    const double r2 = std::abs(tau2 / 0.5 - 1), r4 = std::abs(tau4 / 0.5 - 1);
    return {bad == 0 && r2 < 0.02 && r4 < 0.05,
            std::to_string(bad) + " recursion mismatches; N=200 <tau2>=" + fmt("%.4f", tau2) + " (rel " + fmt("%.4f", r2) +
                ", tol 0.02) <tau4>=" + fmt("%.4f", tau4) + " (rel " + fmt("%.4f", r4) + ", tol 0.05)"};
}

Verdict cross_sampler() {
    bool ok = true;
    std::ostringstream d;
    for (int beta : {1, 2})
        for (std::size_t n : {2u, 3u}) {
            sim::SdeConfig c;
            c.dt = 1e-3;
            c.burn_in = 10.0;
            c.sample_interval = 0.5;
            c.samples_per_trajectory = 100000;
            c.seed = 600 + 10 * n + static_cast<std::uint64_t>(beta);
            const auto m = sim::simulate_matrix_flow(EnsembleSpec(beta, n), c);
            c.seed += 1000;
            const auto t = sim::simulate_trace_sde(EnsembleSpec(beta, n), c);
            const double ks = stats::ks_two_sample(m.column("t2"), t.column("t2"));
            ok = ok && ks < 0.02;
            d << "N" << n << "b" << beta << " KS " << fmt("%.4f", ks) << " rej " << fmt("%.1e", t.rejection_rate()) << "; ";
        }
    return {ok, d.str() + "tol 0.02"};
}

Verdict bernoulli_drift() {
    std::vector<double> gaps;
    std::ostringstream d;
    for (std::size_t n : {32u, 64u, 128u}) {
        double gap = 0;
        const int samples = 8;
        for (int k = 0; k < samples; ++k) {
            RandomStream rng(707, 1000 * n + static_cast<std::size_t>(k));
            const auto b = bernoulli::sample_bernoulli(n, rng);
            const auto m = bernoulli::exact_first_moment(b, 4);
            // Rate gap measured against the restoring term 4 tau4.
            gap += std::abs(m.exact - m.goe) / b.delta_s() / (4 * bernoulli::tau(b, 4));
        }
        gaps.push_back(gap / samples);
        d << "N" << n << " gap " << fmt("%.4f", gaps.back()) << "; ";
    }
    const double f1 = gaps[0] / gaps[1], f2 = gaps[1] / gaps[2];
    const bool ok = f1 >= 1.5 && f1 <= 2.5 && f2 >= 1.5 && f2 <= 2.5;
    return {ok, d.str() + "factors " + fmt("%.3f", f1) + ", " + fmt("%.3f", f2) + " (want [1.5, 2.5])"};
}

// Var over fresh samples of tau_r tau_s - zeta(r, s).
double concentration_variance(std::size_t n, unsigned r, unsigned s, int samples) {
    RandomStream rng(808, n);
    std::vector<double> g;
    for (int i = 0; i < samples; ++i) {
        const auto b = bernoulli::sample_bernoulli(n, rng);
        const bernoulli::SignPowers p(b, std::max(r, s));
        const double tr = bernoulli::evaluate({false, r, 0}, p, b);
        const double ts = bernoulli::evaluate({false, s, 0}, p, b);
        g.push_back(tr * ts - bernoulli::zeta(p, b, r, s).value);
    }
    return stats::summarize(g).variance;
}

Verdict zeta_concentration() {
    const std::vector<double> ns{16, 32, 64, 128};
    auto series = [&](unsigned r, unsigned s) {
        std::vector<double> v;
        for (double n : ns) v.push_back(concentration_variance(static_cast<std::size_t>(n), r, s, 1000));
        return v;
    };
    const auto v22 = series(2, 2);
    std::string values;
    for (double v : v22) values += fmt("%.3g", v) + " ";
    for (auto [r, s] : {std::pair{3u, 3u}, {3u, 4u}, {4u, 4u}}) {
        const auto v = series(r, s);
        note("supplementary Var(tau" + std::to_string(r) + " tau" + std::to_string(s) + " - zeta(" + std::to_string(r) + "," +
             std::to_string(s) + ")) slope " + fmt("%.3f", stats::log_log_fit(ns, v).slope));
    }
    try {
        const double slope = stats::log_log_fit(ns, v22).slope;
        return {std::abs(slope + 2) <= 0.5, "Var(tau2^2 - zeta(2,2)) = " + values + "slope " + fmt("%.3f", slope) + " (want -2 +- 0.5)"};
    } catch (const std::domain_error&) {
        return {false, "Var(tau2^2 - zeta(2,2)) = " + values +
                           "at N = 16..128: tau2^2 equals zeta(2,2) identically, no log-log fit exists"};
    }
}

Verdict conservation() {
    std::size_t violations = 0, changes = 0, mismatches = 0, steps = 0, non_constant = 0;
    for (std::size_t n : {8u, 32u, 128u}) {
        for (std::uint64_t traj = 0; traj < 3; ++traj) {
            RandomStream rng(909, 100 * n + traj);
            bernoulli::WalkOptions w;
            w.steps = n == 128 ? 20000 : 50000;
            w.refresh = 128;
            w.observables = {"tau2", "tau4"};
            const auto series = bernoulli::walk_and_measure(n, w, rng);
            violations += series.t2_violations;
            changes += series.t2_changes;
            mismatches += series.refresh_mismatches;
            steps += w.steps;
            const auto t2 = series.column("tau2");
            for (double x : t2)
                if (x != t2.front()) ++non_constant;
        }
    }
    const bool ok = violations == 0 && changes == 0 && mismatches == 0 && non_constant == 0;
    return {ok, std::to_string(steps) + " flips: " + std::to_string(violations) + " per-step t2 changes, " +
                    std::to_string(non_constant) + " non-constant tau2 records, " + std::to_string(mismatches) +
                    " incremental/recomputed mismatches"};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "identity suite (exact)", 120, identity_suite},
        {2, "stationarity (exact)", 120, stationarity_exact},
        {3, "oracle equivalences", 0, oracle_equivalences},
        {4, "N=2 means and marginals", 600, n2_paper_numbers},
        {5, "Catalan moments", 900, catalan_moments},
        {6, "cross-sampler agreement", 0, cross_sampler},
        {7, "Bernoulli drift limit", 600, bernoulli_drift},
        {8, "zeta concentration", 0, zeta_concentration},
        {9, "tau2 conservation", 0, conservation},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.body();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0 && secs > c.budget_seconds) {
            v.pass = false;
            v.detail += "; over runtime budget " + fmt("%.0f s", c.budget_seconds);
        }
        if (!v.pass) ++failures;
        std::printf("criterion %d %-26s %s  %s  [%.1f s]\n", c.id, c.name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
