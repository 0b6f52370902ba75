#include "dyson/symfun.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>

namespace dyson::symfun {

std::vector<double> nodes_from_traces(const TraceVector<double>& t, double imag_tol) {
    const std::size_t n = t.dim();
    const auto phi = newton_c_from_t(t);
    if (n == 1) return {-phi.c[1]};

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) companion(0, static_cast<Eigen::Index>(k)) = -phi.c[k + 1];
    for (std::size_t k = 1; k < n; ++k)
        companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = 1.0;

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("companion eigensolver failed to converge");

    std::vector<double> roots;
    roots.reserve(n);
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
        const std::complex<double> z = solver.eigenvalues()(k);
        if (std::abs(z.imag()) > imag_tol * std::max(1.0, std::abs(z)))
            throw std::domain_error("trace vector has non-real spectrum");
        double x = z.real();
        // Two Newton polish steps; skipped near multiple roots where Phi' ~ 0.
        for (int it = 0; it < 2; ++it) {
            const double d = phi.derivative(x);
            if (std::abs(d) < 1e-12) break;
            const double step = phi(x) / d;
            if (!std::isfinite(step)) break;
            x -= step;
        }
        roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

namespace {

// Ascending-coefficient polynomial helpers over Rational.
using Poly = std::vector<Rational>;

void trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

Poly remainder(Poly a, const Poly& b) {
    trim(a);
    const std::size_t db = b.size() - 1;
    while (a.size() >= b.size()) {
        const Rational factor = a.back() / b.back();
        const std::size_t shift = a.size() - 1 - db;
        for (std::size_t k = 0; k <= db; ++k) a[shift + k] -= factor * b[k];
        a.pop_back();
        trim(a);
    }
    return a;
}

int sign_of(const Rational& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

std::size_t sign_changes(const std::vector<int>& signs) {
    std::size_t changes = 0;
    int last = 0;
    for (int s : signs) {
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

}  // namespace

SturmCount sturm_count(const CharPoly<Rational>& phi) {
    const std::size_t n = phi.degree();
    if (n == 0) return {};
    Poly p0(n + 1);
    for (std::size_t k = 0; k <= n; ++k) p0[n - k] = phi.c[k];
    Poly p1(n);
    for (std::size_t k = 1; k <= n; ++k) p1[k - 1] = p0[k] * Rational(static_cast<long>(k));
    trim(p1);

    std::vector<Poly> seq{p0};
    if (!p1.empty()) seq.push_back(p1);
    while (seq.size() >= 2 && seq.back().size() > 1) {
        Poly r = remainder(seq[seq.size() - 2], seq.back());
        if (r.empty()) break;
        for (auto& x : r) x = -x;
        seq.push_back(std::move(r));
    }

    std::vector<int> at_minus, at_plus;
    for (const auto& p : seq) {
        const int lead = sign_of(p.back());
        const std::size_t deg = p.size() - 1;
        at_plus.push_back(lead);
        at_minus.push_back(deg % 2 == 0 ? lead : -lead);
    }
    SturmCount out;
    out.distinct_real = sign_changes(at_minus) - sign_changes(at_plus);
    // The last element is gcd(p, p') up to a constant.
    out.distinct_total = n - (seq.back().size() - 1);
    return out;
}

}  // namespace dyson::symfun
