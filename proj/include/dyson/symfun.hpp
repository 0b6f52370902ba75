#pragma once

// Symmetric-function kernel in trace coordinates.
//
// Everything here is templated on the scalar field F. With F = Rational the
// results are exact, which is what the identity checks rely on; F = double
// is the floating path used by the simulators.

#include "dyson/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyson::symfun {

/// Power sums t_0..t_K of an N-point spectrum, t_0 = N.
///
/// The first N entries are the independent coordinates. Entries beyond N are
/// functions of them through the characteristic-polynomial recursion; for
/// exact fields the constructor checks that they are consistent.
template <class F>
class TraceVector {
public:
    TraceVector() = default;

    /// `values` holds (t_1, ..., t_K) with K >= dim.
    TraceVector(std::size_t dim, std::vector<F> values);

    std::size_t dim() const noexcept { return dim_; }
    /// Highest stored index K.
    std::size_t size() const noexcept { return t_.empty() ? 0 : t_.size() - 1; }

    /// t_k; t_0 = N and t_k = 0 for k < 0.
    F operator[](long k) const {
        if (k < 0) return F(0);
        if (static_cast<std::size_t>(k) >= t_.size())
            throw std::out_of_range("trace index " + std::to_string(k) + " beyond stored range " +
                                    std::to_string(size()));
        return t_[static_cast<std::size_t>(k)];
    }

    /// (t_1, ..., t_K).
    std::span<const F> values() const noexcept { return std::span<const F>(t_).subspan(1); }

    /// Rescaled trace tau_k = N^{-k/2-1} t_k.
    double tau(std::size_t k) const {
        return to_double((*this)[static_cast<long>(k)]) *
               std::pow(static_cast<double>(dim_), -0.5 * static_cast<double>(k) - 1.0);
    }

private:
    friend TraceVector extend_unchecked(TraceVector v, std::vector<F> more) {
        for (auto& x : more) v.t_.push_back(std::move(x));
        return v;
    }

    std::size_t dim_ = 0;
    std::vector<F> t_;  // t_[0] = N
};

/// Monic characteristic polynomial Phi(X) = sum_k c_k X^{N-k}, c_0 = 1.
template <class F>
struct CharPoly {
    std::vector<F> c;

    std::size_t degree() const noexcept { return c.size() - 1; }

    F operator()(const F& x) const {
        F acc(0);
        for (const auto& ck : c) acc = acc * x + ck;
        return acc;
    }
    /// Phi'(x)
    F derivative(const F& x) const {
        const std::size_t n = degree();
        F acc(0);
        for (std::size_t k = 0; k < n; ++k) acc = acc * x + c[k] * F(static_cast<long>(n - k));
        return acc;
    }
    /// Phi''(x)
    F second_derivative(const F& x) const {
        const std::size_t n = degree();
        F acc(0);
        for (std::size_t k = 0; k + 1 < n; ++k)
            acc = acc * x + c[k] * F(static_cast<long>((n - k) * (n - k - 1)));
        return acc;
    }
};

/// Polynomial prod_a (X - nodes[a]) as a CharPoly.
template <class F>
CharPoly<F> poly_from_nodes(std::span<const F> nodes) {
    CharPoly<F> p{{F(1)}};
    for (const auto& lam : nodes) {
        p.c.push_back(F(0));
        for (std::size_t k = p.c.size() - 1; k >= 1; --k) p.c[k] -= lam * p.c[k - 1];
    }
    return p;
}

/// Newton's identities: k c_k = -sum_{i=1}^{k} t_i c_{k-i}.
template <class F>
CharPoly<F> newton_c_from_t(const TraceVector<F>& t) {
    const std::size_t n = t.dim();
    if (t.size() < n) throw std::invalid_argument("newton_c_from_t needs t_1..t_N");
    CharPoly<F> p;
    p.c.assign(n + 1, F(0));
    p.c[0] = F(1);
    for (std::size_t k = 1; k <= n; ++k) {
        F acc(0);
        for (std::size_t i = 1; i <= k; ++i) acc += t[static_cast<long>(i)] * p.c[k - i];
        p.c[k] = -acc / F(static_cast<long>(k));
    }
    return p;
}

/// Append t_{K+1}..t_{K+r} via t_{N+r} = -sum_{k=1}^{N} c_k t_{N+r-k}.
template <class F>
TraceVector<F> t_extend(const TraceVector<F>& t, std::size_t r) {
    const std::size_t n = t.dim();
    const auto c = newton_c_from_t(t).c;
    std::vector<F> more;
    more.reserve(r);
    const std::size_t start = t.size() + 1;
    auto value = [&](std::size_t idx) -> F {
        return idx < start ? t[static_cast<long>(idx)] : more[idx - start];
    };
    for (std::size_t j = 0; j < r; ++j) {
        const std::size_t idx = start + j;
        F acc(0);
        for (std::size_t k = 1; k <= n; ++k) acc += c[k] * value(idx - k);
        more.push_back(-acc);
    }
    return extend_unchecked(t, std::move(more));
}

/// Extend (if needed) so that t_k is available.
template <class F>
TraceVector<F> t_extend_through(const TraceVector<F>& t, std::size_t k) {
    return k <= t.size() ? t : t_extend(t, k - t.size());
}

template <class F>
TraceVector<F>::TraceVector(std::size_t dim, std::vector<F> values) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("trace vector dimension must be positive");
    if (values.size() < dim)
        throw std::invalid_argument("trace vector needs at least N = " + std::to_string(dim) + " entries");
    t_.reserve(values.size() + 1);
    t_.push_back(F(static_cast<long>(dim)));
    for (std::size_t k = 0; k < dim; ++k) t_.push_back(values[k]);
    if (values.size() > dim) {
        const std::vector<F> tail(values.begin() + static_cast<long>(dim), values.end());
        if constexpr (is_exact_field_v<F>) {
            const auto ext = t_extend(*this, tail.size());
            for (std::size_t j = 0; j < tail.size(); ++j)
                if (ext[static_cast<long>(dim + 1 + j)] != tail[j])
                    throw std::invalid_argument("trace entries beyond N violate the power-sum recursion");
        }
        for (const auto& x : tail) t_.push_back(x);
    }
}

/// Power sums t_1..t_{k_max} of the given nodes (k_max >= N).
template <class F>
TraceVector<F> power_sums(std::span<const F> nodes, std::size_t k_max) {
    const std::size_t n = nodes.size();
    if (n == 0) throw std::invalid_argument("power_sums needs at least one node");
    k_max = std::max(k_max, n);
    std::vector<F> t(k_max, F(0));
    for (const auto& lam : nodes) {
        F p(1);
        for (std::size_t k = 0; k < k_max; ++k) {
            p *= lam;
            t[k] += p;
        }
    }
    // Entries beyond N are consistent by construction; skip the check.
    TraceVector<F> head(n, std::vector<F>(t.begin(), t.begin() + static_cast<long>(n)));
    return extend_unchecked(std::move(head), std::vector<F>(t.begin() + static_cast<long>(n), t.end()));
}

/// Determinant by fraction-free (Bareiss) elimination. `a` is row-major n x n.
/// For floating fields the pivot is chosen by magnitude.
template <class F>
F bareiss_determinant(std::vector<F> a, std::size_t n) {
    if (n == 0) return F(1);
    F sign(1), prev(1);
    auto at = [&](std::size_t i, std::size_t j) -> F& { return a[i * n + j]; };
    for (std::size_t k = 0; k + 1 < n; ++k) {
        std::size_t pivot = k;
        if constexpr (is_exact_field_v<F>) {
            while (pivot < n && at(pivot, k) == F(0)) ++pivot;
            if (pivot == n) return F(0);
        } else {
            for (std::size_t i = k + 1; i < n; ++i)
                if (std::abs(at(i, k)) > std::abs(at(pivot, k))) pivot = i;
            if (at(pivot, k) == 0.0) return F(0);
        }
        if (pivot != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(pivot, j));
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j)
                at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
            at(i, k) = F(0);
        }
        prev = at(k, k);
    }
    return sign * at(n - 1, n - 1);
}

/// The moment (Gram-Hankel) matrix V V^T with entries t_{i+j}, 0 <= i,j < N,
/// and its determinant, the discriminant Delta = G^2.
template <class F>
struct GramHankel {
    std::size_t dim = 0;
    std::vector<F> matrix;  // row-major
    F discriminant{};

    /// G = sqrt(Delta) when Delta >= 0.
    std::optional<double> root() const {
        const double d = to_double(discriminant);
        if (d < 0.0) return std::nullopt;
        return std::sqrt(d);
    }
};

template <class F>
GramHankel<F> gram_hankel(const TraceVector<F>& t) {
    const std::size_t n = t.dim();
    const auto ext = t_extend_through(t, 2 * n - 2);
    GramHankel<F> g;
    g.dim = n;
    g.matrix.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g.matrix[i * n + j] = ext[static_cast<long>(i + j)];
    g.discriminant = bareiss_determinant(g.matrix, n);
    return g;
}

/// prod_{a<b} (nodes[a] - nodes[b])^2.
template <class F>
F discriminant_from_nodes(std::span<const F> nodes) {
    F d(1);
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
            const F diff = nodes[a] - nodes[b];
            d *= diff * diff;
        }
    return d;
}

namespace detail {
template <class F>
void require_distinct(std::span<const F> nodes, const char* what) {
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = a + 1; b < nodes.size(); ++b)
            if (nodes[a] == nodes[b]) throw std::invalid_argument(std::string(what) + ": repeated nodes");
}
}  // namespace detail

/// |dt/dlambda| = N! prod_{mu<nu} (lambda_nu - lambda_mu) on the ordered sector.
template <class F>
F jacobian_factor(std::span<const F> nodes) {
    for (std::size_t a = 1; a < nodes.size(); ++a)
        if (!(nodes[a - 1] < nodes[a]))
            throw std::invalid_argument("jacobian_factor: nodes must be strictly ascending");
    F j(1);
    for (std::size_t k = 2; k <= nodes.size(); ++k) j *= F(static_cast<long>(k));
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = a + 1; b < nodes.size(); ++b) j *= nodes[b] - nodes[a];
    return j;
}

/// Lagrange basis Phi_a(X) = prod_{b != a} (X - l_b)/(l_a - l_b) = sum_n c_{a,n} X^n.
/// The coefficient table is the inverse of the Vandermonde matrix (l_a^n).
template <class F>
class LagrangeBasis {
public:
    explicit LagrangeBasis(std::vector<F> nodes);

    std::size_t dim() const noexcept { return nodes_.size(); }
    std::span<const F> nodes() const noexcept { return nodes_; }
    /// c_{alpha,n}, 0-based alpha, 0 <= n < N.
    const F& coefficient(std::size_t alpha, std::size_t n) const { return coeffs_[alpha * dim() + n]; }
    /// Phi_alpha evaluated at x.
    F evaluate(std::size_t alpha, const F& x) const {
        F acc(0);
        for (std::size_t n = dim(); n-- > 0;) acc = acc * x + coefficient(alpha, n);
        return acc;
    }
    const CharPoly<F>& char_poly() const noexcept { return phi_; }

private:
    std::vector<F> nodes_;
    std::vector<F> coeffs_;
    CharPoly<F> phi_;
};

template <class F>
LagrangeBasis<F>::LagrangeBasis(std::vector<F> nodes) : nodes_(std::move(nodes)) {
    const std::size_t n = nodes_.size();
    if (n == 0) throw std::invalid_argument("lagrange_basis: empty node set");
    detail::require_distinct<F>(nodes_, "lagrange_basis");
    phi_ = poly_from_nodes<F>(nodes_);
    coeffs_.assign(n * n, F(0));
    for (std::size_t a = 0; a < n; ++a) {
        // Ascending coefficients of prod_{b != a} (X - l_b).
        std::vector<F> q{F(1)};
        F denom(1);
        for (std::size_t b = 0; b < n; ++b) {
            if (b == a) continue;
            q.insert(q.begin(), F(0));
            for (std::size_t k = 0; k + 1 < q.size(); ++k) q[k] -= nodes_[b] * q[k + 1];
            denom *= nodes_[a] - nodes_[b];
        }
        for (std::size_t k = 0; k < n; ++k) coeffs_[a * n + k] = q[k] / denom;
    }
}

template <class F>
LagrangeBasis<F> lagrange_basis(std::span<const F> nodes) {
    return LagrangeBasis<F>(std::vector<F>(nodes.begin(), nodes.end()));
}

/// dt_n/dt_m = (n/m) sum_a l_a^{n-1} c_{a,m-1}, using c_{a,m-1} = m dl_a/dt_m.
/// m is 1-based (1..N).
template <class F>
F dt_dtm(const LagrangeBasis<F>& basis, std::size_t n, std::size_t m) {
    if (m < 1 || m > basis.dim())
        throw std::out_of_range("dt_dtm: coordinate index m must lie in 1..N");
    if (n == 0) return F(0);
    F acc(0);
    for (std::size_t a = 0; a < basis.dim(); ++a)
        acc += ipow(basis.nodes()[a], n - 1) * basis.coefficient(a, m - 1);
    return acc * F(static_cast<long>(n)) / F(static_cast<long>(m));
}

/// dDelta/dt_m from (m / 2 Delta) dDelta/dt_m = 1/2 sum_a c_{a,m-1} Phi''(l_a)/Phi'(l_a).
template <class F>
F dDelta_dtm(const LagrangeBasis<F>& basis, std::size_t m) {
    if (m < 1 || m > basis.dim())
        throw std::out_of_range("dDelta_dtm: coordinate index m must lie in 1..N");
    const auto& phi = basis.char_poly();
    F acc(0);
    for (std::size_t a = 0; a < basis.dim(); ++a) {
        const F& lam = basis.nodes()[a];
        acc += basis.coefficient(a, m - 1) * phi.second_derivative(lam) / phi.derivative(lam);
    }
    return discriminant_from_nodes<F>(basis.nodes()) * acc / F(static_cast<long>(m));
}

/// Evaluates both sides of the trace identities at one node set. Building
/// the Lagrange basis and the Delta gradient once lets every degree n reuse
/// them.
template <class F>
class IdentityChecker {
public:
    IdentityChecker(std::span<const F> nodes, std::size_t n_max)
        : basis_(std::vector<F>(nodes.begin(), nodes.end())),
          t_(power_sums<F>(nodes, n_max + nodes.size())),
          delta_(discriminant_from_nodes<F>(nodes)),
          n_max_(n_max) {
        for (std::size_t m = 1; m <= basis_.dim(); ++m) grad_delta_.push_back(dDelta_dtm(basis_, m));
    }

    std::size_t dim() const noexcept { return basis_.dim(); }
    const TraceVector<F>& traces() const noexcept { return t_; }

    /// 2 sum_m m dt_{n+m}/dt_m - [sum_{i+j=n} t_i t_j + (n+1) t_n]
    F identity_1(std::size_t n) const {
        check(n);
        F lhs(0);
        for (std::size_t m = 1; m <= dim(); ++m) lhs += F(static_cast<long>(m)) * dt_dtm(basis_, n + m, m);
        lhs *= F(2);
        return lhs - (pair_sum(n) + F(static_cast<long>(n + 1)) * t(n));
    }

    /// (1/Delta) sum_m m t_{n+m} dDelta/dt_m - [sum_{i+j=n} t_i t_j - (n+1) t_n]
    F identity_2(std::size_t n) const {
        check(n);
        if (delta_ == F(0)) throw std::domain_error("identity_2: discriminant vanishes");
        F lhs(0);
        for (std::size_t m = 1; m <= dim(); ++m)
            lhs += F(static_cast<long>(m)) * t(n + m) * grad_delta_[m - 1];
        lhs /= delta_;
        return lhs - (pair_sum(n) - F(static_cast<long>(n + 1)) * t(n));
    }

    /// 3 sum_m m(m-1) dt_{n+m}/dt_m - [sum_{i+j+k=n} t_i t_j t_k - (n+1)(n+2)/2 t_n]
    F identity_appendix(std::size_t n) const {
        check(n);
        F lhs(0);
        for (std::size_t m = 2; m <= dim(); ++m)
            lhs += F(static_cast<long>(m * (m - 1))) * dt_dtm(basis_, n + m, m);
        lhs *= F(3);
        F triple(0);
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; i + j <= n; ++j) triple += t(i) * t(j) * t(n - i - j);
        return lhs - (triple - F(static_cast<long>((n + 1) * (n + 2) / 2)) * t(n));
    }

private:
    F t(std::size_t k) const { return t_[static_cast<long>(k)]; }
    F pair_sum(std::size_t n) const {
        F s(0);
        for (std::size_t i = 0; i <= n; ++i) s += t(i) * t(n - i);
        return s;
    }
    void check(std::size_t n) const {
        if (n > n_max_) throw std::out_of_range("identity degree beyond the checker's prepared range");
    }

    LagrangeBasis<F> basis_;
    TraceVector<F> t_;
    F delta_;
    std::vector<F> grad_delta_;
    std::size_t n_max_;
};

template <class F>
F verify_identity_1(std::span<const F> nodes, std::size_t n) {
    return IdentityChecker<F>(nodes, n).identity_1(n);
}

template <class F>
F verify_identity_2(std::span<const F> nodes, std::size_t n) {
    return IdentityChecker<F>(nodes, n).identity_2(n);
}

template <class F>
F verify_identity_appendix(std::span<const F> nodes, std::size_t n) {
    return IdentityChecker<F>(nodes, n).identity_appendix(n);
}

/// Pairwise-distinct random rational nodes p/q with |p| <= numerator_bound and
/// 1 <= q <= denominator_bound, returned in ascending order.
template <class Rng>
std::vector<Rational> random_rational_nodes(std::size_t count, Rng& rng, long numerator_bound = 20,
                                            long denominator_bound = 7) {
    std::vector<Rational> nodes;
    while (nodes.size() < count) {
        const long p = static_cast<long>(rng.index(static_cast<std::size_t>(2 * numerator_bound + 1))) -
                       numerator_bound;
        const long q = static_cast<long>(rng.index(static_cast<std::size_t>(denominator_bound))) + 1;
        Rational x = make_rational(p, q);
        if (std::find(nodes.begin(), nodes.end(), x) == nodes.end()) nodes.push_back(std::move(x));
    }
    std::sort(nodes.begin(), nodes.end());
    return nodes;
}

// Non-template helpers (symfun.cpp).

/// Real roots of the polynomial with power sums t (floating path): companion
/// eigenvalues, Newton-polished, ascending. Throws std::domain_error when a
/// root has an imaginary part above `imag_tol` (relative to max(1, |root|)).
std::vector<double> nodes_from_traces(const TraceVector<double>& t, double imag_tol = 1e-8);

/// Number of distinct real roots of the monic polynomial via a Sturm sequence,
/// and the number of distinct roots overall (exact).
struct SturmCount {
    std::size_t distinct_real = 0;
    std::size_t distinct_total = 0;
};
SturmCount sturm_count(const CharPoly<Rational>& p);

}  // namespace dyson::symfun
