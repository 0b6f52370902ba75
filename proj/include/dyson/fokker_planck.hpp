#pragma once

// Fokker-Planck coefficients in trace coordinates, the stationary densities
// in trace and eigenvalue coordinates, the N = 2 marginals, and the
// mean-trace recursion.

#include "dyson/ensemble_spec.hpp"
#include "dyson/rational.hpp"
#include "dyson/symfun.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

namespace dyson::fokker_planck {

using symfun::TraceVector;

/// R_n = E(dt_n)/ds for any n >= 1 the traces can supply up to index n.
/// `t[k]` must return t_0 = N and t_{-1} = 0, as TraceVector does.
template <class Traces, class F = std::decay_t<decltype(std::declval<const Traces&>()[0L])>>
F drift_trace_component(const Traces& t, int beta, std::size_t n) {
    const long nn = static_cast<long>(n);
    F pair(0);
    for (long x = 0; x <= nn - 2; ++x) pair += t[x] * t[nn - 2 - x];
    const F bf(beta);
    return -F(nn) * t[nn] + F(nn) * pair / F(2) + (F(2) - bf) / bf * F(nn) * F(nn - 1) / F(2) * t[nn - 2];
}

/// Drift vector R_1..R_N.
template <class F>
std::vector<F> drift_traces(const TraceVector<F>& t, const EnsembleSpec& spec) {
    if (t.dim() != spec.dim) throw std::invalid_argument("trace vector dimension does not match ensemble");
    std::vector<F> r;
    r.reserve(spec.dim);
    for (std::size_t n = 1; n <= spec.dim; ++n) r.push_back(drift_trace_component(t, spec.beta, n));
    return r;
}

/// N x N row-major diffusion matrix R_nm = (2nm/beta) t_{n+m-2}.
template <class F>
std::vector<F> diffusion_traces(const TraceVector<F>& t, const EnsembleSpec& spec) {
    if (t.dim() != spec.dim) throw std::invalid_argument("trace vector dimension does not match ensemble");
    const std::size_t n = spec.dim;
    const auto full = symfun::t_extend_through(t, 2 * n - 2);
    std::vector<F> r(n * n);
    for (std::size_t a = 1; a <= n; ++a)
        for (std::size_t b = 1; b <= n; ++b)
            r[(a - 1) * n + (b - 1)] =
                F(2 * static_cast<long>(a * b)) / F(spec.beta) * full[static_cast<long>(a + b - 2)];
    return r;
}

template <class F>
struct DriftDiffusion {
    std::size_t dim = 0;
    std::vector<F> drift;      // R_n, n = 1..N
    std::vector<F> diffusion;  // R_nm, row-major

    const F& diffusion_at(std::size_t n, std::size_t m) const { return diffusion[(n - 1) * dim + (m - 1)]; }
};

template <class F>
DriftDiffusion<F> drift_diffusion(const TraceVector<F>& t, const EnsembleSpec& spec) {
    return {spec.dim, drift_traces(t, spec), diffusion_traces(t, spec)};
}

/// F_mu = sum_{nu != mu} 1/(lambda_mu - lambda_nu) - lambda_mu (mutual repulsion
/// plus confinement; the sign follows from second-order perturbation theory
/// and makes P(lambda) below stationary).
std::vector<double> drift_eigenvalues(std::span<const double> lambda);

/// Eigenvalue-space diffusion constant: E(dlambda_mu dlambda_nu) = (2/beta) delta ds.
inline double eigen_diffusion_constant(int beta) { return 2.0 / beta; }

/// LHS - RHS of the n-th stationary equation R_n Q = 1/2 sum_m d(R_nm Q)/dt_m
/// after dividing by Q = Delta^{(beta-1)/2} exp(-beta t_2/2). `scale` is the
/// largest magnitude among the individual terms.
template <class F>
struct Residual {
    F value;
    F scale;

    double relative() const {
        const double s = to_double(scale);
        return s == 0.0 ? std::abs(to_double(value)) : std::abs(to_double(value)) / s;
    }
};

/// Evaluator for all n at one interior point, given by its spectrum.
template <class F>
class StationarityCheck {
public:
    StationarityCheck(std::span<const F> nodes, int beta) : beta_(beta), basis_(symfun::lagrange_basis(nodes)) {
        const std::size_t n = nodes.size();
        t_ = symfun::power_sums(nodes, 2 * n);
        delta_ = symfun::discriminant_from_nodes(nodes);
        if (delta_ == F(0)) throw std::domain_error("stationarity residual needs an interior point");
        for (std::size_t m = 1; m <= n; ++m) dlogq_.push_back(dlog_q(m));
    }

    Residual<F> residual(std::size_t n) const {
        const std::size_t dim = basis_.nodes().size();
        if (n < 1 || n > dim) throw std::out_of_range("stationary equation index must be in 1..N");
        Residual<F> out{drift_trace_component(t_, beta_, n), F(0)};
        out.scale = abs_value(out.value);
        for (std::size_t m = 1; m <= dim; ++m) {
            const F coef = F(static_cast<long>(2 * n * m)) / F(beta_);
            const long k = static_cast<long>(n + m) - 2;
            // d(R_nm Q)/dt_m / Q = coef (dt_k/dt_m + t_k dlogQ/dt_m)
            const F d_part = coef * symfun::dt_dtm(basis_, static_cast<std::size_t>(k), m) / F(2);
            const F q_part = coef * t_[k] * dlogq_[m - 1] / F(2);
            out.value -= d_part + q_part;
            out.scale = std::max(out.scale, std::max(abs_value(d_part), abs_value(q_part)));
        }
        return out;
    }

    const TraceVector<F>& traces() const noexcept { return t_; }

private:
    F dlog_q(std::size_t m) const {
        // t_2 is itself dependent when N = 1.
        return F(beta_ - 1) / F(2) * symfun::dDelta_dtm(basis_, m) / delta_ -
               F(beta_) / F(2) * symfun::dt_dtm(basis_, 2, m);
    }

    int beta_;
    symfun::LagrangeBasis<F> basis_;
    TraceVector<F> t_;
    F delta_;
    std::vector<F> dlogq_;
};

template <class F>
Residual<F> stationarity_residual(std::span<const F> nodes, int beta, std::size_t n) {
    return StationarityCheck<F>(nodes, beta).residual(n);
}

/// Floating-point residual at a trace-coordinate point (roots recovered
/// through the companion matrix).
Residual<double> stationarity_residual(const TraceVector<double>& t, int beta, std::size_t n);

/// All-real-roots test for the polynomial reconstructed from t. N = 2 uses
/// 2 t_2 - t_1^2 >= 0, N = 3 the sign of the discriminant, N >= 4 the
/// companion-matrix spectrum with imaginary parts below `tol`.
struct DomainMembership {
    std::size_t dim = 1;
    double tol = 1e-8;

    bool operator()(const TraceVector<double>& t) const;
};

bool domain_membership(const TraceVector<double>& t, double tol = 1e-8);

/// Exact membership via Sturm sequences.
bool domain_membership_exact(const TraceVector<Rational>& t);

/// Unnormalised Q(t) = Delta^{(beta-1)/2} exp(-beta t_2/2), zero outside the domain.
struct StationaryTraceDensity {
    int beta = 1;
    std::size_t dim = 1;

    double operator()(const TraceVector<double>& t) const;
    double log_density(const TraceVector<double>& t) const;
};

/// Unnormalised P(lambda) = prod_{mu<nu} |lambda_mu - lambda_nu|^beta exp(-beta/2 sum lambda^2).
struct StationarySpectralDensity {
    int beta = 1;
    std::size_t dim = 1;

    double operator()(std::span<const double> lambda) const;
    double log_density(std::span<const double> lambda) const;
};

/// N = 2 marginal of t_1 or t_2 with the tabulated constants.
///
/// density() is the tabulated expression; it carries total mass mass().
/// The normalised density, cdf() and mean() are those of the probability law.
class TraceMarginal {
public:
    enum class Coordinate { T1, T2 };

    TraceMarginal(int beta, Coordinate coordinate);

    int beta() const noexcept { return beta_; }
    Coordinate coordinate() const noexcept { return coordinate_; }

    /// (C_beta^(2))^{-1}
    double inverse_normalisation() const noexcept { return inverse_c_; }
    /// r_beta for t_1, s_beta for t_2.
    double shape_constant() const noexcept { return shape_; }

    double density(double x) const;
    double mass() const;
    double normalized_density(double x) const { return density(x) / mass(); }
    double cdf(double x) const;
    double mean() const;

private:
    int beta_;
    Coordinate coordinate_;
    double inverse_c_;
    double shape_;
};

TraceMarginal marginal_t1_n2(int beta);
TraceMarginal marginal_t2_n2(int beta);

/// <tau_n> for n = 0..n_max from tau_0 = 1, tau_1 = 0 and
/// <tau_n> = 1/2 sum <tau_x><tau_{n-2-x}> + (2-beta)/(2 beta N) (n-1) <tau_{n-2}>.
/// The pair average is replaced by a product of averages.
std::vector<Rational> mean_trace_recursion(const EnsembleSpec& spec, std::size_t n_max);

/// Same closure in unscaled traces: <t_0> = N, <t_1> = 0.
std::vector<Rational> mean_traces_unscaled(const EnsembleSpec& spec, std::size_t n_max);

/// k-th Catalan number.
Rational catalan(std::size_t k);

}  // namespace dyson::fokker_planck
