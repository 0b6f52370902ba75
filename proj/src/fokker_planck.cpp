#include "dyson/fokker_planck.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace dyson::fokker_planck {

std::vector<double> drift_eigenvalues(std::span<const double> lambda) {
    const std::size_t n = lambda.size();
    for (std::size_t k = 1; k < n; ++k)
        if (!(lambda[k] > lambda[k - 1]))
            throw std::domain_error("eigenvalue drift needs strictly increasing eigenvalues");
    std::vector<double> f(n);
    for (std::size_t mu = 0; mu < n; ++mu) {
        double s = -lambda[mu];
        for (std::size_t nu = 0; nu < n; ++nu)
            if (nu != mu) s += 1.0 / (lambda[mu] - lambda[nu]);
        f[mu] = s;
    }
    return f;
}

Residual<double> stationarity_residual(const TraceVector<double>& t, int beta, std::size_t n) {
    const auto nodes = symfun::nodes_from_traces(t);
    return stationarity_residual<double>(std::span<const double>(nodes), beta, n);
}

bool DomainMembership::operator()(const TraceVector<double>& t) const {
    if (t.dim() != dim) throw std::invalid_argument("trace vector dimension does not match");
    switch (dim) {
        case 1:
            return true;
        case 2:
            return 2.0 * t[2] - t[1] * t[1] >= 0.0;
        case 3:
            return symfun::gram_hankel(t).discriminant >= 0.0;
        default:
            try {
                symfun::nodes_from_traces(t, tol);
                return true;
            } catch (const std::domain_error&) {
                return false;
            }
    }
}

bool domain_membership(const TraceVector<double>& t, double tol) { return DomainMembership{t.dim(), tol}(t); }

bool domain_membership_exact(const TraceVector<Rational>& t) {
    const auto count = symfun::sturm_count(symfun::newton_c_from_t(t));
    return count.distinct_real == count.distinct_total;
}

double StationaryTraceDensity::log_density(const TraceVector<double>& t) const {
    if (!domain_membership(t)) return -std::numeric_limits<double>::infinity();
    const double half_beta = 0.5 * beta;
    double out = -half_beta * t[2];
    if (beta != 1) {
        const double delta = symfun::gram_hankel(t).discriminant;
        if (delta <= 0.0) return -std::numeric_limits<double>::infinity();
        out += 0.5 * (beta - 1) * std::log(delta);
    }
    return out;
}

double StationaryTraceDensity::operator()(const TraceVector<double>& t) const { return std::exp(log_density(t)); }

double StationarySpectralDensity::log_density(std::span<const double> lambda) const {
    double out = 0.0;
    for (std::size_t mu = 0; mu < lambda.size(); ++mu) {
        out -= 0.5 * beta * lambda[mu] * lambda[mu];
        for (std::size_t nu = mu + 1; nu < lambda.size(); ++nu) {
            const double gap = std::abs(lambda[mu] - lambda[nu]);
            if (gap == 0.0) return -std::numeric_limits<double>::infinity();
            out += beta * std::log(gap);
        }
    }
    return out;
}

double StationarySpectralDensity::operator()(std::span<const double> lambda) const {
    return std::exp(log_density(lambda));
}

namespace {

double inverse_c(int beta) {
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    switch (beta) {
        case 1: return 4.0 * sqrt_pi;
        case 2: return std::numbers::pi;
        case 4: return 3.0 * std::numbers::pi / 8.0;
    }
    throw std::invalid_argument("beta must be 1, 2 or 4");
}

double r_constant(int beta) {
    switch (beta) {
        case 1: return 2.0;
        case 2: return std::sqrt(std::numbers::pi / 2.0);
        default: return 3.0 * std::sqrt(std::numbers::pi) / 8.0;
    }
}

double s_constant(int beta) {
    switch (beta) {
        case 1: return std::pow(2.0, 1.5);
        case 2: return std::numbers::pi;
        default: return 1.5 * std::numbers::pi;
    }
}

}  // namespace

TraceMarginal::TraceMarginal(int beta, Coordinate coordinate)
    : beta_(beta), coordinate_(coordinate), inverse_c_(inverse_c(beta)),
      shape_(coordinate == Coordinate::T1 ? r_constant(beta) : s_constant(beta)) {}

double TraceMarginal::density(double x) const {
    const double pre = 0.5 * shape_ / inverse_c_;
    if (coordinate_ == Coordinate::T1) return pre * std::exp(-0.25 * beta_ * x * x);
    if (x < 0.0) return 0.0;
    return pre * std::pow(x, 0.5 * beta_) * std::exp(-0.5 * beta_ * x);
}

double TraceMarginal::mass() const {
    const double pre = 0.5 * shape_ / inverse_c_;
    const double b = beta_;
    if (coordinate_ == Coordinate::T1) return pre * std::sqrt(4.0 * std::numbers::pi / b);
    // int x^{b/2} e^{-b x/2} dx = Gamma(b/2 + 1) (2/b)^{b/2 + 1}
    return pre * std::tgamma(0.5 * b + 1.0) * std::pow(2.0 / b, 0.5 * b + 1.0);
}

double TraceMarginal::cdf(double x) const {
    const double b = beta_;
    if (coordinate_ == Coordinate::T1) return 0.5 * std::erfc(-x * std::sqrt(b) / 2.0);
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(0.5 * b + 1.0, 0.5 * b * x);
}

double TraceMarginal::mean() const {
    if (coordinate_ == Coordinate::T1) return 0.0;
    return (0.5 * beta_ + 1.0) / (0.5 * beta_);
}

TraceMarginal marginal_t1_n2(int beta) { return TraceMarginal(beta, TraceMarginal::Coordinate::T1); }
TraceMarginal marginal_t2_n2(int beta) { return TraceMarginal(beta, TraceMarginal::Coordinate::T2); }

std::vector<Rational> mean_trace_recursion(const EnsembleSpec& spec, std::size_t n_max) {
    std::vector<Rational> tau(n_max + 1);
    tau[0] = 1;
    if (n_max >= 1) tau[1] = 0;
    const Rational correction =
        Rational(2 - spec.beta) / (Rational(2 * spec.beta) * Rational(static_cast<long>(spec.dim)));
    for (std::size_t n = 2; n <= n_max; ++n) {
        Rational pair = 0;
        for (std::size_t x = 0; x <= n - 2; ++x) pair += tau[x] * tau[n - 2 - x];
        tau[n] = pair / 2 + correction * Rational(static_cast<long>(n - 1)) * tau[n - 2];
    }
    return tau;
}

std::vector<Rational> mean_traces_unscaled(const EnsembleSpec& spec, std::size_t n_max) {
    std::vector<Rational> t(n_max + 1);
    t[0] = Rational(static_cast<long>(spec.dim));
    if (n_max >= 1) t[1] = 0;
    const Rational correction = Rational(2 - spec.beta) / Rational(2 * spec.beta);
    for (std::size_t n = 2; n <= n_max; ++n) {
        Rational pair = 0;
        for (std::size_t x = 0; x <= n - 2; ++x) pair += t[x] * t[n - 2 - x];
        t[n] = pair / 2 + correction * Rational(static_cast<long>(n - 1)) * t[n - 2];
    }
    return t;
}

Rational catalan(std::size_t k) {
    Rational c = 1;
    for (std::size_t j = 0; j < k; ++j)
        c = c * Rational(static_cast<long>(2 * (2 * j + 1))) / Rational(static_cast<long>(j + 2));
    return c;
}

}  // namespace dyson::fokker_planck
