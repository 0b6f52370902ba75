#pragma once

// Sign-flip random walk on symmetric +-a matrices with zero diagonal.
//
// Everything that can be integer-exact is computed on the sign matrix S
// (B = a S): traces of S^k, diagonals entering zeta, and the change of
// tr S^n under a flip, which is a finite sum over words in S and the
// rank-two perturbation.

#include "dyson/rng.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dyson::bernoulli {

inline constexpr double kDefaultAmplitude = 0.70710678118654752440;  // 1/sqrt(2)
inline constexpr unsigned kDefaultMaxPower = 8;

using Int128 = __int128;

class BernoulliMatrix {
public:
    /// `signs` is the row-major N x N sign matrix: symmetric, entries +-1 off
    /// the diagonal, 0 on it.
    BernoulliMatrix(std::size_t n, std::vector<std::int8_t> signs, double amplitude = kDefaultAmplitude);

    std::size_t dim() const noexcept { return n_; }
    double amplitude() const noexcept { return amplitude_; }
    /// d_N = N(N - 1)/2
    std::size_t independent_entries() const noexcept { return n_ * (n_ - 1) / 2; }
    /// Walk time per flip, 2/d_N.
    double delta_s() const noexcept { return 2.0 / static_cast<double>(independent_entries()); }

    int sign(std::size_t p, std::size_t q) const { return signs_[p * n_ + q]; }
    double entry(std::size_t p, std::size_t q) const { return amplitude_ * sign(p, q); }
    std::span<const std::int8_t> signs() const noexcept { return signs_; }

    /// Flip B_pq and B_qp in place.
    void flip(std::size_t p, std::size_t q);

    friend bool operator==(const BernoulliMatrix&, const BernoulliMatrix&) = default;

private:
    std::size_t n_;
    std::vector<std::int8_t> signs_;
    double amplitude_;
};

struct FlipMove {
    std::size_t p;
    std::size_t q;

    FlipMove(std::size_t p_, std::size_t q_, std::size_t dim);
};

BernoulliMatrix sample_bernoulli(std::size_t n, RandomStream& rng, double amplitude = kDefaultAmplitude);

/// B' = B - 2 B_pq (e_p e_q^T + e_q e_p^T).
BernoulliMatrix flip_step(const BernoulliMatrix& b, const FlipMove& move);

/// Uniformly chosen flip.
FlipMove random_move(std::size_t n, RandomStream& rng);

/// Integer powers S^0..S^max_power with exact traces.
class SignPowers {
public:
    SignPowers(const BernoulliMatrix& b, unsigned max_power);

    unsigned max_power() const noexcept { return static_cast<unsigned>(powers_.size() - 1); }
    std::int64_t at(unsigned a, std::size_t i, std::size_t j) const { return powers_[a][i * n_ + j]; }
    /// tr S^a
    Int128 trace(unsigned a) const;
    /// sum_p (S^r)_pp (S^s)_pp
    Int128 diagonal_product(unsigned r, unsigned s) const;

private:
    std::size_t n_;
    std::vector<std::vector<std::int64_t>> powers_;
};

/// Largest n for which integer powers and flip expansions cannot overflow at this N.
unsigned max_safe_power(std::size_t n);

/// tau_n = N^{-n/2-1} tr B^n.
double tau(const BernoulliMatrix& b, unsigned n);

struct ZetaStat {
    unsigned r = 0;
    unsigned s = 0;
    double value = 0.0;
};

/// zeta(r, s) = (1/N) sum_p (Bbar^r)_pp (Bbar^s)_pp with Bbar = B/sqrt(N).
ZetaStat zeta(const BernoulliMatrix& b, unsigned r, unsigned s);
ZetaStat zeta(const SignPowers& powers, const BernoulliMatrix& b, unsigned r, unsigned s);

/// Exact change of tr S^n, n = 1..n_max, when (p, q) is flipped. Entry 0 is unused.
/// C_a is the (p, q) block of S^a for a < n_max.
std::vector<Int128> flip_trace_changes(const std::vector<std::array<std::int64_t, 4>>& blocks, int u, unsigned n_max);

/// Neighbourhood expectation of one observable, the leading-order formula
/// and, for the first moment, the beta = 1 trace drift in tau units; all per
/// walk step (multiply by 1/delta_s for rates).
struct MomentResult {
    double exact = 0.0;
    double leading = 0.0;
    double goe = 0.0;
};

MomentResult exact_first_moment(const BernoulliMatrix& b, unsigned n, unsigned n_max = kDefaultMaxPower);
MomentResult exact_second_moment(const BernoulliMatrix& b, unsigned n, unsigned m, unsigned n_max = kDefaultMaxPower);

/// R_n of the beta = 1 Fokker-Planck drift at the traces of B, converted to tau units.
double goe_drift_tau(const BernoulliMatrix& b, unsigned n);

/// "tau<k>" or "zeta<r>,<s>" (single digits may drop the comma: "zeta22").
struct Observable {
    bool is_zeta = false;
    unsigned a = 0;
    unsigned b = 0;

    unsigned max_power() const noexcept { return a > b ? a : b; }
};

Observable parse_observable(const std::string& name);
/// Needs powers.max_power() >= o.max_power().
double evaluate(const Observable& o, const SignPowers& powers, const BernoulliMatrix& b);

struct WalkOptions {
    std::size_t steps = 1000;
    std::size_t record_every = 1;
    /// Recompute traces from scratch every `refresh` steps and compare.
    std::size_t refresh = 256;
    std::vector<std::string> observables{"tau2", "tau4"};
    unsigned n_max = kDefaultMaxPower;
};

struct WalkSeries {
    std::vector<std::string> columns;
    std::vector<std::size_t> steps;
    std::vector<double> times;
    std::vector<double> data;  // row-major
    std::size_t t2_violations = 0;
    std::size_t t2_changes = 0;
    std::size_t refresh_checks = 0;
    std::size_t refresh_mismatches = 0;

    std::size_t rows() const noexcept { return steps.size(); }
    std::vector<double> column(const std::string& name) const;
};

/// Runs the flip walk from a fresh sample; row 0 is the initial state.
WalkSeries walk_and_measure(std::size_t n, const WalkOptions& options, RandomStream& rng,
                            double amplitude = kDefaultAmplitude);
WalkSeries walk_and_measure(BernoulliMatrix start, const WalkOptions& options, RandomStream& rng);

/// E over flips of |nu^T dB mu|^2 for eigenvectors nu, mu of B, with the
/// closed form (4a^2/d_N)(1 + delta_{nu mu} - 2 sum_p nu_p^2 mu_p^2).
struct EigenvectorMoment {
    double exact = 0.0;
    double formula = 0.0;
};

EigenvectorMoment eigenvector_second_moment(const BernoulliMatrix& b, std::size_t nu, std::size_t mu);

}  // namespace dyson::bernoulli
