#include "dyson/bernoulli.hpp"

#include "dyson/ensembles.hpp"
#include "dyson/fokker_planck.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace dyson::bernoulli {

namespace {

void check_power_budget(std::size_t n, unsigned power) {
    if (power > max_safe_power(n))
        throw std::out_of_range("power " + std::to_string(power) + " exceeds the exact-arithmetic budget " +
                                std::to_string(max_safe_power(n)) + " at N = " + std::to_string(n));
}

// a^k N^{-k/2-1}: converts tr S^k to tau_k.
double tau_scale(double amplitude, std::size_t n, unsigned k) {
    return std::pow(amplitude, k) * std::pow(static_cast<double>(n), -0.5 * k - 1.0);
}

// Traces t_k = a^k tr S^k with t_0 = N and t_{-1} = 0, as the drift formula expects.
struct ScaledTraces {
    std::vector<double> t;
    double operator[](long k) const { return k < 0 ? 0.0 : t.at(static_cast<std::size_t>(k)); }
};

std::vector<std::array<std::int64_t, 4>> blocks_of(const SignPowers& powers, std::size_t p, std::size_t q, unsigned count) {
    std::vector<std::array<std::int64_t, 4>> blocks(count);
    for (unsigned a = 0; a < count; ++a)
        blocks[a] = {powers.at(a, p, p), powers.at(a, p, q), powers.at(a, q, p), powers.at(a, q, q)};
    return blocks;
}

}  // namespace

BernoulliMatrix::BernoulliMatrix(std::size_t n, std::vector<std::int8_t> signs, double amplitude)
    : n_(n), signs_(std::move(signs)), amplitude_(amplitude) {
    if (n < 2) throw std::invalid_argument("Bernoulli matrices need N >= 2");
    if (signs_.size() != n * n) throw std::invalid_argument("sign matrix has wrong size");
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw std::invalid_argument("amplitude must be positive");
    for (std::size_t p = 0; p < n; ++p) {
        if (signs_[p * n + p] != 0) throw std::invalid_argument("diagonal of a Bernoulli matrix must vanish");
        for (std::size_t q = p + 1; q < n; ++q) {
            const int s = signs_[p * n + q];
            if ((s != 1 && s != -1) || signs_[q * n + p] != s)
                throw std::invalid_argument("off-diagonal signs must be symmetric and +-1");
        }
    }
}

void BernoulliMatrix::flip(std::size_t p, std::size_t q) {
    signs_[p * n_ + q] = static_cast<std::int8_t>(-signs_[p * n_ + q]);
    signs_[q * n_ + p] = static_cast<std::int8_t>(-signs_[q * n_ + p]);
}

FlipMove::FlipMove(std::size_t p_, std::size_t q_, std::size_t dim) : p(p_), q(q_) {
    if (!(p < q) || q >= dim) throw std::invalid_argument("flip move needs 0 <= p < q < N");
}

BernoulliMatrix sample_bernoulli(std::size_t n, RandomStream& rng, double amplitude) {
    if (n < 2) throw std::invalid_argument("Bernoulli matrices need N >= 2");
    std::vector<std::int8_t> s(n * n, 0);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) {
            const std::int8_t v = rng.coin() ? 1 : -1;
            s[p * n + q] = v;
            s[q * n + p] = v;
        }
    return BernoulliMatrix(n, std::move(s), amplitude);
}

BernoulliMatrix flip_step(const BernoulliMatrix& b, const FlipMove& move) {
    if (move.q >= b.dim()) throw std::invalid_argument("flip move outside the matrix");
    BernoulliMatrix out = b;
    out.flip(move.p, move.q);
    return out;
}

FlipMove random_move(std::size_t n, RandomStream& rng) {
    // Rejection-free: pick an index into the d_N upper-triangle entries.
    std::size_t k = rng.index(n * (n - 1) / 2);
    std::size_t p = 0;
    while (k >= n - 1 - p) {
        k -= n - 1 - p;
        ++p;
    }
    return FlipMove(p, p + 1 + k, n);
}

unsigned max_safe_power(std::size_t n) {
    // |(S^a)_ij| <= (N-1)^{a-1} must fit int64, and the flip expansion of
    // tr S^n (bounded by (2N)^n) must fit int128.
    const double bits = std::log2(static_cast<double>(n));
    unsigned best = 1;
    for (unsigned p = 1; p <= 64; ++p) {
        if ((p - 1) * bits > 62.0 || p * (bits + 1.0) + 8.0 > 126.0) break;
        best = p;
    }
    return best;
}

SignPowers::SignPowers(const BernoulliMatrix& b, unsigned max_power) : n_(b.dim()) {
    check_power_budget(n_, max_power);
    powers_.resize(max_power + 1);
    powers_[0].assign(n_ * n_, 0);
    for (std::size_t i = 0; i < n_; ++i) powers_[0][i * n_ + i] = 1;
    if (max_power >= 1) powers_[1].assign(b.signs().begin(), b.signs().end());
    for (unsigned a = 2; a <= max_power; ++a) {
        auto& out = powers_[a];
        out.assign(n_ * n_, 0);
        const auto& prev = powers_[a - 1];
        const auto s = b.signs();
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = 0; k < n_; ++k) {
                const std::int64_t x = prev[i * n_ + k];
                if (x == 0) continue;
                const std::int8_t* row = s.data() + k * n_;
                std::int64_t* dst = out.data() + i * n_;
                for (std::size_t j = 0; j < n_; ++j) dst[j] += x * row[j];
            }
    }
}

Int128 SignPowers::trace(unsigned a) const {
    Int128 s = 0;
    for (std::size_t i = 0; i < n_; ++i) s += powers_.at(a)[i * n_ + i];
    return s;
}

Int128 SignPowers::diagonal_product(unsigned r, unsigned s) const {
    Int128 acc = 0;
    for (std::size_t i = 0; i < n_; ++i)
        acc += static_cast<Int128>(powers_.at(r)[i * n_ + i]) * powers_.at(s)[i * n_ + i];
    return acc;
}

Observable parse_observable(const std::string& name) {
    auto digits = [&](const std::string& s) {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("malformed observable '" + name + "'");
        return static_cast<unsigned>(std::stoul(s));
    };
    if (name.rfind("tau", 0) == 0) return {false, digits(name.substr(3)), 0};
    if (name.rfind("zeta", 0) == 0) {
        const std::string rest = name.substr(4);
        const auto comma = rest.find(',');
        if (comma != std::string::npos) return {true, digits(rest.substr(0, comma)), digits(rest.substr(comma + 1))};
        if (rest.size() == 2) return {true, digits(rest.substr(0, 1)), digits(rest.substr(1))};
    }
    throw std::invalid_argument("unknown observable '" + name + "' (expected tau<k> or zeta<r>,<s>)");
}

double evaluate(const Observable& o, const SignPowers& powers, const BernoulliMatrix& b) {
    if (o.is_zeta) return zeta(powers, b, o.a, o.b).value;
    return static_cast<double>(powers.trace(o.a)) * tau_scale(b.amplitude(), b.dim(), o.a);
}

double tau(const BernoulliMatrix& b, unsigned n) {
    const SignPowers p(b, n);
    return static_cast<double>(p.trace(n)) * tau_scale(b.amplitude(), b.dim(), n);
}

ZetaStat zeta(const SignPowers& powers, const BernoulliMatrix& b, unsigned r, unsigned s) {
    const double n = static_cast<double>(b.dim());
    const double scale = std::pow(b.amplitude(), r + s) * std::pow(n, -0.5 * (r + s)) / n;
    return {r, s, static_cast<double>(powers.diagonal_product(r, s)) * scale};
}

ZetaStat zeta(const BernoulliMatrix& b, unsigned r, unsigned s) {
    return zeta(SignPowers(b, std::max(r, s)), b, r, s);
}

std::vector<Int128> flip_trace_changes(const std::vector<std::array<std::int64_t, 4>>& blocks, int u, unsigned n_max) {
    if (blocks.size() < n_max) throw std::invalid_argument("need the (p, q) blocks of S^0..S^{n_max-1}");
    // J C_a with J = [[0, 1], [1, 0]]: rows of the block swapped.
    std::vector<std::array<Int128, 4>> jc(n_max);
    for (unsigned a = 0; a < n_max; ++a) jc[a] = {blocks[a][2], blocks[a][3], blocks[a][0], blocks[a][1]};

    std::vector<Int128> delta(n_max + 1, 0);
    std::vector<unsigned> positions;
    for (unsigned n = 1; n <= n_max; ++n) {
        Int128 total = 0;
        for (std::uint32_t word = 1; word < (1u << n); ++word) {
            positions.clear();
            for (unsigned i = 0; i < n; ++i)
                if (word & (1u << i)) positions.push_back(i);
            const std::size_t k = positions.size();
            // tr(E S^{g_0} E S^{g_1} ... E S^{g_{k-1}}) = u^k tr(prod J C_{g_i}), gaps taken cyclically.
            std::array<Int128, 4> m{1, 0, 0, 1};
            for (std::size_t i = 0; i < k; ++i) {
                const unsigned g = i + 1 < k ? positions[i + 1] - positions[i] - 1 : n - positions[i] - 1 + positions[0];
                const auto& x = jc[g];
                m = {m[0] * x[0] + m[1] * x[2], m[0] * x[1] + m[1] * x[3], m[2] * x[0] + m[3] * x[2],
                     m[2] * x[1] + m[3] * x[3]};
            }
            Int128 uk = 1;
            for (std::size_t i = 0; i < k; ++i) uk *= u;
            total += uk * (m[0] + m[3]);
        }
        delta[n] = total;
    }
    return delta;
}

namespace {

// Exact per-flip changes of tr S^k, k = 1..n_max, for every flip, via a callback.
template <class Visit>
void for_each_flip(const BernoulliMatrix& b, unsigned n_max, Visit&& visit) {
    check_power_budget(b.dim(), n_max);
    const SignPowers powers(b, n_max > 0 ? n_max - 1 : 0);
    const std::size_t n = b.dim();
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q)
            visit(flip_trace_changes(blocks_of(powers, p, q, n_max), -2 * b.sign(p, q), n_max));
}

ScaledTraces scaled_traces(const BernoulliMatrix& b, unsigned k_max) {
    const SignPowers powers(b, k_max);
    ScaledTraces t;
    t.t.resize(k_max + 1);
    for (unsigned k = 0; k <= k_max; ++k)
        t.t[k] = static_cast<double>(powers.trace(k)) * std::pow(b.amplitude(), k);
    return t;
}

}  // namespace

double goe_drift_tau(const BernoulliMatrix& b, unsigned n) {
    if (n < 1) throw std::invalid_argument("drift index must be at least 1");
    const auto t = scaled_traces(b, n);
    return fokker_planck::drift_trace_component(t, 1, n) * std::pow(static_cast<double>(b.dim()), -0.5 * n - 1.0);
}

MomentResult exact_first_moment(const BernoulliMatrix& b, unsigned n, unsigned n_max) {
    if (n < 1 || n > n_max) throw std::out_of_range("moment order must lie in 1..n_max");
    Int128 sum = 0;
    for_each_flip(b, n, [&](const std::vector<Int128>& d) { sum += d[n]; });
    const double d_n = static_cast<double>(b.independent_entries());
    const std::size_t dim = b.dim();
    const double nd = static_cast<double>(dim);

    MomentResult out;
    out.exact = static_cast<double>(sum) * tau_scale(b.amplitude(), dim, n) / d_n;

    const SignPowers powers(b, n);
    auto tau_k = [&](unsigned k) { return static_cast<double>(powers.trace(k)) * tau_scale(b.amplitude(), dim, k); };
    double second = 0.0;
    if (n >= 2)
        for (unsigned x = 0; x <= n - 2; ++x)
            second += tau_k(n - 2) / nd + tau_k(x) * tau_k(n - 2 - x) - 2.0 * zeta(powers, b, x, n - 2 - x).value / nd;
    const double a2 = b.amplitude() * b.amplitude();
    out.leading = b.delta_s() * (-static_cast<double>(n) * tau_k(n) + 2.0 * a2 * 0.5 * n * second);
    out.goe = goe_drift_tau(b, n) * b.delta_s();
    return out;
}

MomentResult exact_second_moment(const BernoulliMatrix& b, unsigned n, unsigned m, unsigned n_max) {
    if (n < 1 || m < 1 || n > n_max || m > n_max) throw std::out_of_range("moment orders must lie in 1..n_max");
    const unsigned top = std::max(n, m);
    long double sum = 0.0L;
    const std::size_t dim = b.dim();
    const long double sn = tau_scale(b.amplitude(), dim, n);
    const long double sm = tau_scale(b.amplitude(), dim, m);
    for_each_flip(b, top, [&](const std::vector<Int128>& d) {
        sum += (static_cast<long double>(d[n]) * sn) * (static_cast<long double>(d[m]) * sm);
    });
    MomentResult out;
    out.exact = static_cast<double>(sum / static_cast<long double>(b.independent_entries()));

    const SignPowers powers(b, n + m - 2);
    const double nd = static_cast<double>(dim);
    const double t = static_cast<double>(powers.trace(n + m - 2)) * tau_scale(b.amplitude(), dim, n + m - 2);
    const double z = zeta(powers, b, n - 1, m - 1).value;
    const double a2 = b.amplitude() * b.amplitude();
    out.leading = b.delta_s() * 4.0 * a2 * n * m / (nd * nd) * (t - z);
    return out;
}

std::vector<double> WalkSeries::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("walk series has no column '" + name + "'");
    const std::size_t c = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = data[r * columns.size() + c];
    return out;
}

WalkSeries walk_and_measure(std::size_t n, const WalkOptions& options, RandomStream& rng, double amplitude) {
    return walk_and_measure(sample_bernoulli(n, rng, amplitude), options, rng);
}

WalkSeries walk_and_measure(BernoulliMatrix b, const WalkOptions& options, RandomStream& rng) {
    if (options.steps < 1) throw std::invalid_argument("walk needs at least one step");
    if (options.record_every < 1 || options.refresh < 1) throw std::invalid_argument("record and refresh periods must be positive");
    const std::size_t n = b.dim();

    std::vector<Observable> obs;
    unsigned k_max = 2;
    unsigned zeta_max = 0;
    bool any_zeta = false;
    for (const auto& name : options.observables) {
        obs.push_back(parse_observable(name));
        const auto& o = obs.back();
        if (o.is_zeta) {
            any_zeta = true;
            zeta_max = std::max({zeta_max, o.a, o.b});
        } else {
            k_max = std::max(k_max, o.a);
        }
    }
    if (k_max > options.n_max) throw std::out_of_range("observable order exceeds n_max");
    check_power_budget(n, std::max(k_max, zeta_max));

    WalkSeries series;
    series.columns = options.observables;

    auto fresh_traces = [&] {
        const SignPowers p(b, k_max);
        std::vector<Int128> t(k_max + 1);
        for (unsigned k = 0; k <= k_max; ++k) t[k] = p.trace(k);
        return t;
    };
    std::vector<Int128> t = fresh_traces();
    const Int128 t2_start = t[2];

    auto record = [&](std::size_t step) {
        series.steps.push_back(step);
        series.times.push_back(static_cast<double>(step) * b.delta_s());
        std::optional<SignPowers> zp;
        if (any_zeta) zp.emplace(b, zeta_max);
        for (const auto& o : obs) {
            if (o.is_zeta) series.data.push_back(zeta(*zp, b, o.a, o.b).value);
            else series.data.push_back(static_cast<double>(t[o.a]) * tau_scale(b.amplitude(), n, o.a));
        }
    };
    record(0);

    // S^a e_p and S^a e_q for a < k_max.
    std::vector<std::int64_t> vp(n), vq(n), np(n), nq(n);
    std::vector<std::array<std::int64_t, 4>> blocks(k_max);
    const auto s = b.signs();
    for (std::size_t step = 1; step <= options.steps; ++step) {
        const FlipMove move = random_move(n, rng);
        std::fill(vp.begin(), vp.end(), 0);
        std::fill(vq.begin(), vq.end(), 0);
        vp[move.p] = 1;
        vq[move.q] = 1;
        for (unsigned a = 0; a < k_max; ++a) {
            blocks[a] = {vp[move.p], vq[move.p], vp[move.q], vq[move.q]};
            if (a + 1 == k_max) break;
            for (std::size_t i = 0; i < n; ++i) {
                const std::int8_t* row = s.data() + i * n;
                std::int64_t x = 0, y = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    x += row[j] * vp[j];
                    y += row[j] * vq[j];
                }
                np[i] = x;
                nq[i] = y;
            }
            std::swap(vp, np);
            std::swap(vq, nq);
        }
        const auto delta = flip_trace_changes(blocks, -2 * b.sign(move.p, move.q), k_max);
        if (delta[2] != 0) ++series.t2_violations;
        for (unsigned k = 1; k <= k_max; ++k) t[k] += delta[k];
        b.flip(move.p, move.q);
        if (t[2] != t2_start) ++series.t2_changes;

        if (step % options.refresh == 0) {
            const auto fresh = fresh_traces();
            ++series.refresh_checks;
            if (fresh != t) ++series.refresh_mismatches;
            t = fresh;
        }
        if (step % options.record_every == 0) record(step);
    }
    return series;
}

EigenvectorMoment eigenvector_second_moment(const BernoulliMatrix& b, std::size_t nu, std::size_t mu) {
    const std::size_t n = b.dim();
    if (nu >= n || mu >= n) throw std::out_of_range("eigenvector index out of range");
    std::vector<double> m(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i * n + j] = b.entry(i, j);
    std::vector<double> v;
    symmetric_eigen(m, n, &v);
    auto vec = [&](std::size_t k, std::size_t i) { return v[i * n + k]; };

    const double a2 = b.amplitude() * b.amplitude();
    double sum = 0.0, fourth = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        fourth += vec(nu, p) * vec(nu, p) * vec(mu, p) * vec(mu, p);
        for (std::size_t q = p + 1; q < n; ++q) {
            const double c = vec(nu, p) * vec(mu, q) + vec(nu, q) * vec(mu, p);
            sum += 4.0 * a2 * c * c;
        }
    }
    const double d_n = static_cast<double>(b.independent_entries());
    return {sum / d_n, 4.0 * a2 / d_n * (1.0 + (nu == mu ? 1.0 : 0.0) - 2.0 * fourth)};
}

}  // namespace dyson::bernoulli
