#include "dyson/dyson_sim.hpp"

#include "dyson/ensembles.hpp"
#include "dyson/fokker_planck.hpp"
#include "dyson/io.hpp"
#include "dyson/rng.hpp"
#include "dyson/symfun.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

namespace dyson::sim {

std::string to_string(CoordinateSystem s) {
    switch (s) {
        case CoordinateSystem::Matrix: return "matrix";
        case CoordinateSystem::Eigenvalue: return "eigen";
        case CoordinateSystem::Trace: return "trace";
    }
    return "?";
}

CoordinateSystem parse_system(const std::string& name) {
    if (name == "matrix") return CoordinateSystem::Matrix;
    if (name == "eigen" || name == "eigenvalue") return CoordinateSystem::Eigenvalue;
    if (name == "trace") return CoordinateSystem::Trace;
    throw std::invalid_argument("unknown coordinate system '" + name + "' (expected matrix, eigen or trace)");
}

void SdeConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!(burn_in >= 0.0) || !std::isfinite(burn_in)) throw std::invalid_argument("burn-in must be non-negative");
    if (!(sample_interval > 0.0) || !std::isfinite(sample_interval))
        throw std::invalid_argument("sample interval must be positive");
    if (trajectories == 0) throw std::invalid_argument("need at least one trajectory");
    if (samples_per_trajectory == 0) throw std::invalid_argument("need at least one sample per trajectory");
    if (threads == 0) throw std::invalid_argument("need at least one thread");
}

nlohmann::json SdeConfig::to_json() const {
    return {{"dt", dt},
            {"burn_in", burn_in},
            {"sample_interval", sample_interval},
            {"trajectories", trajectories},
            {"samples_per_trajectory", samples_per_trajectory},
            {"seed", seed},
            {"system", to_string(system)},
            {"record_traces", record_traces},
            {"record_spectrum", record_spectrum},
            {"threads", threads}};
}

std::string config_hash(const EnsembleSpec& spec, const SdeConfig& config) {
    auto j = config.to_json();
    j.erase("threads");
    j["beta"] = spec.beta;
    j["dim"] = spec.dim;
    return io::sha1_hex(j.dump());
}

std::size_t SampleSet::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("sample set has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> SampleSet::column(const std::string& name) const {
    const std::size_t c = column_index(name);
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
    return out;
}

double SampleSet::rejection_rate() const {
    const std::size_t total = accepted_steps + rejected_steps;
    return total == 0 ? 0.0 : static_cast<double>(rejected_steps) / static_cast<double>(total);
}

namespace {

struct Counters {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

struct TrajectoryResult {
    std::vector<double> rows;
    Counters counters;
};

std::vector<std::string> make_columns(std::size_t k_max, std::size_t n, bool spectrum) {
    std::vector<std::string> cols;
    for (std::size_t k = 1; k <= k_max; ++k) cols.push_back("t" + std::to_string(k));
    if (spectrum)
        for (std::size_t k = 1; k <= n; ++k) cols.push_back("lambda" + std::to_string(k));
    return cols;
}

// Number of nominal steps covering `span`, never overshooting dt.
std::size_t step_count(double span, double dt) {
    return static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
}

// Drives every trajectory through burn-in and sampling. `Model` supplies
// init(rng), advance(state, span, rng, counters), record(state, out).
template <class Model>
SampleSet run(const EnsembleSpec& spec, const SdeConfig& config, const Model& model, std::vector<std::string> columns) {
    config.validate();
    std::vector<TrajectoryResult> results(config.trajectories);
    std::vector<std::exception_ptr> errors(config.trajectories);

    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t j = first; j < config.trajectories; j += stride) {
            try {
                RandomStream rng(config.seed, j);
                auto state = model.init(rng);
                Counters counters;
                if (config.burn_in > 0) model.advance(state, config.burn_in, rng, counters);
                auto& rows = results[j].rows;
                rows.reserve(config.samples_per_trajectory * columns.size());
                for (std::size_t s = 0; s < config.samples_per_trajectory; ++s) {
                    if (s > 0) model.advance(state, config.sample_interval, rng, counters);
                    model.record(state, rows);
                }
                results[j].counters = counters;
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };

    const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(config.threads, config.trajectories));
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    SampleSet set;
    set.system = config.system;
    set.spec = spec;
    set.columns = std::move(columns);
    set.config_hash = config_hash(spec, config);
    for (std::size_t j = 0; j < config.trajectories; ++j) {
        const auto& r = results[j];
        const std::size_t nrows = r.rows.size() / set.columns.size();
        for (std::size_t s = 0; s < nrows; ++s) {
            set.trajectory.push_back(j);
            set.times.push_back(config.burn_in + static_cast<double>(s) * config.sample_interval);
        }
        set.data.insert(set.data.end(), r.rows.begin(), r.rows.end());
        set.accepted_steps += r.counters.accepted;
        set.rejected_steps += r.counters.rejected;
    }
    return set;
}

void push_power_sums(const std::vector<double>& lambda, std::size_t k_max, std::vector<double>& out) {
    std::vector<double> pw(lambda.size(), 1.0);
    for (std::size_t k = 1; k <= k_max; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < lambda.size(); ++i) s += (pw[i] *= lambda[i]);
        out.push_back(s);
    }
}

std::vector<double> default_spectrum(std::size_t n) {
    std::vector<double> l(n);
    for (std::size_t k = 0; k < n; ++k) l[k] = static_cast<double>(k + 1) - 0.5 * static_cast<double>(n + 1);
    return l;
}

struct MatrixModel {
    EnsembleSpec spec;
    double dt;
    std::size_t k_max;
    bool spectrum;

    FlowState init(RandomStream& rng) const { return {sample_gaussian(spec, rng), 0.0}; }

    void advance(FlowState& s, double span, RandomStream& rng, Counters& c) const {
        const std::size_t steps = step_count(span, dt);
        const double h = span / static_cast<double>(steps);
        for (std::size_t k = 0; k < steps; ++k) ou_advance(s, h, rng);
        c.accepted += steps;
    }

    void record(const FlowState& s, std::vector<double>& out) const {
        const auto t = traces(s.matrix, k_max);
        out.insert(out.end(), t.begin() + 1, t.end());
        if (spectrum) {
            const auto ev = eigenvalues(s.matrix);
            out.insert(out.end(), ev.values.begin(), ev.values.end());
        }
    }
};

// Euler-Maruyama with reject-and-halve: a rejected proposal is redrawn with
// fresh noise at half the step; the nominal step is restored after success.
template <class State, class Propose>
void adaptive_advance(State& state, double span, double dt, RandomStream& rng, Counters& c, const Propose& propose) {
    const double floor = dt / 1024.0;
    double remaining = span;
    double h = dt;
    State trial = state;
    while (remaining > 1e-12 * span) {
        const double step = std::min(h, remaining);
        if (propose(state, trial, step, rng)) {
            std::swap(state, trial);
            remaining -= step;
            h = dt;
            ++c.accepted;
        } else {
            ++c.rejected;
            h = 0.5 * step;
            if (h < floor) {
                std::ostringstream msg;
                msg << "step size fell below dt/2^10 = " << floor << " at state (";
                for (std::size_t i = 0; i < state.size(); ++i) msg << (i ? ", " : "") << state[i];
                msg << ")";
                throw NumericalAbort(msg.str());
            }
        }
    }
}

struct EigenModel {
    EnsembleSpec spec;
    double dt;
    std::size_t k_max;
    std::vector<double> start;

    std::vector<double> init(RandomStream&) const { return start; }

    void advance(std::vector<double>& l, double span, RandomStream& rng, Counters& c) const {
        const double diffusion = fokker_planck::eigen_diffusion_constant(spec.beta);
        adaptive_advance(l, span, dt, rng, c,
                         [&](const std::vector<double>& from, std::vector<double>& to, double h, RandomStream& r) {
                             const auto f = fokker_planck::drift_eigenvalues(from);
                             const double amp = std::sqrt(diffusion * h);
                             for (std::size_t i = 0; i < from.size(); ++i) to[i] = from[i] + f[i] * h + amp * r.normal();
                             for (std::size_t i = 1; i < to.size(); ++i)
                                 if (!(to[i] > to[i - 1])) return false;
                             return true;
                         });
    }

    void record(const std::vector<double>& l, std::vector<double>& out) const {
        push_power_sums(l, k_max, out);
        out.insert(out.end(), l.begin(), l.end());
    }
};

struct TraceModel {
    EnsembleSpec spec;
    double dt;
    std::size_t k_max;
    bool spectrum;
    std::vector<double> start;

    std::vector<double> init(RandomStream&) const { return start; }

    void advance(std::vector<double>& t, double span, RandomStream& rng, Counters& c) const {
        const std::size_t n = spec.dim;
        std::vector<double> xi(n);
        adaptive_advance(t, span, dt, rng, c,
                         [&](const std::vector<double>& from, std::vector<double>& to, double h, RandomStream& r) {
                             const symfun::TraceVector<double> tv(n, from);
                             const auto drift = fokker_planck::drift_traces(tv, spec);
                             const auto diff = fokker_planck::diffusion_traces(tv, spec);
                             const auto f = factor_diffusion(diff, n);
                             if (f.clipped_min < -1e-10 * f.scale)
                                 throw NumericalAbort("trace diffusion matrix is not positive semidefinite (eigenvalue " +
                                                      std::to_string(f.clipped_min) + ", scale " +
                                                      std::to_string(f.scale) + ")");
                             if (f.residual > 1e-8)
                                 throw NumericalAbort("trace diffusion factorisation residual " +
                                                      std::to_string(f.residual) + " exceeds 1e-8");
                             const double sq = std::sqrt(h);
                             for (auto& x : xi) x = r.normal();
                             for (std::size_t a = 0; a < n; ++a) {
                                 double noise = 0.0;
                                 for (std::size_t b = 0; b < n; ++b) noise += f.factor[a * n + b] * xi[b];
                                 to[a] = from[a] + drift[a] * h + sq * noise;
                             }
                             return fokker_planck::domain_membership(symfun::TraceVector<double>(n, to));
                         });
    }

    void record(const std::vector<double>& t, std::vector<double>& out) const {
        const symfun::TraceVector<double> tv(spec.dim, t);
        const auto full = symfun::t_extend_through(tv, k_max);
        for (std::size_t k = 1; k <= k_max; ++k) out.push_back(full[static_cast<long>(k)]);
        if (spectrum) {
            const auto l = symfun::nodes_from_traces(tv);
            out.insert(out.end(), l.begin(), l.end());
        }
    }
};

std::size_t trace_count(const EnsembleSpec& spec, const SdeConfig& config) {
    return config.record_traces == 0 ? spec.dim : config.record_traces;
}

}  // namespace

DiffusionFactor factor_diffusion(const std::vector<double>& diffusion, std::size_t n) {
    std::vector<double> v;
    const auto lam = symmetric_eigen(diffusion, n, &v);
    DiffusionFactor out;
    for (double x : lam) out.scale = std::max(out.scale, std::abs(x));
    out.clipped_min = std::min(0.0, lam.front());
    out.factor.assign(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double root = std::sqrt(std::max(lam[k], 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out.factor[i * n + j] += v[i * n + k] * root * v[j * n + k];
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += out.factor[i * n + k] * out.factor[j * n + k];
            worst = std::max(worst, std::abs(s - diffusion[i * n + j]));
        }
    out.residual = out.scale == 0.0 ? worst : worst / out.scale;
    return out;
}

SampleSet simulate_matrix_flow(const EnsembleSpec& spec, const SdeConfig& config) {
    SdeConfig c = config;
    c.system = CoordinateSystem::Matrix;
    const std::size_t k = trace_count(spec, c);
    return run(spec, c, MatrixModel{spec, c.dt, k, c.record_spectrum}, make_columns(k, spec.dim, c.record_spectrum));
}

SampleSet simulate_eigenvalue_sde(const EnsembleSpec& spec, const SdeConfig& config,
                                  std::optional<std::vector<double>> initial) {
    SdeConfig c = config;
    c.system = CoordinateSystem::Eigenvalue;
    c.record_spectrum = true;
    auto start = initial.value_or(default_spectrum(spec.dim));
    if (start.size() != spec.dim) throw std::invalid_argument("initial spectrum has wrong length");
    for (std::size_t i = 1; i < start.size(); ++i)
        if (!(start[i] > start[i - 1])) throw std::invalid_argument("initial spectrum must be strictly increasing");
    const std::size_t k = trace_count(spec, c);
    return run(spec, c, EigenModel{spec, c.dt, k, std::move(start)}, make_columns(k, spec.dim, true));
}

SampleSet simulate_trace_sde(const EnsembleSpec& spec, const SdeConfig& config,
                             std::optional<std::vector<double>> initial_t) {
    SdeConfig c = config;
    c.system = CoordinateSystem::Trace;
    std::vector<double> start;
    if (initial_t) {
        start = *initial_t;
    } else {
        const auto l = default_spectrum(spec.dim);
        const auto t = symfun::power_sums<double>(l, spec.dim);
        start.assign(t.values().begin(), t.values().begin() + static_cast<long>(spec.dim));
    }
    if (start.size() != spec.dim) throw std::invalid_argument("initial trace vector must hold t_1..t_N");
    if (!fokker_planck::domain_membership(symfun::TraceVector<double>(spec.dim, start)))
        throw std::invalid_argument("initial trace vector lies outside the trace domain");
    const std::size_t k = trace_count(spec, c);
    return run(spec, c, TraceModel{spec, c.dt, k, c.record_spectrum, std::move(start)},
               make_columns(k, spec.dim, c.record_spectrum));
}

SampleSet simulate(const EnsembleSpec& spec, const SdeConfig& config) {
    switch (config.system) {
        case CoordinateSystem::Matrix: return simulate_matrix_flow(spec, config);
        case CoordinateSystem::Eigenvalue: return simulate_eigenvalue_sde(spec, config);
        case CoordinateSystem::Trace: return simulate_trace_sde(spec, config);
    }
    throw std::invalid_argument("unknown coordinate system");
}

Statistic column_statistic(const std::string& column) {
    return {column, [column](const SampleSet& s, std::size_t row) { return s.at(row, s.column_index(column)); }};
}

Statistic squared_gap_statistic() {
    return {"2t2-t1^2", [](const SampleSet& s, std::size_t row) {
                const double t1 = s.at(row, s.column_index("t1"));
                return 2.0 * s.at(row, s.column_index("t2")) - t1 * t1;
            }};
}

Statistic max_eigenvalue_statistic() {
    return {"lambda_max", [](const SampleSet& s, std::size_t row) {
                return s.at(row, s.column_index("lambda" + std::to_string(s.spec.dim)));
            }};
}

std::vector<double> evaluate(const SampleSet& set, const Statistic& stat) {
    std::vector<double> out(set.rows());
    for (std::size_t r = 0; r < set.rows(); ++r) out[r] = stat.value(set, r);
    return out;
}

std::vector<Comparison> compare_samplers(const SampleSet& a, const SampleSet& b, const std::vector<Statistic>& statistics) {
    if (a.rows() < 2 || b.rows() < 2) throw std::invalid_argument("sample sets must hold at least two samples");
    if (!(a.spec == b.spec)) throw std::invalid_argument("sample sets come from different ensembles");
    std::vector<Comparison> out;
    for (const auto& stat : statistics) {
        const auto xa = evaluate(a, stat);
        const auto xb = evaluate(b, stat);
        Comparison c;
        c.statistic = stat.name;
        c.a = stats::summarize(xa);
        c.b = stats::summarize(xb);
        c.ks = stats::ks_two_sample(xa, xb);
        c.mean_z = stats::mean_z(c.a, c.b);
        c.variance_z = stats::variance_z(c.a, c.b);
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace dyson::sim
