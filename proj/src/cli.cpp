#include "dyson/cli.hpp"

#include "dyson/bernoulli.hpp"
#include "dyson/fokker_planck.hpp"
#include "dyson/io.hpp"
#include "dyson/plot.hpp"
#include "dyson/statistics.hpp"
#include "dyson/symfun.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <variant>

namespace dyson::cli {

namespace fs = std::filesystem;
namespace fp = dyson::fokker_planck;
using nlohmann::json;

namespace {

const std::map<std::string, Command> kCommands{
    {"verify-identities", Command::VerifyIdentities}, {"simulate", Command::Simulate},
    {"moments", Command::Moments},                     {"stationarity", Command::Stationarity},
    {"marginals", Command::Marginals},                 {"bernoulli", Command::Bernoulli},
    {"report", Command::Report}};

// Stream ids kept apart from the per-trajectory ids 0, 1, 2, ... used by the samplers.
constexpr std::uint64_t kStationarityStream = 1ull << 40;
constexpr std::uint64_t kWalkStream = 2ull << 40;
constexpr std::uint64_t kDriftStream = 3ull << 40;
constexpr std::uint64_t kFreshStream = 4ull << 40;

constexpr std::size_t kDriftSamples = 4;
constexpr std::size_t kDriftMaxDim = 512;

using Cell = std::variant<std::string, double>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

class Emitter {
public:
    Emitter(fs::path dir, Format format) : dir_(std::move(dir)), format_(format) {}

    void table(const std::string& stem, const Table& t) {
        if (format_ == Format::Csv) {
            io::CsvTable csv(t.header);
            for (const auto& row : t.rows) {
                std::vector<std::string> cells;
                for (const auto& c : row)
                    cells.push_back(std::holds_alternative<double>(c) ? io::format_double(std::get<double>(c))
                                                                      : std::get<std::string>(c));
                csv.add_row(std::move(cells));
            }
            text(stem + ".csv", csv.str());
        } else {
            json rows = json::array();
            for (const auto& row : t.rows) {
                json r = json::array();
                for (const auto& c : row) {
                    if (std::holds_alternative<double>(c)) r.push_back(std::get<double>(c));
                    else r.push_back(std::get<std::string>(c));
                }
                rows.push_back(std::move(r));
            }
            text(stem + ".json", json{{"columns", t.header}, {"rows", rows}}.dump(1) + "\n");
        }
    }

    void text(const std::string& name, const std::string& content) {
        files_.push_back({name, io::write_file(dir_ / name, content)});
    }

    const std::vector<EmittedFile>& files() const noexcept { return files_; }

private:
    fs::path dir_;
    Format format_;
    std::vector<EmittedFile> files_;
};

struct Outcome {
    json checks = json::array();
    json statistics = json::object();
    json fits = json::array();
    bool passed = true;

    void check(const std::string& name, json value, json tolerance, bool ok) {
        checks.push_back({{"name", name}, {"value", std::move(value)}, {"tolerance", std::move(tolerance)}, {"passed", ok}});
        passed = passed && ok;
    }
    void stat(const std::string& name, json value) { statistics[name] = {{"value", std::move(value)}, {"tolerance", nullptr}}; }
};

std::vector<std::string> provenance(const RunConfig& cfg, const std::string& what) {
    return {"dyson " + to_string(cfg.command) + ": " + what, "config " + cfg.to_json().dump()};
}

std::vector<Cell> sample_row(const sim::SampleSet& s, std::size_t r) {
    std::vector<Cell> row{static_cast<double>(s.trajectory[r]), s.times[r]};
    for (std::size_t c = 0; c < s.columns.size(); ++c) row.emplace_back(s.at(r, c));
    return row;
}

Table sample_table(const sim::SampleSet& s) {
    Table t;
    t.header = {"trajectory", "time"};
    t.header.insert(t.header.end(), s.columns.begin(), s.columns.end());
    for (std::size_t r = 0; r < s.rows(); ++r) t.rows.push_back(sample_row(s, r));
    return t;
}

sim::SdeConfig sde_for(const RunConfig& cfg) {
    sim::SdeConfig c = cfg.sde;
    c.seed = cfg.seed;
    const std::size_t total = cfg.effective_samples();
    c.samples_per_trajectory = (total + c.trajectories - 1) / c.trajectories;
    return c;
}

// verify-identities ---------------------------------------------------------

void verify_identities(const RunConfig& cfg, Emitter& emit, Outcome& out) {
    Table t{{"dim", "tuple", "n", "identity", "residual"}, {}};
    std::size_t total = 0, nonzero = 0;
    for (std::size_t dim = cfg.identity_n_min; dim <= cfg.identity_n_max; ++dim) {
        RandomStream rng(cfg.seed, dim);
        for (std::size_t tuple = 0; tuple < cfg.tuples; ++tuple) {
            const auto nodes = symfun::random_rational_nodes(dim, rng);
            const symfun::IdentityChecker<Rational> chk(nodes, cfg.degree_max);
            for (std::size_t n = 0; n <= cfg.degree_max; ++n) {
                const std::pair<const char*, Rational> results[] = {
                    {"identity_1", chk.identity_1(n)}, {"identity_2", chk.identity_2(n)}, {"appendix", chk.identity_appendix(n)}};
                for (const auto& [name, r] : results) {
                    ++total;
                    if (r != 0) ++nonzero;
                    t.rows.push_back({static_cast<double>(dim), static_cast<double>(tuple), static_cast<double>(n),
                                      std::string(name), dyson::to_string(r)});
                }
            }
        }
    }
    emit.table("identities", t);
    out.stat("residuals_evaluated", total);
    out.check("nonzero_residuals", nonzero, "exact", nonzero == 0);
}

// moments -------------------------------------------------------------------

void moments(const RunConfig& cfg, Emitter& emit, Outcome& out) {
    const auto tau = fp::mean_trace_recursion(cfg.spec, cfg.order);
    const auto t = fp::mean_traces_unscaled(cfg.spec, cfg.order);
    const Rational dim(static_cast<long>(cfg.spec.dim));
    Table table{{"n", "tau_exact", "tau", "t_exact", "t", "semicircle_limit"}, {}};
    std::size_t scaling_mismatch = 0, catalan_mismatch = 0;
    plot::Series recursion{"recursion", {}, {}, plot::Style::Points};
    plot::Series limit{"C_k / 2^k", {}, {}, plot::Style::Line};
    for (std::size_t n = 0; n <= cfg.order; ++n) {
        Rational semicircle = 0;
        if (n % 2 == 0) {
            semicircle = fp::catalan(n / 2) / ipow(Rational(2), n / 2);
            if (t[n] != ipow(dim, n / 2 + 1) * tau[n]) ++scaling_mismatch;
            limit.x.push_back(static_cast<double>(n));
            limit.y.push_back(to_double(semicircle));
        }
        if (cfg.spec.beta == 2 && tau[n] != semicircle) ++catalan_mismatch;
        recursion.x.push_back(static_cast<double>(n));
        recursion.y.push_back(to_double(tau[n]));
        table.rows.push_back({static_cast<double>(n), dyson::to_string(tau[n]), to_double(tau[n]), dyson::to_string(t[n]),
                              to_double(t[n]), dyson::to_string(semicircle)});
    }
    emit.table("moments", table);
    out.check("scaled_vs_unscaled_mismatches", scaling_mismatch, "exact", scaling_mismatch == 0);
    if (cfg.spec.beta == 2) out.check("catalan_mismatches", catalan_mismatch, "exact", catalan_mismatch == 0);
    if (cfg.plots) {
        plot::Figure f{"mean traces, beta = " + std::to_string(cfg.spec.beta) + ", N = " + std::to_string(cfg.spec.dim),
                       "n", "<tau_n>", false, false, {limit, recursion}, provenance(cfg, "mean trace recursion")};
        emit.text("moments.svg", plot::render_svg(f));
    }
}

// stationarity --------------------------------------------------------------

void stationarity(const RunConfig& cfg, Emitter& emit, Outcome& out) {
    const std::size_t dim = cfg.spec.dim;
    Table table{{"point", "n", "nodes", "residual", "floating_relative_residual"}, {}};
    RandomStream rng(cfg.seed, kStationarityStream + dim);
    std::size_t nonzero = 0;
    double worst_float = 0.0;
    for (std::size_t p = 0; p < cfg.points; ++p) {
        const auto nodes = symfun::random_rational_nodes(dim, rng);
        std::string node_text;
        for (const auto& x : nodes) node_text += (node_text.empty() ? "" : " ") + dyson::to_string(x);
        const fp::StationarityCheck<Rational> chk(nodes, cfg.spec.beta);
        std::vector<double> tf;
        for (std::size_t k = 1; k <= dim; ++k) tf.push_back(to_double(chk.traces()[static_cast<long>(k)]));
        const symfun::TraceVector<double> t_double(dim, tf);
        for (std::size_t n = 1; n <= dim; ++n) {
            const auto r = chk.residual(n);
            if (r.value != 0) ++nonzero;
            const double rel = fp::stationarity_residual(t_double, cfg.spec.beta, n).relative();
            worst_float = std::max(worst_float, rel);
            table.rows.push_back({static_cast<double>(p), static_cast<double>(n), node_text, dyson::to_string(r.value), rel});
        }
    }
    emit.table("stationarity", table);
    out.check("nonzero_exact_residuals", nonzero, "exact", nonzero == 0);
    out.stat("max_floating_relative_residual", worst_float);
}

// simulate ------------------------------------------------------------------

void simulate(const RunConfig& cfg, Emitter& emit, Outcome& out) {
    const auto s = sim::simulate(cfg.spec, sde_for(cfg));
    emit.table("samples", sample_table(s));
    out.stat("rows", s.rows());
    out.stat("accepted_steps", s.accepted_steps);
    out.stat("rejected_steps", s.rejected_steps);
    out.stat("rejection_rate", s.rejection_rate());
    out.stat("config_hash", s.config_hash);
    for (const auto& c : s.columns) {
        const auto col = s.column(c);
        if (col.size() < 2) continue;
        const auto sum = stats::summarize(col);
        out.stat(c + "_mean", sum.mean);
        out.stat(c + "_mean_standard_error", sum.standard_error());
        out.stat(c + "_variance", sum.variance);
    }
    if (cfg.plots) {
        const std::string c = s.columns.size() >= 2 ? "t2" : "t1";
        plot::Figure f{c + " histogram (" + to_string(s.system) + " coordinates)", c, "density", false, false,
                       {plot::histogram(s.column(c), 60, c)}, provenance(cfg, "histogram of " + c)};
        emit.text("samples_" + c + ".svg", plot::render_svg(f));
    }
}

// marginals -----------------------------------------------------------------

void marginals(const RunConfig& cfg, Emitter& emit, Outcome& out) {
    sim::SdeConfig c = sde_for(cfg);
    c.system = sim::CoordinateSystem::Matrix;
    const auto s = sim::simulate_matrix_flow(cfg.spec, c);
    emit.table("marginals", sample_table(s));
    const int beta = cfg.spec.beta;
    const double ks_tol = beta == 4 ? 0.015 : 0.01;
    out.stat("rows", s.rows());

    for (const auto& [name, marginal] : {std::pair{std::string("t1"), fp::marginal_t1_n2(beta)},
                                         std::pair{std::string("t2"), fp::marginal_t2_n2(beta)}}) {
        const auto xs = s.column(name);
        const double ks = stats::ks_one_sample(xs, [&](double x) { return marginal.cdf(x); });
        out.check("ks_" + name, ks, ks_tol, ks < ks_tol);
        const auto sum = stats::summarize(xs);
        if (name == "t2") {
            const double rel = std::abs(sum.mean / marginal.mean() - 1.0);
            out.check("mean_t2_relative_error", rel, 0.02, rel < 0.02);
        }
        out.stat("mean_" + name, sum.mean);
        out.stat("closed_form_mean_" + name, marginal.mean());
        if (cfg.plots) {
            auto hist = plot::histogram(xs, 80, "samples");
            plot::Series curve{"closed form", {}, {}, plot::Style::Line};
            const double lo = hist.x.front(), hi = hist.x.back();
            for (int i = 0; i <= 400; ++i) {
                const double x = lo + (hi - lo) * i / 400.0;
                curve.x.push_back(x);
                curve.y.push_back(marginal.normalized_density(x));
            }
            plot::Figure f{name + " marginal at N = 2, beta = " + std::to_string(beta), name, "density", false, false,
                           {hist, curve}, provenance(cfg, name + " histogram against the closed-form density")};
            emit.text("marginal_" + name + ".svg", plot::render_svg(f));
        }
    }
}

// bernoulli -----------------------------------------------------------------

json fit_entry(const std::string& name, const std::vector<double>& n, const std::vector<double>& v, double expected,
               double tolerance) {
    json j{{"name", name}, {"expected_slope", expected}, {"tolerance", tolerance}};
    const bool positive = std::all_of(v.begin(), v.end(), [](double x) { return x > 0 && std::isfinite(x); });
    if (n.size() < 2 || !positive) {
        j["slope"] = nullptr;
        j["within_tolerance"] = false;
        j["note"] = n.size() < 2 ? "needs at least two N values" : "non-positive value; no log-log fit";
        return j;
    }
    const auto f = stats::log_log_fit(n, v);
    j["slope"] = f.slope;
    j["slope_standard_error"] = f.slope_standard_error;
    j["within_tolerance"] = std::abs(f.slope - expected) <= tolerance;
    return j;
}

void bernoulli_walks(const RunConfig& cfg, Emitter& emit, Outcome& out) {
    std::vector<bernoulli::Observable> obs;
    unsigned top = 4;
    for (const auto& name : cfg.observables) {
        obs.push_back(bernoulli::parse_observable(name));
        top = std::max(top, obs.back().max_power());
    }
    std::vector<std::string> walk_obs = cfg.observables;
    if (std::find(walk_obs.begin(), walk_obs.end(), "tau2") == walk_obs.end()) walk_obs.insert(walk_obs.begin(), "tau2");

    Table scaling;
    scaling.header = {"N", "drift_gap_tau4"};
    for (const auto& name : cfg.observables) {
        scaling.header.push_back(name + "_walk_mean");
        scaling.header.push_back(name + "_fresh_variance");
        if (bernoulli::parse_observable(name).is_zeta) scaling.header.push_back(name + "_gap_variance");
    }
    std::vector<double> ns, drift_gaps;
    std::map<std::string, std::vector<double>> gap_variances;
    const std::size_t fresh = cfg.effective_samples();

    for (const std::size_t n : cfg.n_list) {
        const std::string tag = "N=" + std::to_string(n);
        bernoulli::WalkOptions w;
        w.steps = cfg.walk_steps;
        w.record_every = std::max<std::size_t>(1, cfg.walk_steps / 500);
        w.observables = walk_obs;
        w.n_max = std::max(bernoulli::kDefaultMaxPower, top);
        RandomStream walk_rng(cfg.seed, kWalkStream + n);
        const auto series = bernoulli::walk_and_measure(n, w, walk_rng);

        Table ts;
        ts.header = {"step", "time"};
        ts.header.insert(ts.header.end(), series.columns.begin(), series.columns.end());
        for (std::size_t r = 0; r < series.rows(); ++r) {
            std::vector<Cell> row{static_cast<double>(series.steps[r]), series.times[r]};
            for (std::size_t c = 0; c < series.columns.size(); ++c) row.emplace_back(series.data[r * series.columns.size() + c]);
            ts.rows.push_back(std::move(row));
        }
        emit.table("bernoulli_N" + std::to_string(n), ts);
        out.check(tag + " t2_flip_violations", series.t2_violations, "exact", series.t2_violations == 0);
        out.check(tag + " tau2_changes", series.t2_changes, "exact", series.t2_changes == 0);
        out.check(tag + " incremental_trace_mismatches", series.refresh_mismatches, "exact", series.refresh_mismatches == 0);

        double gap = std::nan("");
        if (n <= kDriftMaxDim) {
            gap = 0.0;
            RandomStream rng(cfg.seed, kDriftStream + n);
            for (std::size_t k = 0; k < kDriftSamples; ++k) {
                const auto b = bernoulli::sample_bernoulli(n, rng);
                const auto m = bernoulli::exact_first_moment(b, 4, w.n_max);
                gap += std::abs(m.exact - m.goe) / b.delta_s() / (4.0 * bernoulli::tau(b, 4));
            }
            gap /= kDriftSamples;
            ns.push_back(static_cast<double>(n));
            drift_gaps.push_back(gap);
        }
        out.stat(tag + " drift_gap_tau4", gap);

        std::vector<Cell> row{static_cast<double>(n), gap};
        RandomStream rng(cfg.seed, kFreshStream + n);
        std::vector<std::vector<double>> values(obs.size()), gaps(obs.size());
        for (std::size_t s = 0; s < fresh; ++s) {
            const auto b = bernoulli::sample_bernoulli(n, rng);
            unsigned need = 0;
            for (const auto& o : obs) need = std::max(need, o.is_zeta ? std::max(o.a + o.b, o.max_power()) : o.a);
            const bernoulli::SignPowers powers(b, need);
            for (std::size_t i = 0; i < obs.size(); ++i) {
                values[i].push_back(bernoulli::evaluate(obs[i], powers, b));
                if (obs[i].is_zeta) {
                    const double tr = bernoulli::evaluate({false, obs[i].a, 0}, powers, b);
                    const double ts_ = bernoulli::evaluate({false, obs[i].b, 0}, powers, b);
                    gaps[i].push_back(tr * ts_ - values[i].back());
                }
            }
        }
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const auto& name = cfg.observables[i];
            const auto walk = stats::summarize(series.column(name));
            const auto f = stats::summarize(values[i]);
            row.emplace_back(walk.mean);
            row.emplace_back(f.variance);
            out.stat(tag + " " + name + "_walk_mean", walk.mean);
            out.stat(tag + " " + name + "_fresh_variance", f.variance);
            if (obs[i].is_zeta) {
                const double v = stats::summarize(gaps[i]).variance;
                row.emplace_back(v);
                gap_variances[name].push_back(v);
                out.stat(tag + " " + name + "_gap_variance", v);
            }
        }
        scaling.rows.push_back(std::move(row));
    }
    emit.table("bernoulli_scaling", scaling);

    std::vector<double> all_n;
    for (auto n : cfg.n_list) all_n.push_back(static_cast<double>(n));
    out.fits.push_back(fit_entry("drift_gap_tau4", ns, drift_gaps, -1.0, 0.5));
    for (const auto& [name, v] : gap_variances) out.fits.push_back(fit_entry(name + "_gap_variance", all_n, v, -2.0, 0.5));

    if (cfg.plots) {
        plot::Figure f{"Bernoulli walk scaling", "N", "value", true, true, {}, provenance(cfg, "scaling with N")};
        f.series.push_back({"drift gap tau4", ns, drift_gaps, plot::Style::Points});
        for (const auto& [name, v] : gap_variances) f.series.push_back({"Var gap " + name, all_n, v, plot::Style::Points});
        emit.text("bernoulli_scaling.svg", plot::render_svg(f));
    }
}

// report --------------------------------------------------------------------

constexpr std::string_view kSummarySuffix = ".summary.json";

bool is_summary(const fs::path& p) {
    const std::string name = p.filename().string();
    return name.size() > kSummarySuffix.size() && name.ends_with(kSummarySuffix) && name != "report.summary.json";
}

void report(const RunConfig& cfg, Emitter& emit, Outcome& out) {
    std::vector<fs::path> summaries;
    if (fs::is_directory(cfg.out))
        for (const auto& e : fs::directory_iterator(cfg.out))
            if (e.is_regular_file() && is_summary(e.path())) summaries.push_back(e.path());
    std::sort(summaries.begin(), summaries.end());
    out.check("summaries_found", summaries.size(), ">= 1", !summaries.empty());

    Table table{{"summary", "command", "passed", "files", "files_intact"}, {}};
    for (const auto& path : summaries) {
        const auto j = json::parse(io::read_file(path));
        std::size_t intact = 0, count = 0;
        for (const auto& f : j.at("files")) {
            ++count;
            const fs::path data = cfg.out / f.at("path").get<std::string>();
            if (fs::exists(data) && io::git_blob_sha1(io::read_file(data)) == f.at("git_blob_sha1").get<std::string>())
                ++intact;
        }
        const std::string name = path.filename().string();
        const bool passed = j.at("passed").get<bool>();
        out.check(name + " passed", passed, "exact", passed);
        out.check(name + " files_changed", count - intact, "exact", intact == count);
        table.rows.push_back({name, j.at("command").get<std::string>(), passed ? "true" : "false",
                              static_cast<double>(count), static_cast<double>(intact)});
    }
    emit.table("report", table);
}

}  // namespace

std::string to_string(Command c) {
    for (const auto& [name, cmd] : kCommands)
        if (cmd == c) return name;
    return "unknown";
}

Command parse_command(const std::string& name) {
    const auto it = kCommands.find(name);
    if (it == kCommands.end()) throw UsageError("unknown command '" + name + "'");
    return it->second;
}

std::size_t RunConfig::effective_samples() const {
    if (samples > 0) return samples;
    switch (command) {
        case Command::Simulate: return 1000;
        case Command::Marginals: return 100000;
        case Command::Bernoulli: return 200;
        default: return 0;
    }
}

void RunConfig::validate() const {
    if (out.empty()) throw UsageError("output directory must not be empty");
    switch (command) {
        case Command::VerifyIdentities:
            if (identity_n_min < 1 || identity_n_min > identity_n_max) throw UsageError("need 1 <= n-min <= n-max");
            if (tuples < 1) throw UsageError("need at least one tuple");
            break;
        case Command::Stationarity:
            if (points < 1) throw UsageError("need at least one point");
            break;
        case Command::Marginals:
            if (spec.dim != 2) throw UsageError("the closed-form marginals are for N = 2");
            [[fallthrough]];
        case Command::Simulate:
            try {
                sde.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            break;
        case Command::Bernoulli: {
            if (n_list.empty()) throw UsageError("n-list must not be empty");
            if (observables.empty()) throw UsageError("need at least one observable");
            if (walk_steps < 1) throw UsageError("walk needs at least one step");
            if (effective_samples() < 2) throw UsageError("need at least two fresh samples per N");
            unsigned top = 4;
            for (const auto& o : observables) {
                try {
                    const auto p = bernoulli::parse_observable(o);
                    top = std::max({top, p.max_power(), p.is_zeta ? p.a + p.b : 0u});
                } catch (const std::invalid_argument& e) {
                    throw UsageError(e.what());
                }
            }
            for (auto n : n_list) {
                if (n < 2) throw UsageError("Bernoulli matrices need N >= 2");
                if (top > bernoulli::max_safe_power(n))
                    throw UsageError("observable order " + std::to_string(top) + " overflows exact arithmetic at N = " +
                                     std::to_string(n));
            }
            break;
        }
        case Command::Moments:
        case Command::Report:
            break;
    }
}

json RunConfig::to_json() const {
    auto sde_json = sde.to_json();
    sde_json["seed"] = seed;
    return {{"command", to_string(command)},
            {"beta", spec.beta},
            {"dim", spec.dim},
            {"sde", sde_json},
            {"identities", {{"n_min", identity_n_min}, {"n_max", identity_n_max}, {"degree_max", degree_max}, {"tuples", tuples}}},
            {"order", order},
            {"points", points},
            {"n_list", n_list},
            {"observables", observables},
            {"walk_steps", walk_steps},
            {"samples", effective_samples()},
            {"out", out.string()},
            {"seed", seed},
            {"format", format == Format::Csv ? "csv" : "json"},
            {"plots", plots}};
}

ReportBundle run(const RunConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(cfg.out);
    Emitter emit(cfg.out, cfg.format);
    Outcome outcome;
    switch (cfg.command) {
        case Command::VerifyIdentities: verify_identities(cfg, emit, outcome); break;
        case Command::Simulate: simulate(cfg, emit, outcome); break;
        case Command::Moments: moments(cfg, emit, outcome); break;
        case Command::Stationarity: stationarity(cfg, emit, outcome); break;
        case Command::Marginals: marginals(cfg, emit, outcome); break;
        case Command::Bernoulli: bernoulli_walks(cfg, emit, outcome); break;
        case Command::Report: report(cfg, emit, outcome); break;
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    ReportBundle bundle;
    bundle.files = emit.files();
    bundle.passed = outcome.passed;
    json files = json::array();
    for (const auto& f : bundle.files) files.push_back({{"path", f.path}, {"git_blob_sha1", f.blob}});
    bundle.summary = {{"tool", "dyson"},
                      {"command", to_string(cfg.command)},
                      {"config", cfg.to_json()},
                      {"files", files},
                      {"checks", outcome.checks},
                      {"statistics", outcome.statistics},
                      {"fits", outcome.fits},
                      {"passed", outcome.passed},
                      {"timing", {{"elapsed_seconds", elapsed}}}};
    bundle.summary_path = to_string(cfg.command) + std::string(kSummarySuffix);
    io::write_file(cfg.out / bundle.summary_path, bundle.summary.dump(2) + "\n");
    return bundle;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dyson Brownian motion in matrix, eigenvalue and trace coordinates"};
    app.set_config("--config", "", "key = value file; flags on the command line win");
    app.option_defaults()->always_capture_default();

    RunConfig cfg;
    std::string command, system = "matrix", format = "csv";
    int beta = 1;
    std::size_t dim = 2;
    std::vector<std::string> names;
    for (const auto& [name, c] : kCommands) names.push_back(name);

    app.add_option("command", command, "What to run")->required()->check(CLI::IsMember(names));
    app.add_option("--beta", beta, "Dyson index")->check(CLI::IsMember({1, 2, 4}));
    app.add_option("--dim", dim, "Matrix size N")->check(CLI::PositiveNumber);
    app.add_option("--dt", cfg.sde.dt, "Integrator step")->check(CLI::PositiveNumber);
    app.add_option("--burn-in", cfg.sde.burn_in, "Time discarded before sampling")->check(CLI::NonNegativeNumber);
    app.add_option("--interval", cfg.sde.sample_interval, "Time between samples")->check(CLI::PositiveNumber);
    app.add_option("--trajectories", cfg.sde.trajectories, "Independent trajectories")->check(CLI::PositiveNumber);
    app.add_option("--threads", cfg.sde.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--system", system, "Coordinates for simulate")->check(CLI::IsMember({"matrix", "eigen", "trace"}));
    app.add_flag("--spectrum", cfg.sde.record_spectrum, "Record the sorted spectrum");
    app.add_option("--record-traces", cfg.sde.record_traces, "Highest trace recorded (0: N)");
    app.add_option("--samples", cfg.samples, "Samples (simulate, marginals) or fresh matrices per N (bernoulli)");
    app.add_option("--seed", cfg.seed, "Master seed");
    app.add_option("--out", cfg.out, "Output directory");
    app.add_option("--format", format, "Data file format")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--plots", cfg.plots, "Also write SVG plots");
    app.add_option("--n-min", cfg.identity_n_min, "Smallest N for identity checks");
    app.add_option("--n-max", cfg.identity_n_max, "Largest N for identity checks");
    app.add_option("--deg-max", cfg.degree_max, "Largest identity degree n");
    app.add_option("--tuples", cfg.tuples, "Random node tuples per N");
    app.add_option("--order", cfg.order, "Highest mean trace order");
    app.add_option("--points", cfg.points, "Interior points for stationarity");
    app.add_option("--n-list", cfg.n_list, "Bernoulli sizes")->delimiter(',');
    app.add_option("--observable", cfg.observables, "Bernoulli observables: tau<k>, zeta<r>,<s>")->delimiter(';');
    app.add_option("--steps", cfg.walk_steps, "Bernoulli walk length");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        cfg.command = parse_command(command);
        cfg.spec = EnsembleSpec(beta, dim);
        cfg.sde.system = sim::parse_system(system);
        cfg.format = format == "json" ? Format::Json : Format::Csv;
        // "tau4,zeta22" is the natural spelling; only zeta<r>,<s> needs the comma kept.
        std::vector<std::string> split;
        for (const auto& item : cfg.observables) {
            std::size_t pos = 0;
            while (pos < item.size()) {
                std::size_t next = item.find(',', pos);
                if (next == std::string::npos) next = item.size();
                std::string piece = item.substr(pos, next - pos);
                if (!split.empty() && split.back().rfind("zeta", 0) == 0 && split.back().find(',') == std::string::npos &&
                    split.back().size() == 5 && piece.find_first_not_of("0123456789") == std::string::npos && !piece.empty())
                    split.back() += "," + piece;
                else if (!piece.empty())
                    split.push_back(piece);
                pos = next + 1;
            }
        }
        cfg.observables = split;
        const auto bundle = run(cfg);
        out << to_string(cfg.command) << ": " << (bundle.passed ? "PASS" : "FAIL") << " ("
            << bundle.summary.at("checks").size() << " checks) -> " << (cfg.out / bundle.summary_path).string() << '\n';
        for (const auto& c : bundle.summary.at("checks"))
            if (!c.at("passed").get<bool>())
                out << "  failed: " << c.at("name").get<std::string>() << " = " << c.at("value").dump()
                    << " (tolerance " << c.at("tolerance").dump() << ")\n";
        return bundle.passed ? kExitOk : kExitCheckFailed;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const sim::NumericalAbort& e) {
        err << "numerical abort: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace dyson::cli
