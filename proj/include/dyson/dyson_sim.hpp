#pragma once

#include "dyson/ensemble_spec.hpp"
#include "dyson/statistics.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyson::sim {

enum class CoordinateSystem { Matrix, Eigenvalue, Trace };

std::string to_string(CoordinateSystem s);
CoordinateSystem parse_system(const std::string& name);

/// Integrator could not make progress (step floor reached, or the diffusion
/// matrix lost positive semidefiniteness beyond the clipping tolerance).
class NumericalAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SdeConfig {
    double dt = 1e-3;
    double burn_in = 10.0;
    double sample_interval = 0.5;
    std::size_t trajectories = 1;
    std::size_t samples_per_trajectory = 1000;
    std::uint64_t seed = 1;
    CoordinateSystem system = CoordinateSystem::Matrix;
    /// Highest trace index recorded; 0 means N.
    std::size_t record_traces = 0;
    /// Record the sorted spectrum (always on for the eigenvalue system).
    bool record_spectrum = false;
    unsigned threads = 1;

    void validate() const;
    nlohmann::json to_json() const;
};

/// Stationary samples; one row per sample time, row-major.
struct SampleSet {
    CoordinateSystem system = CoordinateSystem::Matrix;
    EnsembleSpec spec;
    std::vector<std::string> columns;  // "t1".."tK", then "lambda1".."lambdaN" if recorded
    std::vector<std::size_t> trajectory;
    std::vector<double> times;
    std::vector<double> data;
    std::string config_hash;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    std::size_t rows() const noexcept { return times.size(); }
    std::size_t column_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
    double at(std::size_t row, std::size_t col) const { return data[row * columns.size() + col]; }
    double rejection_rate() const;
};

/// SHA-1 of the canonical JSON of (spec, config).
std::string config_hash(const EnsembleSpec& spec, const SdeConfig& config);

SampleSet simulate_matrix_flow(const EnsembleSpec& spec, const SdeConfig& config);

/// Default start: lambda_k = k - (N + 1)/2.
SampleSet simulate_eigenvalue_sde(const EnsembleSpec& spec, const SdeConfig& config,
                                  std::optional<std::vector<double>> initial = std::nullopt);

/// Default start: traces of the default eigenvalue start.
SampleSet simulate_trace_sde(const EnsembleSpec& spec, const SdeConfig& config,
                             std::optional<std::vector<double>> initial_t = std::nullopt);

/// Dispatch on config.system.
SampleSet simulate(const EnsembleSpec& spec, const SdeConfig& config);

/// A scalar statistic of one sample row.
struct Statistic {
    std::string name;
    std::function<double(const SampleSet&, std::size_t)> value;
};

Statistic column_statistic(const std::string& column);
/// 2 t_2 - t_1^2 = (lambda_2 - lambda_1)^2 at N = 2.
Statistic squared_gap_statistic();
Statistic max_eigenvalue_statistic();

std::vector<double> evaluate(const SampleSet& set, const Statistic& stat);

struct Comparison {
    std::string statistic;
    double ks = 0.0;
    double mean_z = 0.0;
    double variance_z = 0.0;
    stats::Summary a;
    stats::Summary b;
};

std::vector<Comparison> compare_samplers(const SampleSet& a, const SampleSet& b, const std::vector<Statistic>& statistics);

/// One trace-SDE step diagnostic: factorisation of R^(beta) at a point.
struct DiffusionFactor {
    std::vector<double> factor;  // symmetric square root, row-major
    double clipped_min = 0.0;    // most negative eigenvalue before clipping
    double residual = 0.0;       // max |factor factor^T - R| / scale
    double scale = 0.0;
};

DiffusionFactor factor_diffusion(const std::vector<double>& diffusion, std::size_t n);

}  // namespace dyson::sim
