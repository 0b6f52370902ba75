#pragma once

#include "dyson/dyson_sim.hpp"
#include "dyson/ensemble_spec.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyson::cli {

enum class Command { VerifyIdentities, Simulate, Moments, Stationarity, Marginals, Bernoulli, Report };

std::string to_string(Command c);
Command parse_command(const std::string& name);

enum class Format { Csv, Json };

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitNumerical = 70;

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    Command command = Command::Report;
    EnsembleSpec spec{1, 2};
    /// Integrator settings; `sde.seed` is overwritten by `seed`.
    sim::SdeConfig sde;

    // verify-identities
    std::size_t identity_n_min = 1;
    std::size_t identity_n_max = 8;
    std::size_t degree_max = 12;
    std::size_t tuples = 20;

    // moments
    std::size_t order = 12;

    // stationarity
    std::size_t points = 10;

    // bernoulli
    std::vector<std::size_t> n_list{16, 32, 64, 128};
    std::vector<std::string> observables{"tau4", "zeta22"};
    std::size_t walk_steps = 20000;

    /// Stationary samples (simulate, marginals) or fresh matrices per N
    /// (bernoulli). 0 picks the command's default.
    std::size_t samples = 0;

    std::filesystem::path out = "dyson-out";
    std::uint64_t seed = 1;
    Format format = Format::Csv;
    bool plots = false;

    /// Throws UsageError.
    void validate() const;
    std::size_t effective_samples() const;
    nlohmann::json to_json() const;
};

struct EmittedFile {
    std::string path;  // relative to the output directory
    std::string blob;  // git blob SHA-1
};

struct ReportBundle {
    std::vector<EmittedFile> files;  // data and plots; the summary is written last
    std::string summary_path;
    nlohmann::json summary;
    bool passed = true;
};

ReportBundle run(const RunConfig& config);

/// Flag parsing (with an optional --config key-value file; flags win), run,
/// and the mapping of outcomes onto exit codes.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dyson::cli
