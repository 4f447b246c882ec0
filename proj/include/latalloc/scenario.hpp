#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "latalloc/netmodel.hpp"
#include "latalloc/sim.hpp"

namespace latalloc::scenario {

/// Parse failure with the offending source and line.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// An experiment grid: one SimConfig template swept over task counts,
/// replications and policies.
struct Scenario {
    std::string scenario_id = "scenario";
    sim::SimConfig base;
    std::vector<std::size_t> task_counts;
    std::size_t replications = 1;
    std::vector<agent::Policy> policies{agent::Policy::baseline, agent::Policy::latency_optimized};
    std::optional<std::filesystem::path> output_dir;
    std::size_t jobs = 1;

    /// Config for one sweep point, replication and policy. The replication
    /// seed is derive_seed(base.seed, replication).
    [[nodiscard]] sim::SimConfig materialize(std::size_t point, std::size_t replication,
                                             agent::Policy policy) const;

    /// Validates the grid and every config it materialises.
    void validate() const;
};

/// Reads the `key = value` scenario format. `#` starts a comment. A
/// `version = 1` line is required. See README for the key list.
[[nodiscard]] Scenario parse_scenario(std::istream& is, const std::string& source = "<scenario>");
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// "baseline", "lo" or "both".
[[nodiscard]] std::vector<agent::Policy> parse_policy_set(const std::string& name);

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  ///< overrides the scenario's output_dir
    std::optional<std::size_t> jobs;
    std::optional<std::uint64_t> seed;  ///< overrides the root seed
    std::optional<std::vector<agent::Policy>> policies;
    bool timing = false;           ///< fill wall_clock_ms (otherwise 0, keeping output reproducible)
    bool log_allocations = false;  ///< also write allocations.csv
};

/// One results.csv row.
struct ResultRow {
    std::string scenario_id;
    agent::Policy policy = agent::Policy::baseline;
    std::uint64_t seed = 0;
    std::size_t num_tasks = 0;
    std::size_t num_resources = 0;
    double theta = 0.0;
    double lambda = 0.0;
    double mean_response_time = 0.0;
    std::size_t finished = 0;
    std::size_t rejected = 0;
    double wall_clock_ms = 0.0;
};

[[nodiscard]] std::string csv_header();
[[nodiscard]] std::string to_csv(const ResultRow& row);

/// Runs every sweep point x replication x policy and writes results.csv,
/// summary.json and one archived topology per sweep point and replication.
/// Throws Error (before writing anything) when the scenario is invalid.
void run_scenario(const Scenario& scenario, const RunOptions& options, std::ostream& log);

/// Re-runs every sweep point of `scenario` on an archived topology with the
/// archive's replication seed. Throws Error on a dimension mismatch.
void replay(const net::TopologyArchive& archive, const Scenario& scenario,
            const RunOptions& options, std::ostream& log);

}  // namespace latalloc::scenario
