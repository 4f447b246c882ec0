#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "latalloc/agent.hpp"
#include "latalloc/auction.hpp"
#include "latalloc/model.hpp"
#include "latalloc/netmodel.hpp"
#include "latalloc/rng.hpp"

namespace latalloc::sim {

using Range = std::pair<double, double>;

/// Everything one simulation run depends on. `seed` is the replication seed;
/// topology, fleet, workload and probe noise each draw from a stream derived
/// from it.
struct SimConfig {
    std::size_t num_tasks = 100;
    std::size_t num_resources = 30;
    std::size_t num_applicants = 10;
    Range length_range{100000.0, 200000.0};
    double arrival_rate = 0.02;  ///< Poisson arrivals, tasks per time unit
    auction::BidParams bid_params;
    agent::BlendParams blend_params;
    double sigma = 1.0;
    Range latency_range{1.0, 500.0};  ///< one-way
    double jitter = 0.1;
    std::size_t probe_count = 3;
    std::uint64_t seed = 1;
    agent::Policy policy = agent::Policy::latency_optimized;

    Range cpu_range{500.0, 1500.0};
    Range low_price_range{1.0, 5.0};
    Range high_price_factor{1.5, 3.0};  ///< hp = lp * factor
    SimTime max_wait = 0.0;             ///< 0: each task's deadline minus arrival
    SimTime horizon = 0.0;              ///< 0: run until no event is left
    std::vector<net::FailureWindow> failures;

    /// Throws Error naming the first invalid field.
    void validate() const;

    /// Legal but questionable settings, e.g. bid weights not summing to 1.
    [[nodiscard]] std::vector<std::string> warnings() const;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

[[nodiscard]] std::vector<Resource> generate_resources(const SimConfig& config, Rng& rng);

/// Poisson arrivals; deadlines and budgets drawn around fleet means of cpu,
/// low price and high price.
[[nodiscard]] std::vector<Task> generate_workload(const SimConfig& config,
                                                  const std::vector<Resource>& resources, Rng& rng);

enum class Fate { finished, rejected, pending };

struct TaskOutcome {
    TaskId tid;
    ApplicantId applicant;
    SimTime arrival = 0.0;
    std::optional<SimTime> allocated_at;
    std::optional<SimTime> completed_at;
    std::optional<ResourceId> resource;
    Fate fate = Fate::pending;
    SimTime response_time = 0.0;  ///< completed_at - arrival; 0 unless finished

    friend bool operator==(const TaskOutcome&, const TaskOutcome&) = default;
};

/// Results of the in-engine invariant checks.
struct AuditReport {
    std::size_t events = 0;
    std::size_t commits = 0;
    std::vector<std::string> violations;

    [[nodiscard]] bool ok() const { return violations.empty(); }
    friend bool operator==(const AuditReport&, const AuditReport&) = default;
};

struct RunMetrics {
    std::vector<TaskOutcome> per_task;  ///< indexed by task id
    SimTime mean_response_time = 0.0;   ///< over finished tasks; 0 when none finished
    std::size_t allocation_count = 0;
    std::size_t rejection_count = 0;
    std::size_t finished_count = 0;
    std::size_t pending_count = 0;  ///< unallocated or still running at the horizon
    std::size_t reprobe_count = 0;
    std::vector<agent::RoundLog> rounds;
    AuditReport audit;

    friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// Generates topology, fleet and workload from `config.seed` and simulates.
[[nodiscard]] RunMetrics run(const SimConfig& config);

/// As above, on a fixed topology. Throws Error when its dimensions disagree
/// with the config.
[[nodiscard]] RunMetrics run(const SimConfig& config, const net::Topology& topology);

/// Simulates a hand-built scenario. Task ids must be 0..n-1 in arrival order
/// and resource ids 0..m-1.
[[nodiscard]] RunMetrics run_scripted(const SimConfig& config, const net::Topology& topology,
                                      std::vector<Resource> resources, std::vector<Task> tasks);

/// Topology for a config, drawn from its topology stream.
[[nodiscard]] net::Topology make_topology(const SimConfig& config);

struct PairedRun {
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    double first_mean = 0.0;
    double second_mean = 0.0;
    double ratio = 1.0;  ///< second / first

    friend bool operator==(const PairedRun&, const PairedRun&) = default;
};

struct Comparison {
    std::vector<PairedRun> runs;
    double win_rate = 0.0;    ///< fraction of replications where second < first strictly
    double mean_ratio = 1.0;
};

/// Runs `first` and `second` on the same replication seeds
/// derive_seed(first.seed, r) for r < replications. Both configs must carry
/// the same root seed. Typically first is the baseline and second the
/// latency-optimised policy.
[[nodiscard]] Comparison compare(const SimConfig& first, const SimConfig& second,
                                 std::size_t replications, std::size_t jobs = 1);

[[nodiscard]] std::string to_string(agent::Policy policy);
/// Accepts "baseline", "lo" and "latency_optimized".
[[nodiscard]] agent::Policy parse_policy(const std::string& name);

}  // namespace latalloc::sim
