// Command-line front end: runs scenario sweeps and replays archived topologies.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "latalloc/scenario.hpp"

namespace {

struct Flags {
    std::string out;
    std::size_t jobs = 0;
    std::optional<std::uint64_t> seed;
    std::string policy;
    bool timing = false;
    bool allocations = false;
};

void add_flags(CLI::App& cmd, Flags& flags) {
    cmd.add_option("--out", flags.out, "Output directory (overrides output_dir)");
    cmd.add_option("--jobs", flags.jobs, "Concurrent replications")->check(CLI::PositiveNumber);
    cmd.add_option("--seed", flags.seed, "Root seed (overrides the scenario seed)");
    cmd.add_option("--policy", flags.policy, "baseline, lo or both")
        ->check(CLI::IsMember({"baseline", "lo", "both"}));
    cmd.add_flag("--timing", flags.timing,
                 "Record wall_clock_ms (results.csv is then no longer reproducible)");
    cmd.add_flag("--allocations", flags.allocations, "Also write allocations.csv");
}

latalloc::scenario::RunOptions to_options(const Flags& flags) {
    latalloc::scenario::RunOptions options;
    if (!flags.out.empty()) options.out_dir = flags.out;
    if (flags.jobs > 0) options.jobs = flags.jobs;
    options.seed = flags.seed;
    if (!flags.policy.empty()) options.policies = latalloc::scenario::parse_policy_set(flags.policy);
    options.timing = flags.timing;
    options.log_allocations = flags.allocations;
    return options;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Auction-based cloud allocation simulator with latency-aware resource agent"};
    app.require_subcommand(1);

    Flags run_flags;
    std::string run_scenario_path;
    auto* run_cmd = app.add_subcommand("run", "Run every sweep point, replication and policy");
    run_cmd->add_option("scenario", run_scenario_path, "Scenario file")->required();
    add_flags(*run_cmd, run_flags);

    Flags replay_flags;
    std::string topology_path;
    std::string replay_scenario_path;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run a scenario on an archived topology");
    replay_cmd->add_option("topology", topology_path, "Archived topology file")->required();
    replay_cmd->add_option("scenario", replay_scenario_path, "Scenario file")->required();
    add_flags(*replay_cmd, replay_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            const auto scenario = latalloc::scenario::load_scenario(run_scenario_path);
            latalloc::scenario::run_scenario(scenario, to_options(run_flags), std::cerr);
        } else {
            std::ifstream is(topology_path);
            if (!is) throw latalloc::Error("cannot open topology " + topology_path);
            const auto archive = latalloc::net::read_topology(is);
            const auto scenario = latalloc::scenario::load_scenario(replay_scenario_path);
            latalloc::scenario::replay(archive, scenario, to_options(replay_flags), std::cerr);
        }
    } catch (const latalloc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
