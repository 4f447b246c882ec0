#include "latalloc/scenario.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "latalloc/parallel.hpp"
#include "latalloc/text.hpp"

namespace latalloc::scenario {

namespace {

using Setter = std::function<void(Scenario&, std::string_view)>;

std::size_t to_count(std::string_view v) { return static_cast<std::size_t>(text::parse_u64(v)); }

sim::Range to_range(std::string_view v) {
    const auto parts = text::split(v, ',');
    if (parts.size() != 2) throw Error("expected 'lo, hi'");
    return {text::parse_double(parts[0]), text::parse_double(parts[1])};
}

std::vector<net::FailureWindow> to_failures(std::string_view v) {
    std::vector<net::FailureWindow> out;
    for (const auto item : text::split(v, ',')) {
        const auto f = text::split(item, ':');
        if (f.size() != 3) throw Error("expected 'resource:fail_at:recover_at'");
        out.push_back({ResourceId{static_cast<std::uint32_t>(text::parse_u64(f[0]))},
                       text::parse_double(f[1]), text::parse_double(f[2])});
    }
    return out;
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"version",
         [](Scenario&, std::string_view v) {
             if (text::parse_u64(v) != 1) throw Error("unsupported version");
         }},
        {"scenario_id", [](Scenario& s, std::string_view v) { s.scenario_id = std::string(v); }},
        {"num_tasks", [](Scenario& s, std::string_view v) { s.task_counts = {to_count(v)}; }},
        {"task_counts",
         [](Scenario& s, std::string_view v) {
             s.task_counts.clear();
             for (const auto c : text::split(v, ',')) s.task_counts.push_back(to_count(c));
         }},
        {"num_resources", [](Scenario& s, std::string_view v) { s.base.num_resources = to_count(v); }},
        {"num_applicants", [](Scenario& s, std::string_view v) { s.base.num_applicants = to_count(v); }},
        {"replications", [](Scenario& s, std::string_view v) { s.replications = to_count(v); }},
        {"policy", [](Scenario& s, std::string_view v) { s.policies = parse_policy_set(std::string(v)); }},
        {"seed", [](Scenario& s, std::string_view v) { s.base.seed = text::parse_u64(v); }},
        {"jobs", [](Scenario& s, std::string_view v) { s.jobs = to_count(v); }},
        {"output_dir", [](Scenario& s, std::string_view v) { s.output_dir = std::string(v); }},
        {"arrival_rate", [](Scenario& s, std::string_view v) { s.base.arrival_rate = text::parse_double(v); }},
        {"length_range", [](Scenario& s, std::string_view v) { s.base.length_range = to_range(v); }},
        {"latency_range", [](Scenario& s, std::string_view v) { s.base.latency_range = to_range(v); }},
        {"jitter", [](Scenario& s, std::string_view v) { s.base.jitter = text::parse_double(v); }},
        {"probe_count", [](Scenario& s, std::string_view v) { s.base.probe_count = to_count(v); }},
        {"alpha", [](Scenario& s, std::string_view v) { s.base.bid_params.alpha = text::parse_double(v); }},
        {"beta", [](Scenario& s, std::string_view v) { s.base.bid_params.beta = text::parse_double(v); }},
        {"alpha_w", [](Scenario& s, std::string_view v) { s.base.bid_params.alpha_w = text::parse_double(v); }},
        {"beta_w", [](Scenario& s, std::string_view v) { s.base.bid_params.beta_w = text::parse_double(v); }},
        {"sigma", [](Scenario& s, std::string_view v) { s.base.sigma = text::parse_double(v); }},
        {"theta", [](Scenario& s, std::string_view v) { s.base.blend_params.theta = text::parse_double(v); }},
        {"lambda", [](Scenario& s, std::string_view v) { s.base.blend_params.lambda = text::parse_double(v); }},
        {"quarantine_timeout",
         [](Scenario& s, std::string_view v) { s.base.blend_params.quarantine_timeout = text::parse_double(v); }},
        {"cpu_range", [](Scenario& s, std::string_view v) { s.base.cpu_range = to_range(v); }},
        {"low_price_range", [](Scenario& s, std::string_view v) { s.base.low_price_range = to_range(v); }},
        {"high_price_factor", [](Scenario& s, std::string_view v) { s.base.high_price_factor = to_range(v); }},
        {"max_wait", [](Scenario& s, std::string_view v) { s.base.max_wait = text::parse_double(v); }},
        {"horizon", [](Scenario& s, std::string_view v) { s.base.horizon = text::parse_double(v); }},
        {"failures", [](Scenario& s, std::string_view v) { s.base.failures = to_failures(v); }},
    };
    return table;
}

Scenario apply_overrides(Scenario scenario, const RunOptions& options) {
    if (options.seed) scenario.base.seed = *options.seed;
    if (options.policies) scenario.policies = *options.policies;
    if (options.jobs) scenario.jobs = *options.jobs;
    return scenario;
}

std::filesystem::path output_dir(const Scenario& scenario, const RunOptions& options) {
    if (options.out_dir) return *options.out_dir;
    if (scenario.output_dir) return *scenario.output_dir;
    return "out";
}

struct RunRecord {
    ResultRow row;
    std::vector<agent::RoundLog> rounds;
};

// One (point, replication) unit: every policy on the same seed.
struct Unit {
    std::size_t point = 0;
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    std::optional<net::Topology> topology;
    std::vector<RunRecord> runs;  // one per policy
};

RunRecord run_one(const Scenario& scenario, const sim::SimConfig& config,
                  const net::Topology& topology, const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    auto metrics = sim::run(config, topology);
    const auto stop = std::chrono::steady_clock::now();

    const bool baseline = config.policy == agent::Policy::baseline;
    RunRecord rec;
    rec.row.scenario_id = scenario.scenario_id;
    rec.row.policy = config.policy;
    rec.row.seed = config.seed;
    rec.row.num_tasks = config.num_tasks;
    rec.row.num_resources = config.num_resources;
    rec.row.theta = baseline ? 1.0 : config.blend_params.theta;
    rec.row.lambda = baseline ? 0.0 : config.blend_params.lambda;
    rec.row.mean_response_time = metrics.mean_response_time;
    rec.row.finished = metrics.finished_count;
    rec.row.rejected = metrics.rejection_count;
    if (options.timing) {
        rec.row.wall_clock_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    }
    if (!metrics.audit.ok()) {
        throw Error("simulation audit failed for seed " + std::to_string(config.seed) + ": " +
                    metrics.audit.violations.front());
    }
    if (options.log_allocations) rec.rounds = std::move(metrics.rounds);
    return rec;
}

void write_outputs(const Scenario& scenario, const RunOptions& options,
                   const std::vector<Unit>& units, bool archive_topologies, std::ostream& log) {
    const auto dir = output_dir(scenario, options);
    std::filesystem::create_directories(dir);

    {
        std::ofstream csv(dir / "results.csv", std::ios::binary | std::ios::trunc);
        csv << csv_header();
        for (const auto& u : units) {
            for (const auto& r : u.runs) csv << to_csv(r.row);
        }
        if (!csv) throw Error("failed writing " + (dir / "results.csv").string());
    }

    if (options.log_allocations) {
        std::ofstream csv(dir / "allocations.csv", std::ios::binary | std::ios::trunc);
        csv << "scenario_id,policy,seed,num_tasks,round_time,task_id,resource_id,clearing_price,"
               "fp_hash\n";
        for (const auto& u : units) {
            for (const auto& r : u.runs) {
                for (const auto& round : r.rounds) {
                    for (const auto& p : round.pairs) {
                        csv << r.row.scenario_id << ',' << sim::to_string(r.row.policy) << ','
                            << r.row.seed << ',' << r.row.num_tasks << ','
                            << text::format_double(round.time) << ',' << p.task << ','
                            << p.resource << ',' << text::format_double(p.clearing_price) << ','
                            << round.fp_hash << '\n';
                    }
                }
            }
        }
    }

    if (archive_topologies) {
        std::filesystem::create_directories(dir / "topologies");
        for (const auto& u : units) {
            const auto name = "p" + std::to_string(u.point) + "_r" + std::to_string(u.replication) +
                              ".topo";
            std::ofstream os(dir / "topologies" / name, std::ios::binary | std::ios::trunc);
            net::write_topology(os, {u.seed, *u.topology});
        }
    }

    // Per sweep point: mean of per-replication means, paired LO/baseline ratios.
    nlohmann::ordered_json summary;
    summary["scenario_id"] = scenario.scenario_id;
    summary["root_seed"] = scenario.base.seed;
    summary["replications"] = scenario.replications;
    summary["num_resources"] = scenario.base.num_resources;
    summary["points"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < scenario.task_counts.size(); ++k) {
        nlohmann::ordered_json point;
        point["num_tasks"] = scenario.task_counts[k];
        std::map<std::string, std::pair<double, std::size_t>> sums;
        nlohmann::ordered_json reps = nlohmann::ordered_json::array();
        double ratio_sum = 0.0;
        std::size_t paired = 0;
        std::size_t wins = 0;
        for (const auto& u : units) {
            if (u.point != k) continue;
            nlohmann::ordered_json rep;
            rep["replication"] = u.replication;
            rep["seed"] = u.seed;
            std::optional<double> base_mean;
            std::optional<double> lo_mean;
            for (const auto& r : u.runs) {
                const auto name = sim::to_string(r.row.policy);
                rep[name] = r.row.mean_response_time;
                sums[name].first += r.row.mean_response_time;
                sums[name].second += 1;
                (r.row.policy == agent::Policy::baseline ? base_mean : lo_mean) =
                    r.row.mean_response_time;
            }
            if (base_mean && lo_mean && *base_mean > 0.0) {
                const double ratio = *lo_mean / *base_mean;
                rep["lo_over_baseline"] = ratio;
                ratio_sum += ratio;
                ++paired;
                if (*lo_mean <= *base_mean) ++wins;
            }
            reps.push_back(std::move(rep));
        }
        for (const auto& [name, s] : sums) {
            point["mean_response_time_" + name] = s.first / static_cast<double>(s.second);
        }
        if (paired > 0) {
            point["mean_lo_over_baseline"] = ratio_sum / static_cast<double>(paired);
            point["lo_not_worse_rate"] = static_cast<double>(wins) / static_cast<double>(paired);
        }
        point["replications"] = std::move(reps);
        summary["points"].push_back(std::move(point));
    }
    std::ofstream js(dir / "summary.json", std::ios::binary | std::ios::trunc);
    js << summary.dump(2) << '\n';
    log << "wrote " << (dir / "results.csv").string() << " and " << (dir / "summary.json").string()
        << '\n';
}

void execute(const Scenario& scenario, const RunOptions& options, std::vector<Unit>& units) {
    parallel_for(units.size(), scenario.jobs, [&](std::size_t u) {
        auto& unit = units[u];
        for (const auto policy : scenario.policies) {
            auto config = scenario.materialize(unit.point, unit.replication, policy);
            config.seed = unit.seed;
            if (!unit.topology) unit.topology = sim::make_topology(config);
            unit.runs.push_back(run_one(scenario, config, *unit.topology, options));
        }
    });
}

}  // namespace

sim::SimConfig Scenario::materialize(std::size_t point, std::size_t replication,
                                     agent::Policy policy) const {
    if (point >= task_counts.size()) throw Error("sweep point out of range");
    sim::SimConfig config = base;
    config.num_tasks = task_counts[point];
    config.seed = derive_seed(base.seed, replication);
    config.policy = policy;
    return config;
}

void Scenario::validate() const {
    if (task_counts.empty()) throw Error("invalid task_counts: sweep list is empty");
    if (replications == 0) throw Error("invalid replications = 0: must be >= 1");
    if (policies.empty()) throw Error("invalid policy: no policy selected");
    if (jobs == 0) throw Error("invalid jobs = 0: must be >= 1");
    if (scenario_id.empty() || scenario_id.find_first_of(",\n\"") != std::string::npos) {
        throw Error("invalid scenario_id: must be non-empty without commas or quotes");
    }
    for (std::size_t k = 0; k < task_counts.size(); ++k) {
        for (std::size_t r = 0; r < replications; ++r) {
            for (const auto p : policies) materialize(k, r, p).validate();
        }
    }
}

Scenario parse_scenario(std::istream& is, const std::string& source) {
    Scenario scenario;
    std::set<std::string, std::less<>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        auto body = std::string_view(line);
        if (const auto hash = body.find('#'); hash != std::string_view::npos) {
            body = body.substr(0, hash);
        }
        body = text::trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected 'key = value'");
        const auto key = text::trim(body.substr(0, eq));
        const auto value = text::trim(body.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ParseError(source, line_no, "unknown key '" + std::string(key) + "'");
        }
        if (!seen.insert(std::string(key)).second) {
            throw ParseError(source, line_no, "duplicate key '" + std::string(key) + "'");
        }
        try {
            it->second(scenario, value);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(source, line_no, std::string(key) + ": " + e.what());
        }
    }
    if (!seen.contains("version")) throw ParseError(source, line_no, "missing 'version = 1'");
    if (scenario.task_counts.empty()) scenario.task_counts = {scenario.base.num_tasks};
    return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open scenario " + path.string());
    return parse_scenario(is, path.string());
}

std::vector<agent::Policy> parse_policy_set(const std::string& name) {
    if (name == "both") return {agent::Policy::baseline, agent::Policy::latency_optimized};
    return {sim::parse_policy(name)};
}

std::string csv_header() {
    return "scenario_id,policy,seed,num_tasks,num_resources,theta,lambda,mean_response_time,"
           "finished,rejected,wall_clock_ms\n";
}

std::string to_csv(const ResultRow& row) {
    std::ostringstream os;
    os << row.scenario_id << ',' << sim::to_string(row.policy) << ',' << row.seed << ','
       << row.num_tasks << ',' << row.num_resources << ',' << text::format_double(row.theta) << ','
       << text::format_double(row.lambda) << ',' << text::format_double(row.mean_response_time)
       << ',' << row.finished << ',' << row.rejected << ','
       << text::format_double(row.wall_clock_ms) << '\n';
    return os.str();
}

void run_scenario(const Scenario& input, const RunOptions& options, std::ostream& log) {
    const Scenario scenario = apply_overrides(input, options);
    scenario.validate();
    for (const auto& w : scenario.base.warnings()) log << "warning: " << w << '\n';

    std::vector<Unit> units;
    for (std::size_t k = 0; k < scenario.task_counts.size(); ++k) {
        for (std::size_t r = 0; r < scenario.replications; ++r) {
            units.push_back(Unit{k, r, derive_seed(scenario.base.seed, r), std::nullopt, {}});
        }
    }
    execute(scenario, options, units);
    write_outputs(scenario, options, units, true, log);
}

void replay(const net::TopologyArchive& archive, const Scenario& input, const RunOptions& options,
            std::ostream& log) {
    Scenario scenario = apply_overrides(input, options);
    scenario.replications = 1;
    scenario.validate();
    const auto& topo = archive.topology;
    if (topo.applicants() != scenario.base.num_applicants ||
        topo.resources() != scenario.base.num_resources) {
        throw Error("topology is " + std::to_string(topo.applicants()) + "x" +
                    std::to_string(topo.resources()) + " (applicants x resources) but the scenario is " +
                    std::to_string(scenario.base.num_applicants) + "x" +
                    std::to_string(scenario.base.num_resources));
    }
    for (const auto& w : scenario.base.warnings()) log << "warning: " << w << '\n';

    std::vector<Unit> units;
    for (std::size_t k = 0; k < scenario.task_counts.size(); ++k) {
        units.push_back(Unit{k, 0, archive.seed, topo, {}});
    }
    execute(scenario, options, units);
    write_outputs(scenario, options, units, false, log);
}

}  // namespace latalloc::scenario
