#include "latalloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>

#include "latalloc/parallel.hpp"
#include "latalloc/text.hpp"

namespace latalloc::sim {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& value, const char* rule) {
    throw Error("invalid " + field + " = " + value + ": " + rule);
}

void check_range(const std::string& field, Range r, double min_lo) {
    if (!(r.first >= min_lo && r.second >= r.first && std::isfinite(r.second))) {
        invalid(field, text::format_double(r.first) + ", " + text::format_double(r.second),
                min_lo > 0.0 ? "needs 0 < lo <= hi" : "needs lo <= hi within bounds");
    }
}

double mean_of(const std::vector<Resource>& resources, double Resource::*field) {
    double sum = 0.0;
    for (const auto& r : resources) sum += r.*field;
    return sum / static_cast<double>(resources.size());
}

enum class EventKind { arrival, completion, expiry, reprobe };

struct Event {
    SimTime time;
    std::uint64_t seq;
    EventKind kind;
    std::size_t index;  // task index, or resource index for reprobe

    bool operator>(const Event& other) const {
        if (time != other.time) return time > other.time;
        return seq > other.seq;
    }
};

class Engine {
public:
    Engine(const SimConfig& config, const net::Topology& topology, std::vector<Resource> resources,
           std::vector<Task> tasks)
        : config_(config),
          topology_(topology),
          resources_(std::move(resources)),
          tasks_(std::move(tasks)),
          agent_(config.policy, config.bid_params, config.blend_params, config.sigma),
          probe_rng_(derive_seed(config.seed, Stream::probes)),
          busy_until_(resources_.size(), -INFINITY),
          reprobe_scheduled_(resources_.size(), false) {
        if (topology_.resources() != resources_.size()) {
            throw Error("topology has " + std::to_string(topology_.resources()) +
                        " resources, scenario has " + std::to_string(resources_.size()));
        }
        for (std::size_t j = 0; j < resources_.size(); ++j) {
            if (resources_[j].rid.value != j) throw Error("resource ids must be 0..n-1 in order");
            validate(resources_[j]);
        }
        metrics_.per_task.resize(tasks_.size());
        for (std::size_t i = 0; i < tasks_.size(); ++i) {
            const auto& t = tasks_[i];
            if (t.tid.value != i) throw Error("task ids must be 0..n-1 in order");
            if (t.applicant.value >= topology_.applicants()) {
                throw Error("task " + std::to_string(i) + " names unknown applicant " +
                            std::to_string(t.applicant.value));
            }
            validate(t);
            auto& out = metrics_.per_task[i];
            out.tid = t.tid;
            out.applicant = t.applicant;
            out.arrival = t.arrival_time;
        }
    }

    RunMetrics run() {
        for (std::size_t i = 0; i < tasks_.size(); ++i) {
            push(tasks_[i].arrival_time, EventKind::arrival, i);
        }
        SimTime last = -INFINITY;
        while (!queue_.empty()) {
            const Event ev = queue_.top();
            if (config_.horizon > 0.0 && ev.time > config_.horizon) break;
            queue_.pop();
            ++metrics_.audit.events;
            if (ev.time < last) violation("event time went backwards at " + text::format_double(ev.time));
            last = ev.time;
            now_ = ev.time;
            switch (ev.kind) {
                case EventKind::arrival: on_arrival(ev.index); break;
                case EventKind::completion: on_completion(ev.index); break;
                case EventKind::expiry: on_expiry(ev.index); break;
                case EventKind::reprobe: on_reprobe(ev.index); break;
            }
        }
        finish();
        return std::move(metrics_);
    }

private:
    void push(SimTime time, EventKind kind, std::size_t index) {
        queue_.push(Event{time, next_seq_++, kind, index});
    }

    void violation(std::string what) { metrics_.audit.violations.push_back(std::move(what)); }

    void on_arrival(std::size_t i) {
        Task& task = tasks_[i];
        const auto open = static_cast<std::size_t>(
            std::count_if(resources_.begin(), resources_.end(),
                          [&](const Resource& r) { return feasible(task, r, now_); }));
        task.remaining_resource_cap = std::max<std::size_t>(open, 1);
        if (config_.max_wait > 0.0) task.max_wait = config_.max_wait;

        // Admission: the unit budget must cover the mean low price of the
        // resources still on offer.
        bool admitted = false;
        try {
            admitted = task.unit_budget() >= auction::mean_low_price(resources_);
        } catch (const Error&) {
            admitted = false;
        }
        if (!admitted) {
            reject(i);
            return;
        }
        pending_.push_back(i);
        push(task.deadline, EventKind::expiry, i);
        round();
    }

    void on_completion(std::size_t i) {
        auto& out = metrics_.per_task[i];
        out.fate = Fate::finished;
        out.response_time = *out.completed_at - out.arrival;
        round();
    }

    void on_expiry(std::size_t i) {
        const auto it = std::find(pending_.begin(), pending_.end(), i);
        if (it == pending_.end()) return;
        pending_.erase(it);
        reject(i);
    }

    void on_reprobe(std::size_t j) {
        reprobe_scheduled_[j] = false;
        Resource& res = resources_[j];
        if (res.available()) return;
        const auto due = agent_.due_for_reprobe(resources_, now_);
        if (std::find(due.begin(), due.end(), res.rid) == due.end()) {
            schedule_reprobe(j);
            return;
        }
        auto applicants = agent_.unreachable_applicants(res.rid);
        if (applicants.empty()) applicants.push_back(ApplicantId{0});
        bool answered = false;
        for (const auto a : applicants) {
            const auto samples =
                net::probe(topology_, a, res.rid, config_.probe_count, now_, probe_rng_);
            answered = agent_.observe_probe(a, res, samples, now_) || answered;
        }
        ++metrics_.reprobe_count;
        if (answered) {
            round();
        } else {
            schedule_reprobe(j);
        }
    }

    void schedule_reprobe(std::size_t j) {
        if (reprobe_scheduled_[j]) return;
        SimTime last = resources_[j].quarantined_since;
        for (const auto a : agent_.unreachable_applicants(resources_[j].rid)) {
            last = std::max(last, agent_.table().find(a, resources_[j].rid)->last_probe);
        }
        reprobe_scheduled_[j] = true;
        push(last + config_.blend_params.quarantine_timeout, EventKind::reprobe, j);
    }

    void round() {
        if (pending_.empty()) return;
        std::vector<Task> pending;
        pending.reserve(pending_.size());
        for (std::size_t i : pending_) pending.push_back(tasks_[i]);

        const auto decision = agent_.decide(pending, resources_, now_);
        if (decision.pairs.empty()) return;

        agent::RoundLog log{now_, {}, agent_.last_fp_hash()};
        for (const auto& pair : decision.pairs) {
            const std::size_t i = pair.task.value;
            const std::size_t j = pair.resource.value;
            Resource& res = resources_[j];
            if (config_.policy == agent::Policy::latency_optimized) {
                const auto samples = net::probe(topology_, tasks_[i].applicant, res.rid,
                                                config_.probe_count, now_, probe_rng_);
                if (!agent_.observe_probe(tasks_[i].applicant, res, samples, now_)) {
                    schedule_reprobe(j);
                    continue;
                }
            } else if (topology_.is_failed(res.rid, now_)) {
                // The request goes unanswered; the task stays pending.
                continue;
            }
            commit(i, j);
            log.pairs.push_back(pair);
        }
        if (!log.pairs.empty()) metrics_.rounds.push_back(std::move(log));
    }

    void commit(std::size_t i, std::size_t j) {
        const Task& task = tasks_[i];
        Resource& res = resources_[j];
        ++metrics_.audit.commits;
        if (!feasible(task, res, now_)) {
            violation("task " + std::to_string(i) + " committed infeasibly to resource " +
                      std::to_string(j) + " at " + text::format_double(now_));
        }
        const SimTime start = std::max(now_, res.start_time);
        if (start < busy_until_[j]) {
            violation("resource " + std::to_string(j) + " double-booked at " +
                      text::format_double(start));
        }
        const double one_way = topology_.base_latency(task.applicant, res.rid);
        const SimTime done = start + task.length / res.cpu + 2.0 * one_way;
        busy_until_[j] = done;
        res.start_time = done;
        res.workload_ref = done - now_;

        auto& out = metrics_.per_task[i];
        out.allocated_at = now_;
        out.completed_at = done;
        out.resource = res.rid;
        ++metrics_.allocation_count;
        pending_.erase(std::find(pending_.begin(), pending_.end(), i));
        push(done, EventKind::completion, i);
    }

    void reject(std::size_t i) { metrics_.per_task[i].fate = Fate::rejected; }

    void finish() {
        double total = 0.0;
        for (auto& out : metrics_.per_task) {
            switch (out.fate) {
                case Fate::finished:
                    ++metrics_.finished_count;
                    total += out.response_time;
                    break;
                case Fate::rejected: ++metrics_.rejection_count; break;
                case Fate::pending:
                    // Cut off by the horizon before finishing.
                    out.completed_at.reset();
                    ++metrics_.pending_count;
                    break;
            }
        }
        if (metrics_.finished_count > 0) {
            metrics_.mean_response_time = total / static_cast<double>(metrics_.finished_count);
        }
        const auto accounted =
            metrics_.finished_count + metrics_.rejection_count + metrics_.pending_count;
        if (accounted != tasks_.size()) {
            violation("task conservation: " + std::to_string(accounted) + " accounted of " +
                      std::to_string(tasks_.size()));
        }
    }

    const SimConfig& config_;
    const net::Topology& topology_;
    std::vector<Resource> resources_;
    std::vector<Task> tasks_;
    agent::ResourceAgent agent_;
    Rng probe_rng_;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t next_seq_ = 0;
    SimTime now_ = 0.0;
    std::vector<std::size_t> pending_;  // task indices in arrival order
    std::vector<SimTime> busy_until_;
    std::vector<bool> reprobe_scheduled_;
    RunMetrics metrics_;
};

}  // namespace

void SimConfig::validate() const {
    if (num_tasks == 0) invalid("num_tasks", "0", "must be >= 1");
    if (num_resources == 0) invalid("num_resources", "0", "must be >= 1");
    if (num_applicants == 0) invalid("num_applicants", "0", "must be >= 1");
    check_range("length_range", length_range, 1e-300);
    if (!(arrival_rate > 0.0 && std::isfinite(arrival_rate))) {
        invalid("arrival_rate", text::format_double(arrival_rate), "must be > 0");
    }
    bid_params.validate();
    blend_params.validate();
    if (!(sigma > 0.0)) invalid("sigma", text::format_double(sigma), "must be > 0");
    check_range("latency_range", latency_range, 0.0);
    if (!(jitter >= 0.0 && jitter <= 1.0)) {
        invalid("jitter", text::format_double(jitter), "must be in [0, 1]");
    }
    if (probe_count == 0) invalid("probe_count", "0", "must be >= 1");
    check_range("cpu_range", cpu_range, 1e-300);
    check_range("low_price_range", low_price_range, 1e-300);
    check_range("high_price_factor", high_price_factor, 1.0);
    if (!(max_wait >= 0.0)) invalid("max_wait", text::format_double(max_wait), "must be >= 0");
    if (!(horizon >= 0.0)) invalid("horizon", text::format_double(horizon), "must be >= 0");
    for (const auto& w : failures) {
        if (w.resource.value >= num_resources) {
            invalid("failures", std::to_string(w.resource.value), "names an unknown resource");
        }
        if (!(w.fail_at < w.recover_at)) {
            invalid("failures", text::format_double(w.fail_at), "needs fail_at < recover_at");
        }
    }
}

std::vector<std::string> SimConfig::warnings() const {
    std::vector<std::string> out;
    if (bid_params.alpha_w + bid_params.beta_w != 1.0) {
        out.push_back("alpha_w + beta_w = " +
                      text::format_double(bid_params.alpha_w + bid_params.beta_w) +
                      " (bids are not renormalised)");
    }
    if (num_tasks < 100 || num_tasks > 1000) {
        out.push_back("num_tasks = " + std::to_string(num_tasks) +
                      " is outside the reference range [100, 1000]");
    }
    if (num_resources < 30 || num_resources > 50) {
        out.push_back("num_resources = " + std::to_string(num_resources) +
                      " is outside the reference range [30, 50]");
    }
    return out;
}

std::vector<Resource> generate_resources(const SimConfig& config, Rng& rng) {
    std::vector<Resource> fleet(config.num_resources);
    for (std::size_t j = 0; j < fleet.size(); ++j) {
        auto& r = fleet[j];
        r.rid = ResourceId{static_cast<std::uint32_t>(j)};
        r.cpu = rng.uniform(config.cpu_range.first, config.cpu_range.second);
        r.low_price = rng.uniform(config.low_price_range.first, config.low_price_range.second);
        r.high_price = r.low_price *
                       rng.uniform(config.high_price_factor.first, config.high_price_factor.second);
    }
    return fleet;
}

std::vector<Task> generate_workload(const SimConfig& config,
                                    const std::vector<Resource>& resources, Rng& rng) {
    if (resources.empty()) throw Error("workload generation needs a non-empty fleet");
    const double mean_cpu = mean_of(resources, &Resource::cpu);
    const double mean_lp = mean_of(resources, &Resource::low_price);
    const double mean_hp = mean_of(resources, &Resource::high_price);

    std::vector<Task> tasks(config.num_tasks);
    SimTime clock = 0.0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        auto& t = tasks[i];
        t.tid = TaskId{static_cast<std::uint32_t>(i)};
        clock += rng.exponential(config.arrival_rate);
        t.arrival_time = clock;
        t.length = rng.uniform(config.length_range.first, config.length_range.second);
        t.deadline = clock + rng.uniform(t.length / (1.1 * mean_cpu), t.length / (0.9 * mean_cpu));
        t.budget = t.length * rng.uniform(0.9 * mean_lp, 1.1 * mean_hp);
        t.applicant = ApplicantId{static_cast<std::uint32_t>(rng.below(config.num_applicants))};
        t.max_wait = config.max_wait > 0.0 ? config.max_wait : t.deadline - t.arrival_time;
        t.remaining_resource_cap = resources.size();
    }
    return tasks;
}

net::Topology make_topology(const SimConfig& config) {
    Rng rng(derive_seed(config.seed, Stream::topology));
    return net::generate_topology(config.num_applicants, config.num_resources,
                                  config.latency_range, config.jitter, rng, config.failures);
}

RunMetrics run_scripted(const SimConfig& config, const net::Topology& topology,
                        std::vector<Resource> resources, std::vector<Task> tasks) {
    config.validate();
    return Engine(config, topology, std::move(resources), std::move(tasks)).run();
}

RunMetrics run(const SimConfig& config, const net::Topology& topology) {
    config.validate();
    if (topology.applicants() != config.num_applicants ||
        topology.resources() != config.num_resources) {
        throw Error("topology is " + std::to_string(topology.applicants()) + "x" +
                    std::to_string(topology.resources()) + " but the scenario needs " +
                    std::to_string(config.num_applicants) + "x" +
                    std::to_string(config.num_resources));
    }
    Rng fleet_rng(derive_seed(config.seed, Stream::resources));
    auto resources = generate_resources(config, fleet_rng);
    Rng workload_rng(derive_seed(config.seed, Stream::workload));
    auto tasks = generate_workload(config, resources, workload_rng);
    return Engine(config, topology, std::move(resources), std::move(tasks)).run();
}

RunMetrics run(const SimConfig& config) {
    config.validate();
    return run(config, make_topology(config));
}

Comparison compare(const SimConfig& first, const SimConfig& second, std::size_t replications,
                   std::size_t jobs) {
    if (first.seed != second.seed) throw Error("paired comparison needs identical root seeds");
    Comparison out;
    out.runs.resize(replications);
    parallel_for(replications, jobs, [&](std::size_t r) {
        const std::uint64_t seed = derive_seed(first.seed, r);
        SimConfig a = first;
        SimConfig b = second;
        a.seed = seed;
        b.seed = seed;
        auto& row = out.runs[r];
        row.replication = r;
        row.seed = seed;
        row.first_mean = run(a).mean_response_time;
        row.second_mean = run(b).mean_response_time;
        row.ratio = row.first_mean > 0.0 ? row.second_mean / row.first_mean : 1.0;
    });
    if (replications > 0) {
        double wins = 0.0;
        double ratio_sum = 0.0;
        for (const auto& row : out.runs) {
            if (row.second_mean < row.first_mean) wins += 1.0;
            ratio_sum += row.ratio;
        }
        out.win_rate = wins / static_cast<double>(replications);
        out.mean_ratio = ratio_sum / static_cast<double>(replications);
    }
    return out;
}

std::string to_string(agent::Policy policy) {
    return policy == agent::Policy::baseline ? "baseline" : "lo";
}

agent::Policy parse_policy(const std::string& name) {
    if (name == "baseline") return agent::Policy::baseline;
    if (name == "lo" || name == "latency_optimized") return agent::Policy::latency_optimized;
    throw Error("unknown policy '" + name + "' (expected baseline or lo)");
}

}  // namespace latalloc::sim
