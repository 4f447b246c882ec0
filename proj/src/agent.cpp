#include "latalloc/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace latalloc::agent {

namespace {

constexpr double kNeutralPrior = 0.5;

void check_round_inputs(std::span<const Task> tasks, std::span<const Resource> resources,
                        std::span<const auction::Bid> bids, std::span<const double> prices) {
    if (bids.size() != tasks.size()) {
        throw Error("dimension mismatch: " + std::to_string(bids.size()) + " bids for " +
                    std::to_string(tasks.size()) + " tasks");
    }
    if (prices.size() != resources.size()) {
        throw Error("dimension mismatch: " + std::to_string(prices.size()) + " prices for " +
                    std::to_string(resources.size()) + " resources");
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (bids[i].task_id != tasks[i].tid) throw Error("bids not aligned with tasks");
    }
}

// Applicant order shared by build_p and allocate: richest first, then task id.
std::vector<std::size_t> applicant_order(std::span<const Task> tasks,
                                         std::span<const auction::Bid> bids) {
    std::vector<std::size_t> order(tasks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (bids[a].combined != bids[b].combined) return bids[a].combined > bids[b].combined;
        return tasks[a].tid < tasks[b].tid;
    });
    return order;
}

// True when resource a ranks before resource b: cheaper first, then lower id.
bool cheaper(std::span<const Resource> resources, std::span<const double> prices, std::size_t a,
             std::size_t b) {
    if (prices[a] != prices[b]) return prices[a] < prices[b];
    return resources[a].rid < resources[b].rid;
}

}  // namespace

double Latency::value() const {
    if (!reachable_) throw Error("latency is unreachable");
    return value_;
}

void LatencyTable::record_samples(ApplicantId applicant, ResourceId resource,
                                  std::span<const double> samples, SimTime now) {
    if (samples.empty()) throw Error("no latency samples");
    auto& rec = entries_[{applicant, resource}];
    if (!rec.mean_latency.reachable()) rec.sample_count = 0;
    double mean = rec.sample_count == 0 ? 0.0 : rec.mean_latency.value();
    // Incremental mean: exact when every sample equals the current mean.
    for (double s : samples) {
        ++rec.sample_count;
        mean += (s - mean) / static_cast<double>(rec.sample_count);
    }
    rec.mean_latency = Latency::finite(mean);
    rec.last_probe = now;
}

void LatencyTable::record_unreachable(ApplicantId applicant, ResourceId resource, SimTime now) {
    auto& rec = entries_[{applicant, resource}];
    rec.mean_latency = Latency::unreachable();
    rec.sample_count = std::max<std::size_t>(rec.sample_count, 1);
    rec.last_probe = now;
}

const LatencyRecord* LatencyTable::find(ApplicantId applicant, ResourceId resource) const {
    const auto it = entries_.find({applicant, resource});
    return it == entries_.end() ? nullptr : &it->second;
}

void BlendParams::validate() const {
    if (!(theta >= 0.0)) throw Error("invalid theta = " + std::to_string(theta) + ": must be >= 0");
    if (!(lambda >= 0.0)) {
        throw Error("invalid lambda = " + std::to_string(lambda) + ": must be >= 0");
    }
    if (!(theta + lambda > 0.0)) throw Error("invalid theta + lambda: must be > 0");
    if (!(quarantine_timeout > 0.0)) {
        throw Error("invalid quarantine_timeout = " + std::to_string(quarantine_timeout) +
                    ": must be > 0");
    }
}

double alc(const LatencyTable& table) {
    double mean = 0.0;
    std::size_t count = 0;
    for (const auto& [key, rec] : table.entries()) {
        if (!rec.mean_latency.reachable()) continue;
        ++count;
        mean += (rec.mean_latency.value() - mean) / static_cast<double>(count);
    }
    if (count == 0) throw Error("latency history empty");
    return mean;
}

double tlc(Latency lc, double alc_value) {
    if (!(alc_value > 0.0)) throw Error("average latency must be > 0");
    if (!lc.reachable()) return 0.0;
    const double v = lc.value();
    return 1.0 - v / (v + alc_value);
}

AllocMatrix build_p(std::span<const Task> tasks, std::span<const Resource> resources,
                    std::span<const auction::Bid> bids, std::span<const double> prices,
                    SimTime now) {
    check_round_inputs(tasks, resources, bids, prices);
    std::vector<std::size_t> by_price(resources.size());
    std::iota(by_price.begin(), by_price.end(), std::size_t{0});
    std::sort(by_price.begin(), by_price.end(),
              [&](std::size_t a, std::size_t b) { return cheaper(resources, prices, a, b); });

    AllocMatrix p(tasks.size(), resources.size());
    std::vector<bool> taken(resources.size(), false);
    for (std::size_t i : applicant_order(tasks, bids)) {
        for (std::size_t j : by_price) {
            if (taken[j] || !feasible(tasks[i], resources[j], now)) continue;
            taken[j] = true;
            p.set(i, j, 1.0);
            break;
        }
    }
    return p;
}

AllocMatrix build_lc(const LatencyTable& table, std::span<const Task> tasks,
                     std::span<const Resource> resources) {
    std::optional<double> average;
    try {
        const double a = alc(table);
        if (a > 0.0) average = a;
    } catch (const Error&) {
        // No finite history: nothing to normalise against.
    }

    AllocMatrix lc(tasks.size(), resources.size(), kNeutralPrior);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        for (std::size_t j = 0; j < resources.size(); ++j) {
            const auto* rec = table.find(tasks[i].applicant, resources[j].rid);
            if (rec == nullptr) continue;
            if (!rec->mean_latency.reachable()) {
                lc.set(i, j, 0.0);
            } else if (average) {
                lc.set(i, j, tlc(rec->mean_latency, *average));
            }
        }
    }
    return lc;
}

AllocMatrix build_fp(const AllocMatrix& p, const AllocMatrix& lc, const BlendParams& params) {
    if (p.rows() != lc.rows() || p.cols() != lc.cols()) {
        throw Error("dimension mismatch between P and LC");
    }
    if (!(params.theta >= 0.0 && params.lambda >= 0.0 && params.theta + params.lambda > 0.0)) {
        throw Error("blend weights must be >= 0 with a positive sum");
    }
    const double total = params.theta + params.lambda;
    AllocMatrix fp(p.rows(), p.cols());
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j) {
            const double v = (params.theta * p(i, j) + params.lambda * lc(i, j)) / total;
            // Rounding may push a convex combination a hair outside its endpoints.
            fp.set(i, j, std::clamp(v, std::min(p(i, j), lc(i, j)), std::max(p(i, j), lc(i, j))));
        }
    }
    return fp;
}

Allocation allocate(const AllocMatrix& fp, std::span<const Task> tasks,
                    std::span<const Resource> resources, std::span<const auction::Bid> bids,
                    std::span<const double> prices, SimTime now) {
    check_round_inputs(tasks, resources, bids, prices);
    if (fp.rows() != tasks.size() || fp.cols() != resources.size()) {
        throw Error("dimension mismatch between FP and the round");
    }

    Allocation out;
    std::vector<bool> taken(resources.size(), false);
    for (std::size_t i : applicant_order(tasks, bids)) {
        std::optional<std::size_t> best;
        std::optional<std::size_t> cheapest;
        for (std::size_t j = 0; j < resources.size(); ++j) {
            if (taken[j] || !feasible(tasks[i], resources[j], now)) continue;
            if (!cheapest || cheaper(resources, prices, j, *cheapest)) cheapest = j;
            if (!best || fp(i, j) > fp(i, *best) ||
                (fp(i, j) == fp(i, *best) && cheaper(resources, prices, j, *best))) {
                best = j;
            }
        }
        if (!best) continue;
        taken[*best] = true;
        out.pairs.push_back({tasks[i].tid, resources[*best].rid,
                             auction::final_price(bids[i].combined, prices[*cheapest]), now});
    }
    return out;
}

std::vector<ResourceId> quarantine_sweep(const LatencyTable& table,
                                         std::span<const Resource> resources, SimTime now,
                                         const BlendParams& params) {
    std::vector<ResourceId> due;
    for (const auto& r : resources) {
        if (r.available()) continue;
        std::optional<SimTime> last;
        for (const auto& [key, rec] : table.entries()) {
            if (key.second != r.rid || rec.mean_latency.reachable()) continue;
            last = last ? std::max(*last, rec.last_probe) : rec.last_probe;
        }
        // Same expression the caller uses to schedule the re-probe, so an
        // event fired at that instant is never a rounding error short.
        if (now >= last.value_or(r.quarantined_since) + params.quarantine_timeout) {
            due.push_back(r.rid);
        }
    }
    return due;
}

ResourceAgent::ResourceAgent(Policy policy, auction::BidParams bid_params, BlendParams blend,
                             double sigma)
    : policy_(policy), bid_params_(bid_params), blend_(blend), sigma_(sigma) {
    bid_params_.validate();
    blend_.validate();
    if (!(sigma_ > 0.0)) throw Error("invalid sigma = " + std::to_string(sigma_) + ": must be > 0");
}

Allocation ResourceAgent::decide(std::span<const Task> pending,
                                 std::span<const Resource> resources, SimTime now) {
    if (pending.empty() || std::none_of(resources.begin(), resources.end(),
                                        [](const Resource& r) { return r.available(); })) {
        return {};
    }

    std::vector<auction::Bid> bids;
    bids.reserve(pending.size());
    for (const auto& task : pending) {
        const auto open = static_cast<std::size_t>(
            std::count_if(resources.begin(), resources.end(),
                          [&](const Resource& r) { return feasible(task, r, now); }));
        bids.push_back(auction::make_bid(task, resources,
                                         std::min(open, task.remaining_resource_cap), now,
                                         bid_params_));
    }
    std::vector<double> prices;
    prices.reserve(resources.size());
    for (const auto& r : resources) prices.push_back(auction::resource_price(r, now, sigma_));

    const AllocMatrix p = build_p(pending, resources, bids, prices, now);
    AllocMatrix fp;
    if (policy_ == Policy::baseline) {
        fp = p;
    } else {
        fp = build_fp(p, build_lc(table_, pending, resources), blend_);
    }
    last_fp_hash_ = fp.hash();
    return allocate(fp, pending, resources, bids, prices, now);
}

bool ResourceAgent::observe_probe(ApplicantId applicant, Resource& resource,
                                  const std::optional<std::vector<double>>& samples,
                                  SimTime now) {
    if (!samples) {
        table_.record_unreachable(applicant, resource.rid, now);
        if (resource.available()) {
            resource.status = ResourceStatus::quarantined;
            resource.quarantined_since = now;
        }
        return false;
    }
    table_.record_samples(applicant, resource.rid, *samples, now);
    resource.status = ResourceStatus::available;
    return true;
}

std::vector<ResourceId> ResourceAgent::due_for_reprobe(std::span<const Resource> resources,
                                                       SimTime now) const {
    return quarantine_sweep(table_, resources, now, blend_);
}

std::vector<ApplicantId> ResourceAgent::unreachable_applicants(ResourceId resource) const {
    std::vector<ApplicantId> out;
    for (const auto& [key, rec] : table_.entries()) {
        if (key.second == resource && !rec.mean_latency.reachable()) out.push_back(key.first);
    }
    return out;
}

}  // namespace latalloc::agent
