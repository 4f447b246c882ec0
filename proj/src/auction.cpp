#include "latalloc/auction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace latalloc::auction {

void BidParams::validate() const {
    auto fail = [](const std::string& field, double v, const char* rule) {
        throw Error("invalid " + field + " = " + std::to_string(v) + ": " + rule);
    };
    if (!(alpha > 0.0)) fail("alpha", alpha, "must be > 0");
    if (!(beta > 0.0)) fail("beta", beta, "must be > 0");
    if (!(alpha_w >= 0.0 && alpha_w <= 1.0)) fail("alpha_w", alpha_w, "must be in [0, 1]");
    if (!(beta_w >= 0.0 && beta_w <= 1.0)) fail("beta_w", beta_w, "must be in [0, 1]");
    if (!(alpha_w + beta_w > 0.0)) fail("alpha_w + beta_w", alpha_w + beta_w, "must be > 0");
}

double mean_low_price(std::span<const Resource> resources) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : resources) {
        if (!r.available()) continue;
        sum += r.low_price;
        ++count;
    }
    if (count == 0) throw Error("no resources remaining");
    return sum / static_cast<double>(count);
}

double bid_resource(const Task& task, std::size_t remaining, double mean_lp, double alpha) {
    if (remaining > task.remaining_resource_cap) throw Error("remaining exceeds maximum");
    if (!(alpha > 0.0)) throw Error("alpha must be > 0");
    const double open = static_cast<double>(remaining) /
                        static_cast<double>(task.remaining_resource_cap);
    const double weight = std::pow(1.0 - open, 1.0 / alpha);
    return std::lerp(mean_lp, task.unit_budget(), weight);
}

double mean_remaining_time(const Task& task, std::span<const Resource> resources, SimTime now) {
    double sum = 0.0;
    for (const auto& r : resources) {
        if (!r.available()) continue;
        const double rt = remaining_time(task, r, now);
        if (rt >= 0.0) sum += rt;
    }
    return sum / static_cast<double>(task.remaining_resource_cap);
}

double bid_time(const Task& task, double mean_rt, double mean_lp, double beta) {
    if (!(task.max_wait > 0.0)) throw Error("invalid max wait");
    if (!(beta > 0.0)) throw Error("beta must be > 0");
    const double clamped = std::clamp(mean_rt, 0.0, task.max_wait);
    const double weight = std::pow(1.0 - clamped / task.max_wait, 1.0 / beta);
    return std::lerp(mean_lp, task.unit_budget(), weight);
}

double combined_bid(double bid_resource, double bid_time, const BidParams& params) {
    return params.alpha_w * bid_resource + params.beta_w * bid_time;
}

double resource_price(const Resource& resource, SimTime now, double sigma) {
    if (!(sigma > 0.0)) throw Error("sigma must be > 0");
    if (!(resource.workload_ref > 0.0)) return resource.low_price;
    const double backlog = std::max(0.0, resource.start_time - now);
    const double load = std::min(1.0, backlog / resource.workload_ref);
    return std::lerp(resource.low_price, resource.high_price, std::pow(load, 1.0 / sigma));
}

double final_price(double best_bid, double cheapest_price) {
    return std::midpoint(best_bid, cheapest_price);
}

Bid make_bid(const Task& task, std::span<const Resource> resources, std::size_t remaining,
             SimTime now, const BidParams& params) {
    const double mean_lp = mean_low_price(resources);
    Bid bid;
    bid.task_id = task.tid;
    bid.bid_resource = bid_resource(task, remaining, mean_lp, params.alpha);
    bid.bid_time = bid_time(task, mean_remaining_time(task, resources, now), mean_lp, params.beta);
    bid.combined = combined_bid(bid.bid_resource, bid.bid_time, params);
    return bid;
}

}  // namespace latalloc::auction
