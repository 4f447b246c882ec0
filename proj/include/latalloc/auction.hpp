#pragma once

#include <cstddef>
#include <span>

#include "latalloc/model.hpp"

namespace latalloc::auction {

/// Shape and weights of the applicant bid curves.
///
/// `alpha` and `beta` are curve exponents (entered as 1/alpha, 1/beta): values
/// above 1 make the bid rise quickly towards the unit budget, values below 1
/// keep it near the fleet mean low price for longer. `alpha_w` and `beta_w`
/// weight the scarcity bid and the time-pressure bid in the combined bid. The
/// weights are not renormalised.
struct BidParams {
    double alpha = 1.0;
    double beta = 1.0;
    double alpha_w = 0.5;
    double beta_w = 0.5;

    /// Throws Error naming the offending field.
    void validate() const;
};

struct Bid {
    TaskId task_id;
    double bid_resource = 0.0;
    double bid_time = 0.0;
    double combined = 0.0;
};

/// Mean low price over the available resources in the list.
/// Throws Error("no resources remaining") when none is available.
[[nodiscard]] double mean_low_price(std::span<const Resource> resources);

/// Scarcity bid: moves from `mean_lp` (all `task.remaining_resource_cap`
/// resources still open) to the task's unit budget (none left).
[[nodiscard]] double bid_resource(const Task& task, std::size_t remaining, double mean_lp,
                                  double alpha);

/// Sum of the non-negative remaining times over the available `resources`,
/// divided by the task's remaining resource cap. Negative remaining times
/// contribute nothing.
[[nodiscard]] double mean_remaining_time(const Task& task, std::span<const Resource> resources,
                                         SimTime now);

/// Time-pressure bid: the unit budget when no time remains on average, the
/// fleet mean low price once the average reaches `task.max_wait`. The average
/// is clamped to [0, max_wait].
[[nodiscard]] double bid_time(const Task& task, double mean_rt, double mean_lp, double beta);

[[nodiscard]] double combined_bid(double bid_resource, double bid_time, const BidParams& params);

/// Price of a resource given its current backlog relative to the backlog right
/// after its last allocation. An idle resource (no reference workload) is
/// priced at its low price.
[[nodiscard]] double resource_price(const Resource& resource, SimTime now, double sigma);

/// Clearing price: midpoint of the richest bid and the cheapest price.
[[nodiscard]] double final_price(double best_bid, double cheapest_price);

/// All three bid components for one task.
[[nodiscard]] Bid make_bid(const Task& task, std::span<const Resource> resources,
                           std::size_t remaining, SimTime now, const BidParams& params);

}  // namespace latalloc::auction
