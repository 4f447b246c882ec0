#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "latalloc/auction.hpp"
#include "latalloc/model.hpp"

namespace latalloc::agent {

/// Mean probe latency of a pair, or the distinguished unreachable state of a
/// resource that never answered.
class Latency {
public:
    static Latency finite(double value) { return Latency(value, true); }
    static Latency unreachable() { return Latency(0.0, false); }

    [[nodiscard]] bool reachable() const { return reachable_; }
    /// Throws Error when unreachable.
    [[nodiscard]] double value() const;

    friend bool operator==(const Latency&, const Latency&) = default;

private:
    Latency(double value, bool reachable) : value_(value), reachable_(reachable) {}

    double value_;
    bool reachable_;
};

struct LatencyRecord {
    Latency mean_latency = Latency::unreachable();
    std::size_t sample_count = 0;
    SimTime last_probe = 0.0;

    friend bool operator==(const LatencyRecord&, const LatencyRecord&) = default;
};

/// Latency history keyed by (applicant, resource). A pair gets a record the
/// first time it is probed; later probes refine the running mean.
class LatencyTable {
public:
    using Key = std::pair<ApplicantId, ResourceId>;

    /// Folds `samples` into the pair's running mean. A previously unreachable
    /// pair starts over from these samples. Throws Error on an empty list.
    void record_samples(ApplicantId applicant, ResourceId resource,
                        std::span<const double> samples, SimTime now);

    /// Marks the pair unreachable and stamps the probe time.
    void record_unreachable(ApplicantId applicant, ResourceId resource, SimTime now);

    [[nodiscard]] const LatencyRecord* find(ApplicantId applicant, ResourceId resource) const;
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] const std::map<Key, LatencyRecord>& entries() const { return entries_; }

    friend bool operator==(const LatencyTable&, const LatencyTable&) = default;

private:
    std::map<Key, LatencyRecord> entries_;
};

/// Weights of P and LC in the blended matrix, plus the re-probe interval for
/// quarantined resources.
struct BlendParams {
    double theta = 1.0;
    double lambda = 4.0;
    SimTime quarantine_timeout = 50.0;

    void validate() const;
};

struct AllocationPair {
    TaskId task;
    ResourceId resource;
    double clearing_price = 0.0;
    SimTime decided_at = 0.0;

    friend bool operator==(const AllocationPair&, const AllocationPair&) = default;
};

struct Allocation {
    std::vector<AllocationPair> pairs;

    friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Mean of the finite records. Throws Error("latency history empty") when the
/// table holds no finite record.
[[nodiscard]] double alc(const LatencyTable& table);

/// Latency impact in [0, 1]: 1 for a co-located pair, 0 for an unreachable
/// one, 0.5 when the pair sits exactly at the average. Throws when alc <= 0.
[[nodiscard]] double tlc(Latency lc, double alc_value);

/// 0/1 incidence matrix of the greedy matching: applicants by descending bid
/// (then task id), each bound to the cheapest still-free feasible resource
/// (then resource id).
[[nodiscard]] AllocMatrix build_p(std::span<const Task> tasks, std::span<const Resource> resources,
                                  std::span<const auction::Bid> bids,
                                  std::span<const double> prices, SimTime now);

/// Latency impact per pair. Pairs without history get 0.5. When the history
/// carries no latency signal (no finite record, or all finite records are
/// zero) every reachable pair gets 0.5 so the matrix stays uniform.
[[nodiscard]] AllocMatrix build_lc(const LatencyTable& table, std::span<const Task> tasks,
                                   std::span<const Resource> resources);

/// (theta * P + lambda * LC) / (theta + lambda), entrywise.
[[nodiscard]] AllocMatrix build_fp(const AllocMatrix& p, const AllocMatrix& lc,
                                   const BlendParams& params);

/// Walks applicants in descending bid order; each takes the free feasible
/// resource with the highest FP entry (ties: lower price, then lower id).
/// The clearing price is the midpoint of the applicant's bid and the cheapest
/// price among its free feasible resources. Applicants with nothing eligible
/// stay out of the allocation.
[[nodiscard]] Allocation allocate(const AllocMatrix& fp, std::span<const Task> tasks,
                                  std::span<const Resource> resources,
                                  std::span<const auction::Bid> bids,
                                  std::span<const double> prices, SimTime now);

/// Quarantined resources whose latest unanswered probe is at least one
/// timeout old. Falls back to the quarantine timestamp when the table holds no
/// unreachable record for the resource.
[[nodiscard]] std::vector<ResourceId> quarantine_sweep(const LatencyTable& table,
                                                       std::span<const Resource> resources,
                                                       SimTime now, const BlendParams& params);

enum class Policy { baseline, latency_optimized };

/// One allocation round as seen from outside the agent.
struct RoundLog {
    SimTime time = 0.0;
    std::vector<AllocationPair> pairs;
    std::uint64_t fp_hash = 0;

    friend bool operator==(const RoundLog&, const RoundLog&) = default;
};

/// The resource agent: turns pending tasks and resource state into an
/// allocation and keeps the latency history between rounds.
///
/// The baseline policy decides on P alone and never records latencies. The
/// latency-optimised policy blends P with LC from its history.
class ResourceAgent {
public:
    ResourceAgent(Policy policy, auction::BidParams bid_params, BlendParams blend, double sigma);

    /// Bids, prices, P, LC, FP and the resulting allocation for one round.
    /// Returns an empty allocation when no resource is available.
    [[nodiscard]] Allocation decide(std::span<const Task> pending,
                                    std::span<const Resource> resources, SimTime now);

    /// Folds a probe outcome into the history. An unanswered probe
    /// quarantines `resource`; an answered one lifts its quarantine.
    /// Returns true when the resource answered.
    bool observe_probe(ApplicantId applicant, Resource& resource,
                       const std::optional<std::vector<double>>& samples, SimTime now);

    [[nodiscard]] std::vector<ResourceId> due_for_reprobe(std::span<const Resource> resources,
                                                          SimTime now) const;

    /// Applicants holding an unreachable record for `resource`.
    [[nodiscard]] std::vector<ApplicantId> unreachable_applicants(ResourceId resource) const;

    [[nodiscard]] Policy policy() const { return policy_; }
    [[nodiscard]] const BlendParams& blend() const { return blend_; }
    [[nodiscard]] const LatencyTable& table() const { return table_; }
    [[nodiscard]] std::uint64_t last_fp_hash() const { return last_fp_hash_; }

private:
    Policy policy_;
    auction::BidParams bid_params_;
    BlendParams blend_;
    double sigma_;
    LatencyTable table_;
    std::uint64_t last_fp_hash_ = 0;
};

}  // namespace latalloc::agent
