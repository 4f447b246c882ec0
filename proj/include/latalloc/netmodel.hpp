#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "latalloc/model.hpp"
#include "latalloc/rng.hpp"

namespace latalloc::net {

/// A resource is failed on [fail_at, recover_at).
struct FailureWindow {
    ResourceId resource;
    SimTime fail_at = 0.0;
    SimTime recover_at = 0.0;

    friend bool operator==(const FailureWindow&, const FailureWindow&) = default;
};

/// Ground-truth network between applicants and resources.
///
/// Latencies are one-way; a round trip costs twice the base latency.
class Topology {
public:
    Topology() = default;

    /// `base_latency` is row-major, applicants x resources. Throws Error on a
    /// negative latency, jitter outside [0, 1], or an empty failure window.
    Topology(std::size_t applicants, std::size_t resources, std::vector<double> base_latency,
             double jitter, std::vector<FailureWindow> failures = {});

    [[nodiscard]] std::size_t applicants() const { return applicants_; }
    [[nodiscard]] std::size_t resources() const { return resources_; }
    [[nodiscard]] double jitter() const { return jitter_; }
    [[nodiscard]] const std::vector<FailureWindow>& failures() const { return failures_; }

    /// Throws Error for a pair outside the topology.
    [[nodiscard]] double base_latency(ApplicantId applicant, ResourceId resource) const;

    [[nodiscard]] bool is_failed(ResourceId resource, SimTime now) const;

    friend bool operator==(const Topology&, const Topology&) = default;

private:
    std::size_t applicants_ = 0;
    std::size_t resources_ = 0;
    std::vector<double> base_latency_;
    double jitter_ = 0.0;
    std::vector<FailureWindow> failures_;
};

/// Sends `count` acknowledge packets and returns their latencies, or nullopt
/// when the resource is failed at `now` and nothing comes back.
///
/// Each sample is base * (1 + u) with u uniform on [-jitter, +jitter].
[[nodiscard]] std::optional<std::vector<double>> probe(const Topology& topology,
                                                       ApplicantId applicant, ResourceId resource,
                                                       std::size_t count, SimTime now, Rng& rng);

/// Draws every pair's base latency uniformly from [lo, hi].
[[nodiscard]] Topology generate_topology(std::size_t applicants, std::size_t resources,
                                         std::pair<double, double> latency_range, double jitter,
                                         Rng& rng, std::vector<FailureWindow> failures = {});

/// A topology together with the replication seed of the run that produced it.
struct TopologyArchive {
    std::uint64_t seed = 0;
    Topology topology;
};

/// Line-oriented text form. Doubles are written in shortest round-trip form so
/// a reload is bit-identical.
void write_topology(std::ostream& os, const TopologyArchive& archive);

/// Throws Error with a line number on malformed input.
[[nodiscard]] TopologyArchive read_topology(std::istream& is);

}  // namespace latalloc::net
