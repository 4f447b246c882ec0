#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace latalloc {

/// Base exception for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Simulation time. All times, work units and currencies are dimensionless reals.
using SimTime = double;

/// Strongly typed integer identifier.
template <class Tag>
struct Id {
    std::uint32_t value{};

    friend constexpr auto operator<=>(Id, Id) = default;
    friend std::ostream& operator<<(std::ostream& os, Id id) { return os << id.value; }
};

using TaskId = Id<struct TaskTag>;
using ResourceId = Id<struct ResourceTag>;
using ApplicantId = Id<struct ApplicantTag>;

/// A resource applicant's unit of work.
struct Task {
    TaskId tid;
    ApplicantId applicant;
    double length = 0.0;   ///< work units
    double budget = 0.0;   ///< currency units for the whole task
    SimTime deadline = 0.0;
    SimTime arrival_time = 0.0;
    std::size_t remaining_resource_cap = 1;  ///< largest number of resources this task may apply to
    SimTime max_wait = 0.0;                  ///< longest acceptable waiting time

    /// Budget per work unit, the quantity compared against resource prices.
    [[nodiscard]] double unit_budget() const { return budget / length; }
};

enum class ResourceStatus { available, quarantined };

/// An owned compute offer.
struct Resource {
    ResourceId rid;
    double cpu = 0.0;            ///< work units per time unit
    SimTime start_time = 0.0;    ///< time at which a new task could begin
    double low_price = 0.0;      ///< currency per work unit
    double high_price = 0.0;     ///< currency per work unit
    SimTime workload_ref = 0.0;  ///< backlog right after the last allocation
    ResourceStatus status = ResourceStatus::available;
    SimTime quarantined_since = 0.0;

    [[nodiscard]] bool available() const { return status == ResourceStatus::available; }
};

/// Throws Error naming the violated field.
void validate(const Task& task);
void validate(const Resource& resource);

/// d - st - l/cpu. The start time is the later of the resource's start time
/// and `now`, since an idle resource cannot begin work in the past. The result
/// may be negative.
[[nodiscard]] double remaining_time(const Task& task, const Resource& resource, SimTime now);

/// True iff the task meets its deadline on the resource, its unit budget covers
/// the resource's lowest price, and the resource is not quarantined.
[[nodiscard]] bool feasible(const Task& task, const Resource& resource, SimTime now);

/// Dense m x n matrix whose entries are finite and lie in [0, 1].
///
/// Used for the allocation matrix P, the latency matrix LC and the blend FP.
/// Row and column sums are not constrained.
class AllocMatrix {
public:
    AllocMatrix() = default;
    AllocMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }

    [[nodiscard]] double operator()(std::size_t row, std::size_t col) const {
        return values_[row * cols_ + col];
    }

    /// Throws Error when the value is not finite or outside [0, 1].
    void set(std::size_t row, std::size_t col, double value);

    [[nodiscard]] const std::vector<double>& values() const { return values_; }

    /// FNV-1a over the raw entry bits, for compact logging of a snapshot.
    [[nodiscard]] std::uint64_t hash() const;

    friend bool operator==(const AllocMatrix&, const AllocMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

}  // namespace latalloc
