#include "latalloc/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace latalloc {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(what);
}

}  // namespace

void validate(const Task& task) {
    const auto id = std::to_string(task.tid.value);
    require(task.length > 0.0, "task " + id + ": length must be > 0");
    require(task.budget > 0.0, "task " + id + ": budget must be > 0");
    require(task.deadline > task.arrival_time, "task " + id + ": deadline must follow arrival");
    require(task.remaining_resource_cap >= 1, "task " + id + ": remaining_resource_cap must be >= 1");
    require(task.max_wait > 0.0, "task " + id + ": max_wait must be > 0");
}

void validate(const Resource& resource) {
    const auto id = std::to_string(resource.rid.value);
    require(resource.cpu > 0.0, "resource " + id + ": cpu must be > 0");
    require(resource.low_price > 0.0, "resource " + id + ": low_price must be > 0");
    require(resource.low_price <= resource.high_price,
            "resource " + id + ": low_price must not exceed high_price");
    require(resource.workload_ref >= 0.0, "resource " + id + ": workload_ref must be >= 0");
}

double remaining_time(const Task& task, const Resource& resource, SimTime now) {
    const SimTime start = std::max(resource.start_time, now);
    return task.deadline - start - task.length / resource.cpu;
}

bool feasible(const Task& task, const Resource& resource, SimTime now) {
    return remaining_time(task, resource, now) >= 0.0 &&
           task.unit_budget() >= resource.low_price && resource.available();
}

AllocMatrix::AllocMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
    require(std::isfinite(fill) && fill >= 0.0 && fill <= 1.0, "matrix fill outside [0, 1]");
}

void AllocMatrix::set(std::size_t row, std::size_t col, double value) {
    require(row < rows_ && col < cols_, "matrix index out of range");
    require(std::isfinite(value) && value >= 0.0 && value <= 1.0,
            "matrix entry outside [0, 1]: " + std::to_string(value));
    values_[row * cols_ + col] = value;
}

std::uint64_t AllocMatrix::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t word) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (word >> (8 * byte)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    mix(rows_);
    mix(cols_);
    for (double v : values_) mix(std::bit_cast<std::uint64_t>(v));
    return h;
}

}  // namespace latalloc
