#pragma once

#include <cstdint>
#include <random>

namespace latalloc {

/// SplitMix64 finaliser. Bijective, so distinct inputs give distinct outputs.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Child seed for stream `stream` under `parent`.
///
/// Seeds form a tree: root -> replication -> component streams. A child only
/// depends on its parent and its own index, so adding streams or sweep points
/// never shifts existing ones.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
    return splitmix64(parent ^ splitmix64(stream));
}

/// Per-replication component streams.
enum class Stream : std::uint64_t { topology = 1, resources = 2, workload = 3, probes = 4 };

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t parent, Stream stream) {
    return derive_seed(parent, static_cast<std::uint64_t>(stream));
}

/// mt19937_64 with distribution code written out here, because the standard
/// distributions are implementation-defined and would break cross-platform
/// reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi]; returns `lo` exactly when lo == hi.
    double uniform(double lo, double hi);

    /// Exponential with the given rate (mean 1/rate).
    double exponential(double rate);

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace latalloc
