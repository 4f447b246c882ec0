#include "latalloc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace latalloc {

double Rng::uniform(double lo, double hi) {
    if (lo == hi) return lo;
    return std::min(hi, lo + (hi - lo) * uniform());
}

double Rng::exponential(double rate) {
    // 1 - u lies in (0, 1], so the log is finite.
    return -std::log1p(-uniform()) / rate;
}

std::uint64_t Rng::below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

}  // namespace latalloc
