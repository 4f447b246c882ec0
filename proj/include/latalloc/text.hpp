#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace latalloc::text {

/// Shortest decimal form that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

/// Strict parse of the whole string; throws Error on trailing garbage.
[[nodiscard]] double parse_double(std::string_view s);
[[nodiscard]] std::uint64_t parse_u64(std::string_view s);

[[nodiscard]] std::string_view trim(std::string_view s);

/// Splits on `sep` and trims each piece. Empty input gives an empty list.
[[nodiscard]] std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace latalloc::text
