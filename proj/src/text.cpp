#include "latalloc/text.hpp"

#include <charconv>
#include <system_error>

#include "latalloc/model.hpp"

namespace latalloc::text {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    s = trim(s);
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
        throw Error("not a number: '" + std::string(s) + "'");
    }
    return value;
}

std::uint64_t parse_u64(std::string_view s) {
    s = trim(s);
    std::uint64_t value = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
        throw Error("not a non-negative integer: '" + std::string(s) + "'");
    }
    return value;
}

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    if (trim(s).empty()) return out;
    std::size_t begin = 0;
    while (true) {
        const auto pos = s.find(sep, begin);
        out.push_back(trim(s.substr(begin, pos == std::string_view::npos ? pos : pos - begin)));
        if (pos == std::string_view::npos) break;
        begin = pos + 1;
    }
    return out;
}

}  // namespace latalloc::text
