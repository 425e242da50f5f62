#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace tpg::csv {

/// Shortest text that round-trips to the same double.
inline std::string number(double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string_view> split(std::string_view line, char sep = ',');
double to_double(std::string_view field);
long long to_int(std::string_view field);

} // namespace tpg::csv
