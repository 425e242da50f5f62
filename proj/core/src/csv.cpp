#include "tpg/csv.hpp"

#include "tpg/error.hpp"

namespace tpg::csv {

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double to_double(std::string_view field)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc {} || ptr != field.data() + field.size()) {
        throw DataError("bad number: '" + std::string(field) + "'");
    }
    return v;
}

long long to_int(std::string_view field)
{
    long long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc {} || ptr != field.data() + field.size()) {
        throw DataError("bad integer: '" + std::string(field) + "'");
    }
    return v;
}

} // namespace tpg::csv
