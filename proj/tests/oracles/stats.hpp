#pragma once

#include <cmath>
#include <span>

namespace oracle {

/// Single-pass correlation with running co-moments (Welford update).
inline double pearson_one_pass(std::span<const double> x, std::span<const double> y)
{
    double mx = 0, my = 0, cxx = 0, cyy = 0, cxy = 0;
    double n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        n += 1;
        double dx = x[i] - mx;
        double dy = y[i] - my;
        mx += dx / n;
        my += dy / n;
        cxx += dx * (x[i] - mx);
        cyy += dy * (y[i] - my);
        cxy += dx * (y[i] - my);
    }
    if (cxx <= 0 || cyy <= 0) {
        return 0.0;
    }
    return cxy / std::sqrt(cxx * cyy);
}

} // namespace oracle
