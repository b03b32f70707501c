#pragma once

#include <cmath>
#include <cstddef>

namespace riskbandit::detail {

// Products like 0.3 * 10 land a few ulps off an integer; treat those as the
// integer before taking floor/ceil of an order-statistic index.
inline double snap_integer(double x) noexcept {
    const double r = std::round(x);
    return std::abs(x - r) <= 1e-9 * std::fmax(1.0, std::abs(x)) ? r : x;
}

inline std::size_t ceil_index(double x) noexcept {
    return static_cast<std::size_t>(std::ceil(snap_integer(x)));
}

inline std::size_t floor_index(double x) noexcept {
    return static_cast<std::size_t>(std::floor(snap_integer(x)));
}

}  // namespace riskbandit::detail
