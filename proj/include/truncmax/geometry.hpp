#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "truncmax/errors.hpp"

namespace truncmax {

// ---------------------------------------------------------------- volumes --

/// Volume of the Euclidean unit ball in R^n, exact closed form, 1 <= n <= 8.
inline double ball_volume(int n) {
    constexpr double pi = std::numbers::pi;
    switch (n) {
        case 1: return 2.0;
        case 2: return pi;
        case 3: return 4.0 * pi / 3.0;
        case 4: return pi * pi / 2.0;
        case 5: return 8.0 * pi * pi / 15.0;
        case 6: return pi * pi * pi / 6.0;
        case 7: return 16.0 * pi * pi * pi / 105.0;
        case 8: return pi * pi * pi * pi / 24.0;
        default:
            throw invalid_argument("ball_volume: dimension must be in [1, 8], got " +
                                   std::to_string(n));
    }
}

/// Surface area of the unit sphere S^{n-1}; equals n * ball_volume(n).
inline double sphere_surface_area(int n) { return static_cast<double>(n) * ball_volume(n); }

struct DimensionConstants {
    int n;
    double ball_volume;
    double sphere_surface_area;
};

inline DimensionConstants dimension_constants(int n) {
    return DimensionConstants{n, ball_volume(n), sphere_surface_area(n)};
}

// ----------------------------------------------------------------- series --

namespace detail {

/// Exact binomial coefficient for the small n used here.
inline std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// sum_{i=0}^{n-2} C(n-1,i) x^{n-i-1} [ 1/((i+1-n) b^{n-i-1}) - 1/((i+1-n) a^{n-i-1}) ],
// the closed form of int_a^b n (r+x)^{n-1} / r^n dr - n ln(b/a), up to the factor n.
inline double radial_correction_series(double x, double a, double b, int n) {
    double acc = 0.0;
    for (int i = 0; i <= n - 2; ++i) {
        const int p = n - i - 1;  // power of x, from n-1 down to 1
        const double c = static_cast<double>(binomial(n - 1, i));
        const double xp = std::pow(x, p);
        const double denom = static_cast<double>(i + 1 - n);  // negative
        acc += c * xp / (denom * std::pow(b, p)) - c * xp / (denom * std::pow(a, p));
    }
    return acc;
}

inline void check_radial_args(double a, double b, int n, const char* who) {
    require(n >= 2, std::string(who) + ": requires dimension n >= 2, got " + std::to_string(n));
    require(std::isfinite(a) && std::isfinite(b) && a > 0.0 && a <= b,
            std::string(who) + ": requires 0 < a <= b");
}

}  // namespace detail

/// Correction series A(s): together with n ln(b/a), the closed form of the
/// annulus integral n int_a^b (r + sqrt(n) s)^{n-1} / r^n dr.  A(0) == 0.
inline double series_a(double s, double a, double b, int n) {
    detail::check_radial_args(a, b, n, "series_a");
    detail::require(std::isfinite(s) && s >= 0.0, "series_a: requires s >= 0");
    return detail::radial_correction_series(std::sqrt(static_cast<double>(n)) * s, a, b, n);
}

/// Correction series B(m): the A-series with sqrt(n) s replaced by -1/m, the
/// closed form companion of n int_a^b (r - 1/m)^{n-1} / r^n dr.  m may be
/// +infinity, in which case the series vanishes.
inline double series_b(double m, double a, double b, int n) {
    detail::check_radial_args(a, b, n, "series_b");
    detail::require(!(m <= 0.0) && !std::isnan(m), "series_b: requires m > 0");
    return detail::radial_correction_series(-1.0 / m, a, b, n);
}

}  // namespace truncmax
