#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "truncmax/errors.hpp"
#include "truncmax/geometry.hpp"
#include "truncmax/params.hpp"

namespace truncmax {

// -------------------------------------------------------- operator norms --

/// Sharp L1 operator norm: prod_i (1 + n_i ln(b_i / a_i)).  Specializes to
/// 1 + n ln(b/a) for the scalar kind and prod (1 + ln(b_i/a_i)) for strong.
inline double sharp_l1_norm(const TruncationParams& p) {
    double v = 1.0;
    for (const auto& f : p.factors) v *= 1.0 + f.dim * std::log(f.b / f.a);
    return v;
}

/// Elementary covering bound prod_i (b_i / a_i)^{n_i}; always >= the sharp
/// constant, wildly so for large b/a.
inline double crude_upper_bound(const TruncationParams& p) {
    double v = 1.0;
    for (const auto& f : p.factors) v *= std::pow(f.b / f.a, f.dim);
    return v;
}

/// sharp / ln(theta) for the scalar kind; tends to n as theta grows, the
/// logarithmic growth rate of the family.  Requires a < b.
inline double growth_rate_check(const TruncationParams& p) {
    detail::require(p.kind == Kind::scalar, "growth_rate_check: scalar kind only");
    detail::require(p.factors[0].a < p.factors[0].b, "growth_rate_check: requires a < b");
    return sharp_l1_norm(p) / std::log(p.theta());
}

// ------------------------------------------------------ control functions --

/// Piecewise-radial bracketing functions.  Variant upper_u dominates the
/// maximal image of a unit-mass cube of half-side s (support padded outward
/// by sqrt(n_i) s per factor); variant lower_w is dominated by the maximal
/// image of the unit-mass ball of radius 1/m (support pulled inward by 1/m).
struct ControlFunctionSpec {
    enum class Variant { upper_u, lower_w };
    Variant variant = Variant::upper_u;
    TruncationParams params;
    double perturbation = 0.0;  // s for upper_u, m for lower_w (may be +inf)
    double scale = 1.0;         // mass factor; lower_w always uses 1
};

inline ControlFunctionSpec make_control_u(const TruncationParams& p, double s,
                                          double scale = 1.0) {
    detail::require(std::isfinite(s) && s >= 0.0, "make_control_u: requires s >= 0");
    detail::require(std::isfinite(scale) && scale > 0.0, "make_control_u: requires scale > 0");
    return ControlFunctionSpec{ControlFunctionSpec::Variant::upper_u, p, s, scale};
}

inline ControlFunctionSpec make_control_w(const TruncationParams& p, double m) {
    detail::require(!(m <= 0.0) && !std::isnan(m), "make_control_w: requires m > 0");
    for (const auto& f : p.factors)
        detail::require(f.a - 1.0 / m > 0.0,
                        "make_control_w: requires a_i - 1/m > 0 for every factor");
    return ControlFunctionSpec{ControlFunctionSpec::Variant::lower_w, p, m, 1.0};
}

namespace detail {

/// Signed per-factor shift: +sqrt(n_i) s for the upper control, -1/m for the
/// lower one.  Both variants then share one piecewise form.
inline double factor_shift(const ControlFunctionSpec& c, int dim) {
    if (c.variant == ControlFunctionSpec::Variant::upper_u)
        return std::sqrt(static_cast<double>(dim)) * c.perturbation;
    return -1.0 / c.perturbation;
}

// Radial profile of one factor: 1/(V a^dim) on the closed ball of radius
// a + shift, 1/(V (t - shift)^dim) out to radius b + shift, zero beyond.
// Piece boundaries belong to the inner piece.
inline double factor_profile(double t, double a, double b, int dim, double shift) {
    const double vol = ball_volume(dim);
    if (t <= a + shift) return 1.0 / (vol * std::pow(a, dim));
    if (t <= b + shift) return 1.0 / (vol * std::pow(t - shift, dim));
    return 0.0;
}

// Integral of the profile over R^dim: (a+shift)^dim/a^dim from the inner
// ball, dim (ln(b/a) + series(shift)) from the annulus; the series term
// vanishes for dim == 1.
inline double factor_profile_l1(double a, double b, int dim, double shift) {
    const double inner = std::pow((a + shift) / a, dim);
    const double series = dim >= 2 ? radial_correction_series(shift, a, b, dim) : 0.0;
    return inner + dim * (std::log(b / a) + series);
}

}  // namespace detail

/// Pointwise evaluation; x supplies the first total_dim() coordinates.
inline double control_eval(const ControlFunctionSpec& c, const std::array<double, 3>& x) {
    double v = c.scale;
    int axis = 0;
    for (const auto& f : c.params.factors) {
        double tsq = 0.0;
        for (int d = 0; d < f.dim; ++d, ++axis)
            tsq += x[static_cast<std::size_t>(axis)] * x[static_cast<std::size_t>(axis)];
        const double t = std::sqrt(tsq);
        v *= detail::factor_profile(t, f.a, f.b, f.dim, detail::factor_shift(c, f.dim));
        if (v == 0.0) return 0.0;
    }
    return v;
}

/// Closed-form L1 norm: scale times the product of per-factor integrals.
/// At s = 0 (resp. m = +inf) this reduces exactly to sharp_l1_norm.
inline double control_l1_norm(const ControlFunctionSpec& c) {
    double v = c.scale;
    for (const auto& f : c.params.factors)
        v *= detail::factor_profile_l1(f.a, f.b, f.dim, detail::factor_shift(c, f.dim));
    return v;
}

}  // namespace truncmax
