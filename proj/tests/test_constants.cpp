#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "truncmax/accumulate.hpp"
#include "truncmax/constants.hpp"
#include "truncmax/geometry.hpp"
#include "truncmax/verification.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using truncmax::ControlFunctionSpec;
using truncmax::TruncationParams;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Independent reading of the control functions, written out per variant
/// instead of through the shared signed-shift form.
double control_eval_direct(const ControlFunctionSpec& c, const std::array<double, 3>& x) {
    const bool upper = c.variant == ControlFunctionSpec::Variant::upper_u;
    double v = c.scale;
    int axis = 0;
    for (const auto& f : c.params.factors) {
        double tsq = 0.0;
        for (int d = 0; d < f.dim; ++d, ++axis) tsq += x[static_cast<std::size_t>(axis)] * x[static_cast<std::size_t>(axis)];
        const double t = std::sqrt(tsq);
        const double vol = truncmax::ball_volume(f.dim);
        double g;
        if (upper) {
            const double pad = std::sqrt(static_cast<double>(f.dim)) * c.perturbation;
            if (t <= f.a + pad)
                g = 1.0 / (vol * std::pow(f.a, f.dim));
            else if (t <= f.b + pad)
                g = 1.0 / (vol * std::pow(t - pad, f.dim));
            else
                g = 0.0;
        } else {
            const double pull = 1.0 / c.perturbation;
            if (t <= f.a - pull)
                g = 1.0 / (vol * std::pow(f.a, f.dim));
            else if (t <= f.b - pull)
                g = 1.0 / (vol * std::pow(t + pull, f.dim));
            else
                g = 0.0;
        }
        v *= g;
    }
    return v;
}

/// Midpoint-rule quadrature of control_eval over a centered box that pads the
/// support; the comparison target for the closed-form norm.
double control_grid_quadrature(const ControlFunctionSpec& c, double h) {
    const int n = c.params.total_dim();
    double reach = 0.0;
    for (const auto& f : c.params.factors) {
        const double shift = c.variant == ControlFunctionSpec::Variant::upper_u
                                 ? std::sqrt(static_cast<double>(f.dim)) * c.perturbation
                                 : -1.0 / c.perturbation;
        reach = std::max(reach, f.b + shift);
    }
    const std::int64_t half = static_cast<std::int64_t>(std::ceil(reach / h)) + 2;

    truncmax::CompensatedSum acc;
    const std::int64_t lim1 = n >= 2 ? half : 0, lim2 = n >= 3 ? half : 0;
    for (std::int64_t i0 = -half; i0 < half; ++i0)
        for (std::int64_t i1 = -lim1; i1 < std::max<std::int64_t>(lim1, 1); ++i1)
            for (std::int64_t i2 = -lim2; i2 < std::max<std::int64_t>(lim2, 1); ++i2) {
                const std::array<double, 3> x{(static_cast<double>(i0) + 0.5) * h,
                                              n >= 2 ? (static_cast<double>(i1) + 0.5) * h : 0.0,
                                              n >= 3 ? (static_cast<double>(i2) + 0.5) * h : 0.0};
                acc.add(control_eval(c, x));
            }
    double vol = 1.0;
    for (int d = 0; d < n; ++d) vol *= h;
    return acc.value() * vol;
}

}  // namespace

TEST_CASE("sharp constants for the tabulated cases") {
    const double e = std::exp(1.0);
    CHECK_THAT(truncmax::sharp_l1_norm(TruncationParams::scalar(1, 1.0, e)),
               WithinAbs(2.0, 1e-12));
    CHECK(truncmax::sharp_l1_norm(TruncationParams::scalar(3, 0.7, 0.7)) == 1.0);
    CHECK_THAT(truncmax::sharp_l1_norm(TruncationParams::strong({1.0, 1.0}, {e, e})),
               WithinAbs(4.0, 1e-12));
    CHECK_THAT(truncmax::sharp_l1_norm(TruncationParams::general({2}, {1.0}, {e})),
               WithinAbs(3.0, 1e-12));
    const double ln2 = std::log(2.0);
    CHECK_THAT(
        truncmax::sharp_l1_norm(TruncationParams::general({2, 1}, {1.0, 1.0}, {2.0, 2.0})),
        WithinRel((1.0 + 2.0 * ln2) * (1.0 + ln2), 1e-14));
}

TEST_CASE("crude bound and growth diagnostic") {
    const double e = std::exp(1.0);
    CHECK_THAT(truncmax::crude_upper_bound(TruncationParams::scalar(1, 1.0, e)),
               WithinRel(e, 1e-14));
    CHECK_THAT(truncmax::crude_upper_bound(TruncationParams::scalar(2, 0.5, 1.0)),
               WithinRel(4.0, 1e-14));
    CHECK_THAT(truncmax::crude_upper_bound(TruncationParams::strong({1.0, 1.0}, {2.0, 3.0})),
               WithinRel(6.0, 1e-14));

    // sharp / ln(theta) == n + 1/ln(theta) for the scalar kind.
    const auto p = TruncationParams::scalar(2, 1.0, 2.0);
    CHECK_THAT(truncmax::growth_rate_check(p), WithinRel(2.0 + 1.0 / std::log(2.0), 1e-14));
    CHECK_THROWS_AS(truncmax::growth_rate_check(TruncationParams::scalar(2, 1.0, 1.0)),
                    truncmax::invalid_argument);
    CHECK_THROWS_AS(truncmax::growth_rate_check(TruncationParams::strong({1.0}, {2.0})),
                    truncmax::invalid_argument);
}

TEST_CASE("constant ordering holds over random parameters") {
    const auto r = truncmax::constant_order_suite(99, 1000);
    INFO(r.detail);
    CHECK(r.pass);
}

TEST_CASE("control function factories validate their arguments") {
    const auto p = TruncationParams::scalar(2, 0.5, 1.0);
    CHECK_NOTHROW(truncmax::make_control_u(p, 0.0));
    CHECK_THROWS_AS(truncmax::make_control_u(p, -0.1), truncmax::invalid_argument);
    CHECK_THROWS_AS(truncmax::make_control_u(p, 0.1, 0.0), truncmax::invalid_argument);
    CHECK_NOTHROW(truncmax::make_control_w(p, 4.0));
    CHECK_NOTHROW(truncmax::make_control_w(p, kInf));
    CHECK_THROWS_AS(truncmax::make_control_w(p, 2.0), truncmax::invalid_argument);  // a - 1/m = 0
    CHECK_THROWS_AS(truncmax::make_control_w(p, -1.0), truncmax::invalid_argument);
}

TEST_CASE("control evaluation matches a direct per-variant reading") {
    std::mt19937_64 rng(20240814);
    std::uniform_real_distribution<double> ux(-1.5, 1.5);

    const auto params = {TruncationParams::scalar(1, 0.5, 1.1),
                         TruncationParams::scalar(3, 0.4, 0.9),
                         TruncationParams::strong({0.3, 0.4}, {0.5, 0.8}),
                         TruncationParams::general({2, 1}, {0.3, 0.5}, {0.66, 1.0})};
    for (const auto& p : params) {
        const auto u = truncmax::make_control_u(p, 0.07, 1.25);
        const auto w = truncmax::make_control_w(p, 8.0);
        for (int trial = 0; trial < 200; ++trial) {
            const std::array<double, 3> x{ux(rng), ux(rng), ux(rng)};
            CHECK_THAT(truncmax::control_eval(u, x),
                       WithinAbs(control_eval_direct(u, x), 1e-13));
            CHECK_THAT(truncmax::control_eval(w, x),
                       WithinAbs(control_eval_direct(w, x), 1e-13));
        }
    }
}

TEST_CASE("closed-form control norms match grid quadrature") {
    // The profiles jump to zero at the outer cutoff; midpoint quadrature picks
    // up O(h * jump) there, so the instances keep b/a wide to leave headroom.
    const auto params = {TruncationParams::scalar(1, 0.3, 1.5),
                         TruncationParams::strong({0.2, 0.25}, {1.6, 2.0}),
                         TruncationParams::general({2}, {0.25}, {1.0})};
    for (const auto& p : params) {
        const double h = p.min_a() / 200.0;
        const auto u = truncmax::make_control_u(p, 0.05);
        CHECK_THAT(truncmax::control_l1_norm(u),
                   WithinRel(control_grid_quadrature(u, h), 1e-3));
        const auto w = truncmax::make_control_w(p, 10.0 / p.min_a());
        CHECK_THAT(truncmax::control_l1_norm(w),
                   WithinRel(control_grid_quadrature(w, h), 1e-3));
    }
}

TEST_CASE("control norms collapse to the sharp constant in the limit") {
    const auto params = {TruncationParams::scalar(1, 1.0, 2.0),
                         TruncationParams::scalar(3, 0.4, 0.9),
                         TruncationParams::strong({0.3, 0.4}, {0.5, 0.8}),
                         TruncationParams::general({2, 1}, {0.3, 0.5}, {0.66, 1.0})};
    for (const auto& p : params) {
        const double sharp = truncmax::sharp_l1_norm(p);
        CHECK_THAT(truncmax::control_l1_norm(truncmax::make_control_u(p, 0.0)),
                   WithinRel(sharp, 1e-9));
        CHECK_THAT(truncmax::control_l1_norm(truncmax::make_control_w(p, kInf)),
                   WithinRel(sharp, 1e-9));
    }
}

TEST_CASE("control norms bracket the sharp constant") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ua(0.3, 1.5);
    std::uniform_real_distribution<double> utheta(1.0, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = ua(rng);
        const auto p = TruncationParams::scalar(2, a, a * utheta(rng));
        const double sharp = truncmax::sharp_l1_norm(p);
        const double s = 0.2 * a * std::uniform_real_distribution<double>(0.01, 1.0)(rng);
        const double m = 1.0 / (0.5 * a * std::uniform_real_distribution<double>(0.01, 1.0)(rng));
        CHECK(truncmax::control_l1_norm(truncmax::make_control_u(p, s)) >= sharp - 1e-12);
        CHECK(truncmax::control_l1_norm(truncmax::make_control_w(p, m)) <= sharp + 1e-12);
    }
}

TEST_CASE("control norms recover the sharp constant at first order") {
    const auto p = TruncationParams::general({2, 1}, {0.4, 0.5}, {0.8, 1.0});
    const double sharp = truncmax::sharp_l1_norm(p);

    std::vector<double> err_u, err_w;
    for (int k = 0; k <= 4; ++k) {
        const double s = 0.08 / static_cast<double>(1 << k);
        err_u.push_back(std::abs(truncmax::control_l1_norm(truncmax::make_control_u(p, s)) - sharp));
        const double m = 8.0 * static_cast<double>(1 << k);
        err_w.push_back(std::abs(truncmax::control_l1_norm(truncmax::make_control_w(p, m)) - sharp));
    }
    for (const auto& err : {err_u, err_w}) {
        const double order = std::log2(err.front() / err.back()) / 4.0;
        CHECK(order >= 0.9);
        for (std::size_t i = 1; i < err.size(); ++i) CHECK(err[i] < err[i - 1]);
    }
}
