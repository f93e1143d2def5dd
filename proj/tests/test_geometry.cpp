#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "truncmax/geometry.hpp"
#include "support/quadrature.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("unit ball volumes match the closed forms") {
    CHECK(truncmax::ball_volume(1) == 2.0);
    CHECK(truncmax::ball_volume(2) == pi);
    CHECK_THAT(truncmax::ball_volume(3), WithinRel(4.0 * pi / 3.0, 1e-15));
    CHECK_THAT(truncmax::ball_volume(4), WithinRel(pi * pi / 2.0, 1e-15));
    CHECK_THAT(truncmax::ball_volume(5), WithinRel(8.0 * pi * pi / 15.0, 1e-15));
    CHECK_THAT(truncmax::ball_volume(8), WithinRel(pi * pi * pi * pi / 24.0, 1e-15));
    CHECK_THROWS_AS(truncmax::ball_volume(0), truncmax::invalid_argument);
    CHECK_THROWS_AS(truncmax::ball_volume(9), truncmax::invalid_argument);
}

TEST_CASE("volume satisfies the two-step recurrence V_n = 2 pi V_{n-2} / n") {
    for (int n = 3; n <= 8; ++n)
        CHECK_THAT(truncmax::ball_volume(n),
                   WithinRel(2.0 * pi * truncmax::ball_volume(n - 2) / n, 1e-14));
}

TEST_CASE("sphere area is n times ball volume") {
    for (int n = 1; n <= 8; ++n) {
        CHECK_THAT(truncmax::sphere_surface_area(n),
                   WithinRel(n * truncmax::ball_volume(n), 1e-15));
        const auto c = truncmax::dimension_constants(n);
        CHECK(c.n == n);
        CHECK(c.ball_volume == truncmax::ball_volume(n));
        CHECK(c.sphere_surface_area == truncmax::sphere_surface_area(n));
    }
    // Low-dimensional spot values: circumference and sphere area.
    CHECK_THAT(truncmax::sphere_surface_area(2), WithinRel(2.0 * pi, 1e-15));
    CHECK_THAT(truncmax::sphere_surface_area(3), WithinRel(4.0 * pi, 1e-15));
}

TEST_CASE("correction series closed form, frozen spot value") {
    // n = 2 collapses to x (1/a - 1/b); with s = 0.01, a = 1, b = 2 this is
    // sqrt(2) * 0.01 * 0.5.
    CHECK_THAT(truncmax::series_a(0.01, 1.0, 2.0, 2),
               WithinAbs(0.0070710678118654755, 1e-18));
    CHECK(truncmax::series_a(0.0, 1.0, 2.0, 3) == 0.0);
    CHECK(truncmax::series_b(std::numeric_limits<double>::infinity(), 1.0, 2.0, 3) == 0.0);
}

TEST_CASE("series arguments are validated") {
    CHECK_THROWS_AS(truncmax::series_a(0.1, 1.0, 2.0, 1), truncmax::invalid_argument);
    CHECK_THROWS_AS(truncmax::series_a(-0.1, 1.0, 2.0, 2), truncmax::invalid_argument);
    CHECK_THROWS_AS(truncmax::series_a(0.1, 2.0, 1.0, 2), truncmax::invalid_argument);
    CHECK_THROWS_AS(truncmax::series_a(0.1, 0.0, 1.0, 2), truncmax::invalid_argument);
    CHECK_THROWS_AS(truncmax::series_b(0.0, 1.0, 2.0, 2), truncmax::invalid_argument);
    CHECK_THROWS_AS(truncmax::series_b(-3.0, 1.0, 2.0, 2), truncmax::invalid_argument);
}

TEST_CASE("outward radial integral matches n(ln(b/a) + A(s)) against quadrature") {
    std::mt19937_64 rng(20240811);
    std::uniform_real_distribution<double> ua(0.1, 2.0);
    std::uniform_real_distribution<double> utheta(1.01, 20.0);
    std::uniform_real_distribution<double> us(0.0, 1.0);
    std::uniform_int_distribution<int> un(2, 4);

    for (int trial = 0; trial < 100; ++trial) {
        const int n = un(rng);
        const double a = ua(rng);
        const double b = a * utheta(rng);
        const double s = us(rng) * 0.5 * a;
        const double x = std::sqrt(static_cast<double>(n)) * s;

        const double integral = testsupport::adaptive_simpson(
            [&](double r) { return n * std::pow(r + x, n - 1) / std::pow(r, n); }, a, b, 1e-13);
        const double closed = n * (std::log(b / a) + truncmax::series_a(s, a, b, n));
        CHECK_THAT(closed, WithinRel(integral, 1e-9));
    }
}

TEST_CASE("inward radial integral matches n(ln(b/a) + B(m)) against quadrature") {
    std::mt19937_64 rng(20240812);
    std::uniform_real_distribution<double> ua(0.1, 2.0);
    std::uniform_real_distribution<double> utheta(1.01, 20.0);
    std::uniform_real_distribution<double> um(10.0, 200.0);
    std::uniform_int_distribution<int> un(2, 4);

    for (int trial = 0; trial < 100; ++trial) {
        const int n = un(rng);
        const double a = ua(rng);
        const double b = a * utheta(rng);
        const double m = um(rng) / a;  // keeps r - 1/m > 0 on [a, b]
        const double x = -1.0 / m;

        const double integral = testsupport::adaptive_simpson(
            [&](double r) { return n * std::pow(r + x, n - 1) / std::pow(r, n); }, a, b, 1e-13);
        const double closed = n * (std::log(b / a) + truncmax::series_b(m, a, b, n));
        CHECK_THAT(closed, WithinRel(integral, 1e-9));
    }
}
