#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "truncmax/accumulate.hpp"
#include "truncmax/errors.hpp"

namespace truncmax {

inline constexpr std::int64_t kDefaultCellBudget = std::int64_t{1} << 27;

/// Uniform cell-centered grid over an axis-parallel box in R^n, n in [1, 3].
/// Cell (i_0, .., i_{n-1}) has center lo[d] + (i_d + 0.5) h and is stored at
/// the lexicographic flat index with the last axis fastest.
struct GridSpec {
    int n = 1;
    double h = 1.0;
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<std::int64_t, 3> cells{1, 1, 1};

    std::int64_t axis_cells(int d) const { return d < n ? cells[static_cast<std::size_t>(d)] : 1; }

    std::int64_t total_cells() const {
        std::int64_t t = 1;
        for (int d = 0; d < n; ++d) t *= cells[static_cast<std::size_t>(d)];
        return t;
    }

    double center(int d, std::int64_t i) const {
        return lo[static_cast<std::size_t>(d)] + (static_cast<double>(i) + 0.5) * h;
    }

    double cell_volume() const {
        double v = 1.0;
        for (int d = 0; d < n; ++d) v *= h;
        return v;
    }

    std::int64_t flat_index(std::int64_t i0, std::int64_t i1 = 0, std::int64_t i2 = 0) const {
        return (i0 * axis_cells(1) + i1) * axis_cells(2) + i2;
    }

    bool operator==(const GridSpec& o) const {
        if (n != o.n || h != o.h) return false;
        for (int d = 0; d < n; ++d)
            if (lo[static_cast<std::size_t>(d)] != o.lo[static_cast<std::size_t>(d)] ||
                cells[static_cast<std::size_t>(d)] != o.cells[static_cast<std::size_t>(d)])
                return false;
        return true;
    }
};

inline GridSpec make_grid_spec(int n, double h, const std::array<double, 3>& lo,
                               const std::array<std::int64_t, 3>& cells,
                               std::int64_t cell_budget = kDefaultCellBudget) {
    detail::require(n >= 1 && n <= 3, "make_grid_spec: n must be in [1, 3]");
    detail::require(std::isfinite(h) && h > 0.0, "make_grid_spec: h must be positive");
    GridSpec s{n, h, lo, cells};
    std::int64_t total = 1;
    for (int d = 0; d < n; ++d) {
        detail::require(std::isfinite(lo[static_cast<std::size_t>(d)]),
                        "make_grid_spec: lo must be finite");
        detail::require(cells[static_cast<std::size_t>(d)] >= 1,
                        "make_grid_spec: each axis needs at least one cell");
        total *= cells[static_cast<std::size_t>(d)];
    }
    for (int d = n; d < 3; ++d) {
        s.lo[static_cast<std::size_t>(d)] = 0.0;
        s.cells[static_cast<std::size_t>(d)] = 1;
    }
    if (total > cell_budget)
        throw budget_error("make_grid_spec: " + std::to_string(total) +
                           " cells exceed the budget of " + std::to_string(cell_budget));
    return s;
}

/// Grid symmetric about the origin: lo = -cells*h/2 on every axis.
inline GridSpec make_centered_grid_spec(int n, double h, std::int64_t cells_per_axis,
                                        std::int64_t cell_budget = kDefaultCellBudget) {
    std::array<double, 3> lo{};
    std::array<std::int64_t, 3> cells{1, 1, 1};
    for (int d = 0; d < n; ++d) {
        lo[static_cast<std::size_t>(d)] = -0.5 * static_cast<double>(cells_per_axis) * h;
        cells[static_cast<std::size_t>(d)] = cells_per_axis;
    }
    return make_grid_spec(n, h, lo, cells, cell_budget);
}

/// Nonnegative sampled function; values[i] is the sample at cell center i.
/// Anything outside the domain is implicitly zero (compact support).
struct GridFunction {
    GridSpec spec;
    std::vector<double> values;
};

inline GridFunction make_grid_function(GridSpec spec, std::vector<double> values) {
    detail::require(static_cast<std::int64_t>(values.size()) == spec.total_cells(),
                    "make_grid_function: value count does not match the grid");
    for (double v : values)
        detail::require(std::isfinite(v) && v >= 0.0,
                        "make_grid_function: values must be finite and nonnegative");
    return GridFunction{spec, std::move(values)};
}

inline GridFunction make_zero_grid_function(GridSpec spec) {
    std::vector<double> values(static_cast<std::size_t>(spec.total_cells()), 0.0);
    return GridFunction{spec, std::move(values)};
}

/// h^n * sum of samples, accumulated in flat order with compensation.
inline double l1_norm(const GridFunction& f) {
    CompensatedSum acc;
    for (double v : f.values) acc.add(v);
    return acc.value() * f.spec.cell_volume();
}

// ------------------------------------------------------------- indicators --

/// Indicator of the closed Euclidean ball B(center, radius), sampled by the
/// cell-center rule.  The ball must meet the grid domain.
inline GridFunction indicator_ball(const std::array<double, 3>& center, double radius,
                                   const GridSpec& spec) {
    detail::require(std::isfinite(radius) && radius > 0.0,
                    "indicator_ball: radius must be positive");
    for (int d = 0; d < spec.n; ++d) {
        const auto dd = static_cast<std::size_t>(d);
        const double dom_lo = spec.lo[dd];
        const double dom_hi = spec.lo[dd] + static_cast<double>(spec.cells[dd]) * spec.h;
        detail::require(center[dd] + radius >= dom_lo && center[dd] - radius <= dom_hi,
                        "indicator_ball: ball does not meet the grid domain");
    }
    GridFunction out = make_zero_grid_function(spec);
    const double rsq = radius * radius;
    const std::int64_t c0 = spec.axis_cells(0), c1 = spec.axis_cells(1), c2 = spec.axis_cells(2);
    std::int64_t idx = 0;
    for (std::int64_t i0 = 0; i0 < c0; ++i0) {
        const double d0 = spec.center(0, i0) - center[0];
        for (std::int64_t i1 = 0; i1 < c1; ++i1) {
            const double d1 = spec.n >= 2 ? spec.center(1, i1) - center[1] : 0.0;
            for (std::int64_t i2 = 0; i2 < c2; ++i2, ++idx) {
                const double d2 = spec.n >= 3 ? spec.center(2, i2) - center[2] : 0.0;
                if (d0 * d0 + d1 * d1 + d2 * d2 <= rsq) out.values[static_cast<std::size_t>(idx)] = 1.0;
            }
        }
    }
    return out;
}

/// Ball indicator at the origin with radius 1/m, renormalized so the discrete
/// l1_norm is 1 to machine accuracy.  Requires at least four cells across the
/// radius (1/m >= 4h).
inline GridFunction extremal_fm(double m, const GridSpec& spec) {
    detail::require(std::isfinite(m) && m > 0.0, "extremal_fm: m must be positive");
    const double radius = 1.0 / m;
    if (radius < 4.0 * spec.h)
        throw resolution_error("extremal_fm: radius 1/m = " + std::to_string(radius) +
                               " needs h <= " + std::to_string(radius / 4.0) + ", got h = " +
                               std::to_string(spec.h));
    GridFunction out = indicator_ball({0.0, 0.0, 0.0}, radius, spec);
    std::int64_t nonzero = 0;
    for (double v : out.values) nonzero += (v != 0.0);
    detail::require(nonzero > 0, "extremal_fm: support does not meet the grid");
    const double value = 1.0 / (spec.cell_volume() * static_cast<double>(nonzero));
    for (double& v : out.values)
        if (v != 0.0) v = value;
    return out;
}

// -------------------------------------------------------- simple functions --

/// Finite sum  sum_j alpha_j * chi_{O_j}  of weighted congruent boxes.  The
/// O_j are translates of O_1; boxes are half-open [lo, hi) so translates may
/// share faces without overlapping.
struct SimpleFunction {
    struct Box {
        std::array<double, 3> lo;
        std::array<double, 3> hi;
    };
    std::vector<double> alphas;
    std::vector<Box> boxes;
};

/// Rasterizes a SimpleFunction by the cell-center rule.  Rejects empty input,
/// negative weights, shape mismatches between boxes, and overlapping boxes.
inline GridFunction simple_function_to_grid(const SimpleFunction& sf, const GridSpec& spec) {
    const std::size_t nbox = sf.boxes.size();
    detail::require(nbox >= 1 && sf.alphas.size() == nbox,
                    "simple_function_to_grid: need matching, non-empty alphas and boxes");
    for (double a : sf.alphas)
        detail::require(std::isfinite(a) && a >= 0.0,
                        "simple_function_to_grid: weights must be finite and nonnegative");

    std::array<double, 3> shape{};
    for (int d = 0; d < spec.n; ++d) {
        const auto dd = static_cast<std::size_t>(d);
        shape[dd] = sf.boxes[0].hi[dd] - sf.boxes[0].lo[dd];
        detail::require(shape[dd] > 0.0, "simple_function_to_grid: boxes must have positive size");
    }
    for (const auto& box : sf.boxes)
        for (int d = 0; d < spec.n; ++d) {
            const auto dd = static_cast<std::size_t>(d);
            const double size = box.hi[dd] - box.lo[dd];
            detail::require(std::abs(size - shape[dd]) <= 1e-9 * std::max(1.0, shape[dd]),
                            "simple_function_to_grid: boxes must be congruent");
        }
    for (std::size_t i = 0; i < nbox; ++i)
        for (std::size_t j = i + 1; j < nbox; ++j) {
            bool overlap = true;
            for (int d = 0; d < spec.n; ++d) {
                const auto dd = static_cast<std::size_t>(d);
                if (!(sf.boxes[i].lo[dd] < sf.boxes[j].hi[dd] &&
                      sf.boxes[j].lo[dd] < sf.boxes[i].hi[dd])) {
                    overlap = false;
                    break;
                }
            }
            detail::require(!overlap, "simple_function_to_grid: boxes overlap");
        }

    GridFunction out = make_zero_grid_function(spec);
    for (std::size_t j = 0; j < nbox; ++j) {
        const auto& box = sf.boxes[j];
        // Index window of cell centers inside the half-open box, per axis.
        std::array<std::int64_t, 3> ilo{0, 0, 0}, ihi{0, 0, 0};
        bool empty = false;
        for (int d = 0; d < spec.n; ++d) {
            const auto dd = static_cast<std::size_t>(d);
            const double flo = (box.lo[dd] - spec.lo[dd]) / spec.h - 0.5;
            const double fhi = (box.hi[dd] - spec.lo[dd]) / spec.h - 0.5;
            std::int64_t a = static_cast<std::int64_t>(std::ceil(flo));
            if (static_cast<double>(a) < flo) ++a;  // guard against ceil roundoff
            std::int64_t b = static_cast<std::int64_t>(std::floor(fhi));
            if (static_cast<double>(b) >= fhi) --b;  // strict upper side (half-open)
            a = std::max<std::int64_t>(a, 0);
            b = std::min<std::int64_t>(b, spec.axis_cells(d) - 1);
            if (a > b) { empty = true; break; }
            ilo[dd] = a;
            ihi[dd] = b;
        }
        if (empty) continue;
        for (std::int64_t i0 = ilo[0]; i0 <= ihi[0]; ++i0)
            for (std::int64_t i1 = ilo[1]; i1 <= ihi[1]; ++i1)
                for (std::int64_t i2 = ilo[2]; i2 <= ihi[2]; ++i2)
                    out.values[static_cast<std::size_t>(spec.flat_index(i0, i1, i2))] +=
                        sf.alphas[j];
    }
    return out;
}

}  // namespace truncmax
