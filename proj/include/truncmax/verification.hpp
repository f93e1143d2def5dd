#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "truncmax/constants.hpp"
#include "truncmax/errors.hpp"
#include "truncmax/experiments.hpp"
#include "truncmax/format.hpp"
#include "truncmax/grid.hpp"
#include "truncmax/operators.hpp"
#include "truncmax/params.hpp"

namespace truncmax {

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// -------------------------------------------------------- random instances --

namespace detail {

inline double unif(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::int64_t unii(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

struct RandomInstance {
    TruncationParams params;
    GridFunction f;
    std::vector<std::vector<double>> samples;
};

/// Dimension small enough that the brute-force oracle stays inside its work
/// budget on the grids below.
inline int pick_dim(std::mt19937_64& rng, Kind kind) {
    switch (kind) {
        case Kind::scalar: {
            const std::int64_t roll = unii(rng, 0, 9);
            return roll < 4 ? 1 : (roll < 8 ? 2 : 3);
        }
        case Kind::strong:
            return unii(rng, 0, 2) == 0 ? 1 : 2;
        case Kind::general:
        default:
            return unii(rng, 0, 3) == 0 ? 3 : 2;
    }
}

inline TruncationParams random_params(std::mt19937_64& rng, Kind kind, int n) {
    const double theta_cap = n >= 3 ? 2.0 : 2.2;
    auto draw_ab = [&](double& a, double& b) {
        a = unif(rng, 0.2, 0.35);
        b = unii(rng, 0, 99) < 15 ? a : a * unif(rng, 1.3, theta_cap);
    };
    if (kind == Kind::scalar) {
        double a, b;
        draw_ab(a, b);
        return TruncationParams::scalar(n, a, b);
    }
    if (kind == Kind::strong) {
        std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
        for (int d = 0; d < n; ++d) draw_ab(a[static_cast<std::size_t>(d)], b[static_cast<std::size_t>(d)]);
        return TruncationParams::strong(a, b);
    }
    std::vector<int> partition;
    if (n == 2)
        partition = unii(rng, 0, 1) == 0 ? std::vector<int>{2} : std::vector<int>{1, 1};
    else
        partition = unii(rng, 0, 1) == 0 ? std::vector<int>{2, 1} : std::vector<int>{1, 2};
    std::vector<double> a(partition.size()), b(partition.size());
    for (std::size_t i = 0; i < partition.size(); ++i) draw_ab(a[i], b[i]);
    return TruncationParams::general(partition, a, b);
}

/// Per-factor ascending radius lists with exact endpoints; interior points
/// are random so the kernels see more than the geometric grid.
inline std::vector<std::vector<double>> random_samples(std::mt19937_64& rng,
                                                       const TruncationParams& p) {
    const int cap = p.total_dim() >= 3 ? 2 : 4;
    std::vector<std::vector<double>> out;
    for (const auto& f : p.factors) {
        if (f.a == f.b) {
            out.push_back({f.a});
            continue;
        }
        const int count = static_cast<int>(unii(rng, 2, cap));
        std::vector<double> r{f.a, f.b};
        for (int j = 2; j < count; ++j) r.push_back(f.a * std::pow(f.b / f.a, unif(rng, 0.1, 0.9)));
        std::sort(r.begin(), r.end());
        out.push_back(std::move(r));
    }
    return out;
}

inline GridSpec random_grid_spec(std::mt19937_64& rng, int n) {
    if (n == 1) return make_centered_grid_spec(1, 1.0 / 16.0, unii(rng, 200, 400));
    std::array<double, 3> lo{};
    std::array<std::int64_t, 3> cells{1, 1, 1};
    const double h = n == 2 ? 1.0 / 16.0 : 1.0 / 8.0;
    for (int d = 0; d < n; ++d) {
        cells[static_cast<std::size_t>(d)] = n == 2 ? unii(rng, 48, 64) : unii(rng, 18, 26);
        lo[static_cast<std::size_t>(d)] = -0.5 * h * static_cast<double>(cells[static_cast<std::size_t>(d)]);
    }
    return make_grid_spec(n, h, lo, cells);
}

inline GridFunction random_grid_function(std::mt19937_64& rng, const GridSpec& spec) {
    GridFunction f = make_zero_grid_function(spec);
    const std::int64_t roll = unii(rng, 0, 99);
    if (roll < 30) {
        // Small blob: indicator-like support of a few cells, sparse path fodder.
        const std::int64_t rad = unii(rng, 1, 3);
        std::array<std::int64_t, 3> c{0, 0, 0};
        for (int d = 0; d < spec.n; ++d) {
            const std::int64_t m = spec.axis_cells(d);
            c[static_cast<std::size_t>(d)] = unii(rng, m / 4, (3 * m) / 4);
        }
        for (std::int64_t i0 = 0; i0 < spec.axis_cells(0); ++i0)
            for (std::int64_t i1 = 0; i1 < spec.axis_cells(1); ++i1)
                for (std::int64_t i2 = 0; i2 < spec.axis_cells(2); ++i2) {
                    const std::int64_t d0 = i0 - c[0], d1 = i1 - c[1], d2 = i2 - c[2];
                    if (d0 * d0 + d1 * d1 + d2 * d2 <= rad * rad)
                        f.values[static_cast<std::size_t>(spec.flat_index(i0, i1, i2))] =
                            unif(rng, 0.5, 1.5);
                }
        return f;
    }
    for (double& v : f.values) v = unif(rng, 0.0, 1.0);
    if (roll >= 85) {
        // Half-space cut: leaves a sharp support boundary for the bbox logic.
        const std::int64_t cut = spec.axis_cells(0) / 2;
        for (std::int64_t i0 = 0; i0 < cut; ++i0)
            for (std::int64_t i1 = 0; i1 < spec.axis_cells(1); ++i1)
                for (std::int64_t i2 = 0; i2 < spec.axis_cells(2); ++i2)
                    f.values[static_cast<std::size_t>(spec.flat_index(i0, i1, i2))] = 0.0;
    }
    return f;
}

inline RandomInstance random_instance(std::mt19937_64& rng, Kind kind) {
    RandomInstance inst;
    const int n = pick_dim(rng, kind);
    inst.params = random_params(rng, kind, n);
    inst.samples = random_samples(rng, inst.params);
    inst.f = random_grid_function(rng, random_grid_spec(rng, n));
    return inst;
}

}  // namespace detail

// ------------------------------------------------------------- the suites --

/// Optimized kernels against the brute-force reference on identical sample
/// sets.  `corrupt` biases the kernel output by 1e-6 as a negative control:
/// the suite must then fail.
inline SuiteResult oracle_equivalence_suite(std::uint64_t seed, int instances_per_kind,
                                            bool corrupt = false, double tolerance = 1e-12) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    int total = 0;
    for (Kind kind : {Kind::scalar, Kind::strong, Kind::general})
        for (int i = 0; i < instances_per_kind; ++i, ++total) {
            const auto inst = detail::random_instance(rng, kind);
            GridFunction fast = truncated_max_with_samples(inst.f, inst.params, inst.samples);
            const GridFunction slow =
                truncated_max_oracle_with_samples(inst.f, inst.params, inst.samples);
            if (corrupt)
                for (double& v : fast.values) v += 1e-6;
            for (std::size_t j = 0; j < fast.values.size(); ++j)
                worst = std::max(worst, std::abs(fast.values[j] - slow.values[j]));
        }
    SuiteResult r;
    r.name = "oracle-equivalence";
    r.pass = worst <= tolerance;
    r.detail = std::to_string(total) + " instances, max |kernel - reference| = " +
               fmt_sig(worst, 3) + " (tolerance " + fmt_sig(tolerance, 3) + ")";
    return r;
}

/// l1(Max f) <= crude * l1(f), with a discretization allowance 1 + 5h/min(a)
/// covering the surplus of cell-center windows over exact balls.
inline SuiteResult crude_bound_suite(std::uint64_t seed, int instances_per_kind) {
    std::mt19937_64 rng(seed);
    double worst_ratio = 0.0;
    int total = 0;
    for (Kind kind : {Kind::scalar, Kind::strong, Kind::general})
        for (int i = 0; i < instances_per_kind; ++i, ++total) {
            const auto inst = detail::random_instance(rng, kind);
            const double lhs =
                l1_norm(truncated_max_with_samples(inst.f, inst.params, inst.samples));
            const double allowance = 1.0 + 5.0 * inst.f.spec.h / inst.params.min_a();
            const double rhs = crude_upper_bound(inst.params) * l1_norm(inst.f) * allowance;
            if (rhs > 0.0) worst_ratio = std::max(worst_ratio, lhs / rhs);
        }
    SuiteResult r;
    r.name = "crude-bound";
    r.pass = worst_ratio <= 1.0 + 1e-12;
    r.detail = std::to_string(total) + " instances, max l1(Max f) / bound = " +
               fmt_sig(worst_ratio, 6);
    return r;
}

/// Ordering of the closed-form constants on random parameters: 1 <= sharp <=
/// crude, and for scalar a < b the growth ratio sharp/ln(theta) sits in
/// (n, n + 1/ln(theta)].
inline SuiteResult constant_order_suite(std::uint64_t seed, int draws = 1000) {
    std::mt19937_64 rng(seed);
    int failures = 0;
    std::string first;
    for (int i = 0; i < draws; ++i) {
        const int k = static_cast<int>(detail::unii(rng, 1, 3));
        std::vector<int> partition;
        int total = 0;
        for (int j = 0; j < k; ++j) {
            const int d = static_cast<int>(detail::unii(rng, 1, 3));
            if (total + d > 8) break;
            partition.push_back(d);
            total += d;
        }
        if (partition.empty()) partition.push_back(1);
        std::vector<double> a(partition.size()), b(partition.size());
        for (std::size_t j = 0; j < partition.size(); ++j) {
            a[j] = detail::unif(rng, 0.05, 5.0);
            b[j] = detail::unii(rng, 0, 9) == 0 ? a[j] : a[j] * detail::unif(rng, 1.0, 50.0);
        }
        const TruncationParams p = TruncationParams::general(partition, a, b);
        const double sharp = sharp_l1_norm(p);
        const double crude = crude_upper_bound(p);
        bool ok = sharp >= 1.0 && crude >= sharp * (1.0 - 1e-12);
        if (ok && partition.size() == 1 && a[0] < b[0]) {
            const TruncationParams sc = TruncationParams::scalar(partition[0], a[0], b[0]);
            const double ratio = growth_rate_check(sc);
            const double n = partition[0];
            const double lt = std::log(b[0] / a[0]);
            ok = ratio > n && ratio <= n + 1.0 / lt + 1e-9 * ratio;
        }
        if (!ok) {
            ++failures;
            if (first.empty()) first = " first failure at draw " + std::to_string(i);
        }
    }
    SuiteResult r;
    r.name = "constant-order";
    r.pass = failures == 0;
    r.detail = std::to_string(draws) + " draws, " + std::to_string(failures) + " failures" + first;
    return r;
}

/// Random simple functions of up to five congruent, disjoint, grid-snapped
/// boxes; concentrating the weights onto one box must not decrease the l1
/// norm of the maximal image.
inline SuiteResult rearrangement_suite(const TruncationParams& p, double h, int radii_count,
                                       int trials, std::uint64_t seed) {
    const int n = p.total_dim();
    std::mt19937_64 rng(seed);
    int mass_failures = 0, order_failures = 0;
    for (int t = 0; t < trials; ++t) {
        std::array<std::int64_t, 3> shape{1, 1, 1};
        for (int d = 0; d < n; ++d) shape[static_cast<std::size_t>(d)] = detail::unii(rng, 1, 10);
        const std::int64_t nbox = detail::unii(rng, 1, 5);
        const std::int64_t span = 40;

        SimpleFunction sf;
        std::vector<std::array<std::int64_t, 3>> placed;
        for (std::int64_t bidx = 0; bidx < nbox && static_cast<std::int64_t>(placed.size()) < nbox;) {
            std::array<std::int64_t, 3> pos{0, 0, 0};
            for (int d = 0; d < n; ++d) pos[static_cast<std::size_t>(d)] = detail::unii(rng, -span, span);
            bool clear = true;
            for (const auto& q : placed) {
                bool separated = false;
                for (int d = 0; d < n; ++d) {
                    const auto dd = static_cast<std::size_t>(d);
                    std::int64_t gap = pos[dd] - q[dd];
                    if (gap < 0) gap = -gap;
                    if (gap >= shape[dd]) separated = true;
                }
                if (!separated) clear = false;
            }
            if (!clear) continue;
            placed.push_back(pos);
            ++bidx;
        }
        for (const auto& pos : placed) {
            SimpleFunction::Box box{};
            for (int d = 0; d < n; ++d) {
                const auto dd = static_cast<std::size_t>(d);
                box.lo[dd] = static_cast<double>(pos[dd]) * h;
                box.hi[dd] = static_cast<double>(pos[dd] + shape[dd]) * h;
            }
            sf.boxes.push_back(box);
            sf.alphas.push_back(detail::unif(rng, 0.1, 2.0));
        }

        const RearrangementReport rep = rearrangement_check(sf, p, h, radii_count);
        if (!rep.mass_equal) ++mass_failures;
        if (!rep.holds) ++order_failures;
    }
    SuiteResult r;
    r.name = "rearrangement";
    r.pass = mass_failures == 0 && order_failures == 0;
    r.detail = std::to_string(trials) + " trials, " + std::to_string(mass_failures) +
               " mass mismatches, " + std::to_string(order_failures) + " ordering violations";
    return r;
}

/// Integral bracketing on a small convergence study: every ratio must land in
/// [w_norm(m) - slack, sharp + slack], and the closed-form constants must be
/// ordered w_norm <= sharp <= crude.
inline SuiteResult sandwich_suite(const TruncationParams& p, const std::vector<double>& m_list,
                                  double h, int radii_count, double slack, int threads = 0) {
    StudyConfig cfg;
    cfg.params = p;
    cfg.m_list = m_list;
    cfg.h_list = {h};
    cfg.radii_count = radii_count;
    cfg.threads = threads;
    std::vector<std::string> violations;
    const auto records = convergence_study(cfg, &violations);

    int failures = static_cast<int>(violations.size());
    double lo = records.front().ratio, hi = records.front().ratio;
    for (const auto& rec : records) {
        lo = std::min(lo, rec.ratio);
        hi = std::max(hi, rec.ratio);
        if (!(rec.w_norm - slack <= rec.ratio && rec.ratio <= rec.sharp + slack)) ++failures;
    }
    SuiteResult r;
    r.name = "sandwich";
    r.pass = failures == 0;
    r.detail = std::to_string(records.size()) + " records, ratios in [" + fmt_sig(lo, 6) + ", " +
               fmt_sig(hi, 6) + "], sharp " + fmt_sig(records.front().sharp, 6) + ", slack " +
               fmt_sig(slack, 3) + ", " + std::to_string(failures) + " failures";
    return r;
}

/// Everything the `verify` subcommand runs.  Deterministic for a fixed seed.
inline std::vector<SuiteResult> run_verification_suites(std::uint64_t seed,
                                                        int instances_per_kind = 8,
                                                        bool corrupt = false) {
    std::vector<SuiteResult> out;
    out.push_back(oracle_equivalence_suite(seed, instances_per_kind, corrupt));
    out.push_back(sandwich_suite(TruncationParams::scalar(1, 1.0, std::exp(1.0)), {16.0, 32.0},
                                 1.0 / 128.0, 64, 0.05));
    out.push_back(crude_bound_suite(seed + 1, instances_per_kind));
    out.push_back(constant_order_suite(seed + 2));
    out.push_back(rearrangement_suite(TruncationParams::scalar(1, 0.5, 1.0), 1.0 / 16.0, 8, 25,
                                      seed + 3));
    out.push_back(rearrangement_suite(TruncationParams::scalar(2, 0.4, 0.8), 1.0 / 8.0, 6, 10,
                                      seed + 4));
    return out;
}

}  // namespace truncmax
