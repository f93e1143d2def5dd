#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "truncmax/constants.hpp"
#include "truncmax/errors.hpp"
#include "truncmax/format.hpp"
#include "truncmax/grid.hpp"
#include "truncmax/operators.hpp"
#include "truncmax/params.hpp"

namespace truncmax {

// ------------------------------------------------------ grid size defaults --

/// Smallest centered grid whose half-extent covers `half_extent` with a two
/// cell margin: the next power of two of cells for n <= 2, the next multiple
/// of 32 for n = 3.
inline std::int64_t default_cells_per_axis(int n, double h, double half_extent) {
    const std::int64_t need =
        2 * static_cast<std::int64_t>(std::ceil(half_extent / h + 2.0));
    if (n <= 2) {
        std::int64_t c = 2;
        while (c < need) c *= 2;
        return c;
    }
    return ((need + 31) / 32) * 32;
}

namespace detail {

inline GridSpec study_grid(const TruncationParams& p, double h, double half_extent,
                           std::int64_t cells_override) {
    const int n = p.total_dim();
    const std::int64_t cells =
        cells_override > 0 ? cells_override : default_cells_per_axis(n, h, half_extent);
    if (0.5 * static_cast<double>(cells) * h < half_extent + h)
        throw resolution_error("study grid: " + std::to_string(cells) +
                               " cells per axis cannot pad a half-extent of " +
                               fmt_sig(half_extent, 6) + " at h = " + fmt_sig(h, 6));
    return make_centered_grid_spec(n, h, cells);
}

}  // namespace detail

// ------------------------------------------------------- convergence study --

struct ConvergenceRecord {
    double m = 0.0;
    double h = 0.0;
    int radii = 0;
    double ratio = 0.0;   // l1(Max f_m) / l1(f_m)
    double w_norm = 0.0;  // closed-form lower envelope at this m
    double sharp = 0.0;
    double crude = 0.0;
    double mass_budget = 0.0;      // relative allowance for support rasterization
    double sampling_budget = 0.0;  // relative allowance for radius sampling
};

struct StudyConfig {
    TruncationParams params;
    std::vector<double> m_list;
    std::vector<double> h_list;
    int radii_count = 64;
    std::int64_t cells_per_axis = 0;  // 0: pick default_cells_per_axis
    int threads = 0;
};

/// Ratios l1(Max f_m)/l1(f_m) for every (m, h) pair, sorted by (m, h), with
/// the bracketing constants attached.  Guard failures are rethrown with the
/// offending pair named.
inline std::vector<ConvergenceRecord> convergence_study(const StudyConfig& cfg,
                                                        std::vector<std::string>* violations = nullptr) {
    detail::require(!cfg.m_list.empty() && !cfg.h_list.empty(),
                    "convergence_study: m_list and h_list must be non-empty");
    const TruncationParams& p = cfg.params;
    const int n = p.total_dim();

    std::vector<double> ms = cfg.m_list, hs = cfg.h_list;
    std::sort(ms.begin(), ms.end());
    std::sort(hs.begin(), hs.end());

    std::vector<ConvergenceRecord> records;
    for (double m : ms)
        for (double h : hs) {
            const std::string where =
                "convergence_study (m = " + fmt_sig(m, 6) + ", h = " + fmt_sig(h, 6) + "): ";
            try {
                const GridSpec spec =
                    detail::study_grid(p, h, p.max_b() + 1.0 / m, cfg.cells_per_axis);
                const GridFunction f = extremal_fm(m, spec);
                const GridFunction mx = truncated_max_with_samples(
                    f, p, make_radius_samples(p, RadiiResolution{cfg.radii_count}), cfg.threads);

                ConvergenceRecord rec;
                rec.m = m;
                rec.h = h;
                rec.radii = cfg.radii_count;
                rec.ratio = l1_norm(mx) / l1_norm(f);
                rec.w_norm = control_l1_norm(make_control_w(p, m));
                rec.sharp = sharp_l1_norm(p);
                rec.crude = crude_upper_bound(p);
                rec.mass_budget = 5.0 * n * h * m;
                double sb = 0.0;
                for (const auto& fac : p.factors)
                    if (fac.a < fac.b)
                        sb += fac.dim * std::log(fac.b / fac.a) /
                              static_cast<double>(cfg.radii_count - 1);
                rec.sampling_budget = sb;
                records.push_back(rec);

                if (violations) {
                    if (!(rec.w_norm <= rec.sharp + 1e-12 * rec.sharp))
                        violations->push_back(where + "w_norm exceeds sharp");
                    if (!(rec.sharp <= rec.crude + 1e-12 * rec.crude))
                        violations->push_back(where + "sharp exceeds crude");
                }
            } catch (const resolution_error& e) {
                throw resolution_error(where + e.what());
            } catch (const budget_error& e) {
                throw budget_error(where + e.what());
            }
        }
    return records;
}

// -------------------------------------------------------- pointwise checks --

struct SandwichReport {
    double tol_u = 0.0;
    double tol_w = 0.0;
    double max_excess_u = 0.0;   // max over cells of Max g - u  (want <= tol_u)
    double max_deficit_w = 0.0;  // max over cells of w - Max f_m (want <= tol_w)
    std::array<double, 3> arg_u{0.0, 0.0, 0.0};
    std::array<double, 3> arg_w{0.0, 0.0, 0.0};
    std::int64_t violations_u = 0;
    std::int64_t violations_w = 0;
    std::int64_t cells = 0;
};

/// Grid check of the two-sided envelope: the maximal image of a unit-mass
/// cube of half-side s stays below the upper control u, and the maximal image
/// of f_m stays above the lower control w, both up to a resolution tolerance
/// 5 h sup/a.  Violations are reported, not thrown.
inline SandwichReport pointwise_sandwich_check(const TruncationParams& p, double m, double s,
                                               double h, int radii_count, int threads = 0,
                                               std::int64_t cells_per_axis = 0) {
    const int n = p.total_dim();
    detail::require(std::isfinite(s) && s >= 2.0 * h,
                    "pointwise_sandwich_check: cube half-side s must be at least 2h");

    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double half_extent = p.max_b() + std::max(sqrt_n * s, 1.0 / m) + 2.0 * h;
    const GridSpec spec = detail::study_grid(p, h, half_extent, cells_per_axis);
    const auto samples = make_radius_samples(p, RadiiResolution{radii_count});

    SandwichReport rep;
    rep.cells = spec.total_cells();

    // Upper side: g = normalized cube indicator of half-side s.
    SimpleFunction cube;
    cube.alphas = {1.0};
    SimpleFunction::Box box{};
    for (int d = 0; d < n; ++d) {
        box.lo[static_cast<std::size_t>(d)] = -s;
        box.hi[static_cast<std::size_t>(d)] = s;
    }
    cube.boxes = {box};
    GridFunction g = simple_function_to_grid(cube, spec);
    const double g_mass = l1_norm(g);
    detail::require(g_mass > 0.0, "pointwise_sandwich_check: cube misses every cell center");
    for (double& v : g.values) v /= g_mass;

    const ControlFunctionSpec u = make_control_u(p, s, 1.0);
    const ControlFunctionSpec w = make_control_w(p, m);
    double sup_u = 1.0, sup_w = 1.0;
    for (const auto& fac : p.factors) {
        sup_u /= ball_volume(fac.dim) * std::pow(fac.a, fac.dim);
        sup_w /= ball_volume(fac.dim) * std::pow(fac.a, fac.dim);
    }
    rep.tol_u = 5.0 * h * sup_u / p.min_a();
    rep.tol_w = 5.0 * h * sup_w / p.min_a();

    const GridFunction max_g = truncated_max_with_samples(g, p, samples, threads);
    const GridFunction max_f =
        truncated_max_with_samples(extremal_fm(m, spec), p, samples, threads);

    std::int64_t idx = 0;
    for (std::int64_t i0 = 0; i0 < spec.axis_cells(0); ++i0)
        for (std::int64_t i1 = 0; i1 < spec.axis_cells(1); ++i1)
            for (std::int64_t i2 = 0; i2 < spec.axis_cells(2); ++i2, ++idx) {
                const std::array<double, 3> x{spec.center(0, i0),
                                              n >= 2 ? spec.center(1, i1) : 0.0,
                                              n >= 3 ? spec.center(2, i2) : 0.0};
                const double excess =
                    max_g.values[static_cast<std::size_t>(idx)] - control_eval(u, x);
                if (excess > rep.max_excess_u) {
                    rep.max_excess_u = excess;
                    rep.arg_u = x;
                }
                if (excess > rep.tol_u) ++rep.violations_u;

                const double deficit =
                    control_eval(w, x) - max_f.values[static_cast<std::size_t>(idx)];
                if (deficit > rep.max_deficit_w) {
                    rep.max_deficit_w = deficit;
                    rep.arg_w = x;
                }
                if (deficit > rep.tol_w) ++rep.violations_w;
            }
    return rep;
}

// ---------------------------------------------------- rearrangement check --

struct RearrangementReport {
    double f_norm = 0.0;
    double g_norm = 0.0;
    double max_f_norm = 0.0;
    double max_g_norm = 0.0;
    bool mass_equal = false;  // |f_norm - g_norm| within 1e-12 relative
    bool holds = false;       // max_f_norm <= max_g_norm (1 + 1e-6)
};

/// Concentration comparison: g stacks all weights onto the first box.  For
/// congruent, cell-aligned translates the masses agree to roundoff and the
/// maximal image of f can only lose mass against g.
inline RearrangementReport rearrangement_check(const SimpleFunction& sf,
                                               const TruncationParams& p, double h,
                                               int radii_count, int threads = 0) {
    const int n = p.total_dim();
    detail::require(!sf.boxes.empty(), "rearrangement_check: empty simple function");

    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{0.0, 0.0, 0.0};
    for (int d = 0; d < n; ++d) {
        const auto dd = static_cast<std::size_t>(d);
        lo[dd] = sf.boxes[0].lo[dd];
        hi[dd] = sf.boxes[0].hi[dd];
        for (const auto& b : sf.boxes) {
            lo[dd] = std::min(lo[dd], b.lo[dd]);
            hi[dd] = std::max(hi[dd], b.hi[dd]);
        }
    }
    const double pad = p.max_b() + 2.0 * h;
    std::array<double, 3> glo{0.0, 0.0, 0.0};
    std::array<std::int64_t, 3> cells{1, 1, 1};
    for (int d = 0; d < n; ++d) {
        const auto dd = static_cast<std::size_t>(d);
        glo[dd] = lo[dd] - pad;
        cells[dd] = static_cast<std::int64_t>(std::ceil((hi[dd] + pad - glo[dd]) / h)) + 1;
    }
    const GridSpec spec = make_grid_spec(n, h, glo, cells);

    const GridFunction f = simple_function_to_grid(sf, spec);
    SimpleFunction concentrated;
    double total = 0.0;
    for (double a : sf.alphas) total += a;
    concentrated.alphas = {total};
    concentrated.boxes = {sf.boxes[0]};
    const GridFunction g = simple_function_to_grid(concentrated, spec);

    const auto samples = make_radius_samples(p, RadiiResolution{radii_count});
    RearrangementReport rep;
    rep.f_norm = l1_norm(f);
    rep.g_norm = l1_norm(g);
    rep.max_f_norm = l1_norm(truncated_max_with_samples(f, p, samples, threads));
    rep.max_g_norm = l1_norm(truncated_max_with_samples(g, p, samples, threads));
    rep.mass_equal =
        std::abs(rep.f_norm - rep.g_norm) <= 1e-12 * std::max({1.0, rep.f_norm, rep.g_norm});
    rep.holds = rep.max_f_norm <= rep.max_g_norm * (1.0 + 1e-6);
    return rep;
}

// ---------------------------------------------------------------- reports --

inline void write_records_csv(std::ostream& os, const std::vector<ConvergenceRecord>& records) {
    os << "m,h,radii,ratio,w_norm,sharp,crude\n";
    for (const auto& r : records)
        os << fmt_sig(r.m) << ',' << fmt_sig(r.h) << ',' << r.radii << ',' << fmt_sig(r.ratio)
           << ',' << fmt_sig(r.w_norm) << ',' << fmt_sig(r.sharp) << ',' << fmt_sig(r.crude)
           << '\n';
}

inline nlohmann::json params_to_json(const TruncationParams& p) {
    nlohmann::json j;
    j["kind"] = kind_name(p.kind);
    j["n"] = p.total_dim();
    std::vector<int> partition;
    std::vector<double> a, b;
    for (const auto& f : p.factors) {
        partition.push_back(f.dim);
        a.push_back(f.a);
        b.push_back(f.b);
    }
    j["partition"] = partition;
    j["a"] = a;
    j["b"] = b;
    return j;
}

inline nlohmann::json study_report_json(const TruncationParams& p,
                                        const std::vector<ConvergenceRecord>& records,
                                        const std::vector<std::string>& violations) {
    nlohmann::json j;
    j["params"] = params_to_json(p);
    j["records"] = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json rec;
        rec["m"] = r.m;
        rec["h"] = r.h;
        rec["radii"] = r.radii;
        rec["ratio"] = r.ratio;
        rec["w_norm"] = r.w_norm;
        rec["sharp"] = r.sharp;
        rec["crude"] = r.crude;
        rec["mass_budget"] = r.mass_budget;
        rec["sampling_budget"] = r.sampling_budget;
        j["records"].push_back(rec);
    }
    j["violations"] = violations;
    return j;
}

}  // namespace truncmax
