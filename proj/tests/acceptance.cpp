// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Tolerances and runtime budgets are pinned here, not configurable.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "truncmax/truncmax.hpp"
#include "support/quadrature.hpp"

using truncmax::ControlFunctionSpec;
using truncmax::GridFunction;
using truncmax::RadiiResolution;
using truncmax::TruncationParams;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Criterion {
    std::string name;
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6) { return truncmax::fmt_sig(v, digits); }

// --------------------------------------------------- 1: sharp constants --

Criterion sharp_constant_formulas() {
    const double e = std::exp(1.0);
    double dev = 0.0;
    auto track = [&](double value, double expected) {
        dev = std::max(dev, std::abs(value - expected));
    };
    track(truncmax::sharp_l1_norm(TruncationParams::scalar(3, 0.7, 0.7)), 1.0);
    track(truncmax::sharp_l1_norm(TruncationParams::scalar(1, 1.0, e)), 2.0);
    track(truncmax::sharp_l1_norm(TruncationParams::strong({1.0, 1.0}, {e, e})), 4.0);
    track(truncmax::sharp_l1_norm(TruncationParams::general({2}, {1.0}, {e})), 3.0);

    Criterion c{"sharp-constant formulas", dev <= 1e-12,
                "max deviation " + fmt(dev, 3) + " (tol 1e-12)"};
    return c;
}

// ------------------------------------------- 2-4: convergence of ratios --

struct StudyOutcome {
    std::vector<truncmax::ConvergenceRecord> records;
    double elapsed = 0.0;
};

StudyOutcome run_study(const TruncationParams& p, const std::vector<double>& m_list, double h,
                       int radii) {
    truncmax::StudyConfig cfg;
    cfg.params = p;
    cfg.m_list = m_list;
    cfg.h_list = {h};
    cfg.radii_count = radii;
    const auto t0 = std::chrono::steady_clock::now();
    StudyOutcome out;
    out.records = truncmax::convergence_study(cfg);
    out.elapsed = seconds_since(t0);
    return out;
}

Criterion scalar_convergence(const StudyOutcome& s) {
    bool ok = s.elapsed < 60.0;
    std::string ratios;
    for (const auto& r : s.records) {
        ok = ok && r.ratio >= r.w_norm - 0.02 && r.ratio <= 2.0 + 0.02;
        ratios += (ratios.empty() ? "" : ", ") + fmt(r.ratio);
    }
    const double last = s.records.back().ratio;
    ok = ok && std::abs(last - 2.0) <= 0.02 * 2.0;
    return Criterion{"scalar convergence (n=1, b/a=e)", ok,
                     "ratios [" + ratios + "] vs sharp 2, " + fmt(s.elapsed, 3) + " s"};
}

Criterion bounded_ratio(const char* name, const StudyOutcome& s, double sharp, double rel_tol,
                        double time_budget) {
    const double ratio = s.records.back().ratio;
    const bool ok = std::abs(ratio - sharp) <= rel_tol * sharp && s.elapsed < time_budget;
    return Criterion{name, ok,
                     "ratio " + fmt(ratio) + " vs sharp " + fmt(sharp) + " (tol " +
                         fmt(rel_tol * sharp, 3) + "), " + fmt(s.elapsed, 3) + " s"};
}

// ------------------------------------------------- 5: control functions --

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
    const std::int64_t lim1 = n >= 2 ? half : 0, lim2 = n >= 3 ? half : 0;

    truncmax::CompensatedSum acc;
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

Criterion control_closed_forms() {
    const std::vector<TruncationParams> quadrature_params = {
        TruncationParams::scalar(1, 0.3, 1.5),
        TruncationParams::strong({0.2, 0.25}, {1.6, 2.0}),
        TruncationParams::general({2}, {0.25}, {1.0})};
    double worst_rel = 0.0;
    for (const auto& p : quadrature_params) {
        const double h = p.min_a() / 200.0;
        for (const auto& c :
             {truncmax::make_control_u(p, 0.05), truncmax::make_control_w(p, 10.0 / p.min_a())}) {
            const double closed = truncmax::control_l1_norm(c);
            const double quad = control_grid_quadrature(c, h);
            worst_rel = std::max(worst_rel, std::abs(closed - quad) / quad);
        }
    }

    const std::vector<TruncationParams> limit_params = {
        TruncationParams::scalar(1, 1.0, 2.0), TruncationParams::scalar(3, 0.4, 0.9),
        TruncationParams::strong({0.3, 0.4}, {0.5, 0.8}),
        TruncationParams::general({2, 1}, {0.3, 0.5}, {0.66, 1.0})};
    double worst_limit = 0.0;
    for (const auto& p : limit_params) {
        const double sharp = truncmax::sharp_l1_norm(p);
        worst_limit = std::max(
            worst_limit,
            std::abs(truncmax::control_l1_norm(truncmax::make_control_u(p, 0.0)) - sharp) / sharp);
        worst_limit = std::max(
            worst_limit,
            std::abs(truncmax::control_l1_norm(truncmax::make_control_w(p, kInf)) - sharp) / sharp);
    }

    const bool ok = worst_rel <= 1e-3 && worst_limit <= 1e-9;
    return Criterion{"control-function closed forms", ok,
                     "quadrature rel dev " + fmt(worst_rel, 3) + " (tol 1e-3), limit rel dev " +
                         fmt(worst_limit, 3) + " (tol 1e-9)"};
}

// ----------------------------------------------------- 6: radial series --

Criterion radial_series_oracle() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> ua(0.1, 2.0);
    std::uniform_real_distribution<double> utheta(1.01, 20.0);
    std::uniform_real_distribution<double> ufrac(0.0, 1.0);
    std::uniform_int_distribution<int> un(2, 4);

    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = un(rng);
        const double a = ua(rng);
        const double b = a * utheta(rng);

        const double s = 0.5 * a * ufrac(rng);
        const double xa = std::sqrt(static_cast<double>(n)) * s;
        const double ia = testsupport::adaptive_simpson(
            [&](double r) { return n * std::pow(r + xa, n - 1) / std::pow(r, n); }, a, b, 1e-13);
        const double ca = n * (std::log(b / a) + truncmax::series_a(s, a, b, n));
        worst = std::max(worst, std::abs(ca - ia) / std::abs(ia));

        const double m = (10.0 + 190.0 * ufrac(rng)) / a;
        const double xb = -1.0 / m;
        const double ib = testsupport::adaptive_simpson(
            [&](double r) { return n * std::pow(r + xb, n - 1) / std::pow(r, n); }, a, b, 1e-13);
        const double cb = n * (std::log(b / a) + truncmax::series_b(m, a, b, n));
        worst = std::max(worst, std::abs(cb - ib) / std::abs(ib));
    }
    return Criterion{"radial-series closed forms", worst <= 1e-9,
                     "100 draws each way, worst rel dev " + fmt(worst, 3) + " (tol 1e-9)"};
}

// ------------------------------------------------- 7: oracle equivalence --

Criterion oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = truncmax::oracle_equivalence_suite(20240501, 50);
    const double sec = seconds_since(t0);
    return Criterion{"kernel vs brute-force equivalence", r.pass && sec < 120.0,
                     r.detail + ", " + fmt(sec, 3) + " s"};
}

// -------------------------------------------------- 8: property suites --

Criterion property_suites() {
    bool ok = true;
    std::string detail;

    const auto crude = truncmax::crude_bound_suite(8, 12);
    ok = ok && crude.pass;
    detail += "crude: " + crude.detail;

    const auto rearr = truncmax::rearrangement_suite(TruncationParams::scalar(1, 0.5, 1.0),
                                                     1.0 / 16.0, 8, 100, 21);
    ok = ok && rearr.pass;
    detail += "; rearrangement: " + rearr.detail;

    // Nesting, sublinearity, scaling on one random plane instance.
    const auto spec = truncmax::make_centered_grid_spec(2, 1.0 / 16.0, 32);
    GridFunction f = truncmax::make_zero_grid_function(spec);
    GridFunction g = truncmax::make_zero_grid_function(spec);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : f.values) v = u(rng);
    for (double& v : g.values) v = u(rng);

    const auto inner = TruncationParams::scalar(2, 0.3, 0.5);
    const auto outer = TruncationParams::scalar(2, 0.25, 0.7);
    const GridFunction mi =
        truncmax::truncated_max_with_samples(f, inner, {{0.3, 0.5}});
    const GridFunction mo =
        truncmax::truncated_max_with_samples(f, outer, {{0.25, 0.3, 0.5, 0.7}});
    std::int64_t nesting_bad = 0;
    for (std::size_t i = 0; i < mi.values.size(); ++i)
        nesting_bad += (mo.values[i] < mi.values[i] - 1e-12 * std::max(1.0, mi.values[i]));

    const auto p = TruncationParams::scalar(2, 0.3, 0.6);
    const auto samples = truncmax::make_radius_samples(p, RadiiResolution{4});
    GridFunction sum = truncmax::make_zero_grid_function(spec);
    GridFunction scaled = truncmax::make_zero_grid_function(spec);
    for (std::size_t i = 0; i < sum.values.size(); ++i) {
        sum.values[i] = f.values[i] + g.values[i];
        scaled.values[i] = 2.375 * f.values[i];
    }
    const GridFunction mf = truncmax::truncated_max_with_samples(f, p, samples);
    const GridFunction mg = truncmax::truncated_max_with_samples(g, p, samples);
    const GridFunction ms = truncmax::truncated_max_with_samples(sum, p, samples);
    const GridFunction mc = truncmax::truncated_max_with_samples(scaled, p, samples);
    std::int64_t sublinear_bad = 0, scaling_bad = 0;
    for (std::size_t i = 0; i < ms.values.size(); ++i) {
        sublinear_bad += (ms.values[i] > mf.values[i] + mg.values[i] + 1e-12);
        scaling_bad += (std::abs(mc.values[i] - 2.375 * mf.values[i]) >
                        1e-12 * std::max(1.0, std::abs(mc.values[i])));
    }
    ok = ok && nesting_bad == 0 && sublinear_bad == 0 && scaling_bad == 0;
    detail += "; nesting/sublinearity/scaling violations " + std::to_string(nesting_bad) + "/" +
              std::to_string(sublinear_bad) + "/" + std::to_string(scaling_bad);

    return Criterion{"property suites", ok, detail};
}

// ------------------------------------------- 9: sandwich restatement --

Criterion sandwich_note(const StudyOutcome& scalar_s, const StudyOutcome& strong_s,
                        const StudyOutcome& general_s) {
    bool ok = true;
    auto check = [&](const StudyOutcome& s, double slack) {
        for (const auto& r : s.records) {
            ok = ok && r.w_norm <= r.sharp && r.sharp <= r.crude;
            ok = ok && r.ratio >= r.w_norm - slack && r.ratio <= r.sharp + slack;
        }
    };
    check(scalar_s, 0.02);
    check(strong_s, 0.05 * 4.0);
    check(general_s, 0.05 * 3.0);
    return Criterion{
        "sandwich bracketing of criteria 2-4", ok,
        "finite grids cannot hit the limit constants exactly; every ratio sits in "
        "[lower envelope - slack, sharp + slack]"};
}

}  // namespace

int main() {
    const double e = std::exp(1.0);
    std::vector<Criterion> results;

    results.push_back(sharp_constant_formulas());

    const StudyOutcome scalar_s = run_study(TruncationParams::scalar(1, 1.0, e),
                                            {8.0, 16.0, 32.0, 64.0}, 1.0 / 512.0, 128);
    results.push_back(scalar_convergence(scalar_s));

    const StudyOutcome strong_s =
        run_study(TruncationParams::strong({1.0, 1.0}, {e, e}), {32.0}, 1.0 / 128.0, 32);
    results.push_back(bounded_ratio("strong convergence (2d, b/a=e)", strong_s, 4.0, 0.05, 300.0));

    const StudyOutcome general_s =
        run_study(TruncationParams::general({2}, {1.0}, {e}), {32.0}, 1.0 / 128.0, 32);
    results.push_back(
        bounded_ratio("general convergence (one 2d factor)", general_s, 3.0, 0.05, 300.0));

    results.push_back(control_closed_forms());
    results.push_back(radial_series_oracle());
    results.push_back(oracle_equivalence());
    results.push_back(property_suites());
    results.push_back(sandwich_note(scalar_s, strong_s, general_s));

    int failures = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& c = results[i];
        failures += !c.pass;
        std::printf("[%zu/9] %s  %s (%s)\n", i + 1, c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
    }
    std::printf("%s: %d/9 criteria passed\n", failures == 0 ? "OK" : "FAILED",
                9 - failures);
    return failures == 0 ? 0 : 1;
}
