#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "truncmax/accumulate.hpp"
#include "truncmax/errors.hpp"
#include "truncmax/geometry.hpp"
#include "truncmax/grid.hpp"
#include "truncmax/parallel.hpp"
#include "truncmax/params.hpp"

namespace truncmax {

namespace detail {

// ------------------------------------------------------------- membership --
// Every kernel and the brute-force oracle share one membership rule stated in
// integer cell offsets, so optimized and direct summation see the same cells:
//   1-D factor of radius r:   |d|       <= floor(r/h)
//   m-D factor of radius r:   sum d_i^2 <= (r/h)^2

inline std::int64_t half_width_cells(double r, double h) {
    return static_cast<std::int64_t>(std::floor(r / h));
}

inline double radius_cells_sq(double r, double h) {
    const double t = r / h;
    return t * t;
}

/// Largest q >= 0 with q^2 <= limit; -1 when limit < 0.  Exact for the cell
/// counts representable here (q well below 2^26).
inline std::int64_t isqrt_floor(double limit) {
    if (limit < 0.0) return -1;
    auto q = static_cast<std::int64_t>(std::floor(std::sqrt(limit)));
    while (static_cast<double>(q + 1) * static_cast<double>(q + 1) <= limit) ++q;
    while (q > 0 && static_cast<double>(q) * static_cast<double>(q) > limit) --q;
    return q;
}

// ------------------------------------------------------------ common bits --

inline void check_operator_input(const GridFunction& f, const TruncationParams& p,
                                 const std::vector<std::vector<double>>& samples) {
    require(p.total_dim() == f.spec.n,
            "operator: params cover dimension " + std::to_string(p.total_dim()) +
                " but the grid has n = " + std::to_string(f.spec.n));
    require(p.factor_count() >= 1 &&
                p.factor_count() == static_cast<int>(samples.size()),
            "operator: need one sample list per factor");
    for (const auto& list : samples) {
        require(!list.empty(), "operator: empty radius sample list");
        double prev = 0.0;
        for (double r : list) {
            require(std::isfinite(r) && r > 0.0 && r >= prev,
                    "operator: radius samples must be positive and ascending");
            prev = r;
        }
    }
}

struct SupportBox {
    bool empty = true;
    std::array<std::int64_t, 3> lo{0, 0, 0};
    std::array<std::int64_t, 3> hi{-1, -1, -1};
    std::int64_t nonzero = 0;
};

inline SupportBox support_box(const GridFunction& f) {
    SupportBox box;
    const GridSpec& g = f.spec;
    const std::int64_t c1 = g.axis_cells(1), c2 = g.axis_cells(2);
    std::int64_t idx = 0;
    for (std::int64_t i0 = 0; i0 < g.axis_cells(0); ++i0)
        for (std::int64_t i1 = 0; i1 < c1; ++i1)
            for (std::int64_t i2 = 0; i2 < c2; ++i2, ++idx) {
                if (f.values[static_cast<std::size_t>(idx)] == 0.0) continue;
                const std::int64_t c[3] = {i0, i1, i2};
                if (box.empty) {
                    for (int d = 0; d < 3; ++d) box.lo[d] = box.hi[d] = c[d];
                    box.empty = false;
                } else {
                    for (int d = 0; d < 3; ++d) {
                        box.lo[d] = std::min(box.lo[d], c[d]);
                        box.hi[d] = std::max(box.hi[d], c[d]);
                    }
                }
                ++box.nonzero;
            }
    return box;
}

/// Per-factor sample geometry in cell units.
struct FactorSamples {
    int dim = 1;
    std::vector<double> radius;
    std::vector<std::int64_t> width;  // dim == 1: exact half widths
    std::vector<double> rsq;          // dim >= 2: squared radii
    std::int64_t max_bound = 0;       // axis bound of the largest sample
};

inline std::vector<FactorSamples> factor_samples(const TruncationParams& p,
                                                 const std::vector<std::vector<double>>& samples,
                                                 double h) {
    std::vector<FactorSamples> out(p.factors.size());
    for (std::size_t i = 0; i < p.factors.size(); ++i) {
        FactorSamples& fs = out[i];
        fs.dim = p.factors[i].dim;
        fs.radius = samples[i];
        for (double r : samples[i]) {
            if (fs.dim == 1) {
                fs.width.push_back(half_width_cells(r, h));
            } else {
                fs.rsq.push_back(radius_cells_sq(r, h));
            }
        }
        fs.max_bound = fs.dim == 1 ? fs.width.back() : isqrt_floor(fs.rsq.back());
    }
    return out;
}

/// One radius choice per factor: sample indices plus the analytic denominator
/// prod_i V_{n_i} r_i^{n_i}.  Combos enumerate the Cartesian product with
/// factor 0 slowest.
struct Combo {
    std::array<int, 3> idx{0, 0, 0};
    double denom = 1.0;
};

inline std::vector<Combo> enumerate_combos(const TruncationParams& p,
                                           const std::vector<std::vector<double>>& samples) {
    const int k = p.factor_count();
    std::vector<Combo> combos;
    std::int64_t total = 1;
    for (const auto& list : samples) total *= static_cast<std::int64_t>(list.size());
    combos.reserve(static_cast<std::size_t>(total));
    std::array<int, 3> idx{0, 0, 0};
    while (true) {
        Combo c;
        c.idx = idx;
        for (int i = 0; i < k; ++i) {
            const double r = samples[static_cast<std::size_t>(i)][static_cast<std::size_t>(idx[i])];
            c.denom *= ball_volume(p.factors[static_cast<std::size_t>(i)].dim) *
                       std::pow(r, p.factors[static_cast<std::size_t>(i)].dim);
        }
        combos.push_back(c);
        int a = k - 1;
        while (a >= 0) {
            if (++idx[a] < static_cast<int>(samples[static_cast<std::size_t>(a)].size())) break;
            idx[a] = 0;
            --a;
        }
        if (a < 0) break;
    }
    return combos;
}

inline std::vector<int> axis_owner(const TruncationParams& p) {
    std::vector<int> owner;
    for (int i = 0; i < p.factor_count(); ++i)
        for (int d = 0; d < p.factors[static_cast<std::size_t>(i)].dim; ++d) owner.push_back(i);
    return owner;
}

// --------------------------------------------------------- dense stencils --
// A product-of-balls stencil, decomposed into contiguous runs along the last
// grid axis: leading offsets (d0[, d1]) plus a run half-width.  Run sums are
// read from per-line prefix sums in O(1).

struct StencilRow {
    std::int32_t d0;
    std::int32_t d1;
    std::int64_t dline;  // displacement in line index space
    std::int32_t run;
};

inline void build_stencil_rows(const std::vector<int>& owner,
                               const std::vector<FactorSamples>& fs, const Combo& combo,
                               const GridSpec& g, std::vector<StencilRow>& rows) {
    const int n = g.n;
    const std::int64_t c1 = g.axis_cells(1);
    std::array<double, 3> partial{0.0, 0.0, 0.0};  // per-factor sum of squares
    std::array<std::int32_t, 2> lead{0, 0};

    auto run_for_last = [&](int fi) -> std::int64_t {
        if (fs[static_cast<std::size_t>(fi)].dim == 1)
            return fs[static_cast<std::size_t>(fi)]
                .width[static_cast<std::size_t>(combo.idx[fi])];
        const double rem = fs[static_cast<std::size_t>(fi)]
                               .rsq[static_cast<std::size_t>(combo.idx[fi])] -
                           partial[static_cast<std::size_t>(fi)];
        return isqrt_floor(rem);
    };

    auto emit = [&]() {
        const std::int64_t run = run_for_last(owner[static_cast<std::size_t>(n - 1)]);
        if (run < 0) return;
        StencilRow row;
        row.d0 = lead[0];
        row.d1 = lead[1];
        row.dline = n == 3 ? static_cast<std::int64_t>(lead[0]) * c1 + lead[1]
                           : static_cast<std::int64_t>(lead[0]);
        row.run = static_cast<std::int32_t>(run);
        rows.push_back(row);
    };

    auto bound_for_axis = [&](int axis) -> std::int64_t {
        const int fi = owner[static_cast<std::size_t>(axis)];
        if (fs[static_cast<std::size_t>(fi)].dim == 1)
            return fs[static_cast<std::size_t>(fi)]
                .width[static_cast<std::size_t>(combo.idx[fi])];
        return isqrt_floor(fs[static_cast<std::size_t>(fi)]
                               .rsq[static_cast<std::size_t>(combo.idx[fi])] -
                           partial[static_cast<std::size_t>(fi)]);
    };

    if (n == 1) {
        emit();
        return;
    }
    const std::int64_t b0 = bound_for_axis(0);
    for (std::int64_t d0 = -b0; d0 <= b0; ++d0) {
        lead[0] = static_cast<std::int32_t>(d0);
        const int f0 = owner[0];
        const double sq0 = static_cast<double>(d0) * static_cast<double>(d0);
        partial[static_cast<std::size_t>(f0)] += sq0;
        if (n == 2) {
            emit();
        } else {
            const std::int64_t b1 = bound_for_axis(1);
            const int f1 = owner[1];
            for (std::int64_t d1 = -b1; d1 <= b1; ++d1) {
                lead[1] = static_cast<std::int32_t>(d1);
                const double sq1 = static_cast<double>(d1) * static_cast<double>(d1);
                partial[static_cast<std::size_t>(f1)] += sq1;
                emit();
                partial[static_cast<std::size_t>(f1)] -= sq1;
            }
            lead[1] = 0;
        }
        partial[static_cast<std::size_t>(f0)] -= sq0;
    }
}

/// Prefix sums along the last axis, one compensated pass per line; entry 0 of
/// each line is 0 so a run sum is pref[hi + 1] - pref[lo].
inline std::vector<double> last_axis_prefix(const GridFunction& f) {
    const std::int64_t cl = f.spec.axis_cells(f.spec.n - 1);
    const std::int64_t lines = f.spec.total_cells() / cl;
    std::vector<double> pref(static_cast<std::size_t>(lines * (cl + 1)));
    for (std::int64_t line = 0; line < lines; ++line) {
        const double* src = f.values.data() + line * cl;
        double* dst = pref.data() + line * (cl + 1);
        CompensatedSum acc;
        dst[0] = 0.0;
        for (std::int64_t j = 0; j < cl; ++j) {
            acc.add(src[j]);
            dst[j + 1] = acc.value();
        }
    }
    return pref;
}

// ------------------------------------------------------------ product max --

inline bool window_misses_support(const GridSpec& g, const SupportBox& box,
                                  const std::array<std::int64_t, 3>& cell,
                                  const std::array<std::int64_t, 3>& wmax) {
    for (int d = 0; d < g.n; ++d)
        if (cell[static_cast<std::size_t>(d)] + wmax[static_cast<std::size_t>(d)] <
                box.lo[static_cast<std::size_t>(d)] ||
            cell[static_cast<std::size_t>(d)] - wmax[static_cast<std::size_t>(d)] >
                box.hi[static_cast<std::size_t>(d)])
            return true;
    return false;
}

inline std::array<std::int64_t, 3> max_axis_bounds(const TruncationParams& p,
                                                   const std::vector<int>& owner,
                                                   const std::vector<FactorSamples>& fs) {
    std::array<std::int64_t, 3> wmax{0, 0, 0};
    for (int d = 0; d < p.total_dim(); ++d)
        wmax[static_cast<std::size_t>(d)] =
            fs[static_cast<std::size_t>(owner[static_cast<std::size_t>(d)])].max_bound;
    return wmax;
}

/// Stencil-table kernel: per combo, precomputed rows swept over every cell.
inline GridFunction product_max_dense(const GridFunction& f, const TruncationParams& p,
                                      const std::vector<std::vector<double>>& samples,
                                      int threads) {
    const GridSpec& g = f.spec;
    const int n = g.n;
    const std::int64_t c0 = g.axis_cells(0), c1 = g.axis_cells(1);
    const std::int64_t cl = g.axis_cells(n - 1);
    const std::int64_t lines = g.total_cells() / cl;
    const double hn = g.cell_volume();

    GridFunction out = make_zero_grid_function(g);
    const SupportBox box = support_box(f);
    if (box.empty) return out;

    const std::vector<int> owner = axis_owner(p);
    const std::vector<FactorSamples> fs = factor_samples(p, samples, g.h);
    const std::vector<Combo> combos = enumerate_combos(p, samples);
    const std::array<std::int64_t, 3> wmax = max_axis_bounds(p, owner, fs);

    std::vector<StencilRow> rows;
    std::vector<std::pair<std::size_t, std::size_t>> combo_rows;  // [begin, end) in rows
    combo_rows.reserve(combos.size());
    for (const Combo& c : combos) {
        const std::size_t begin = rows.size();
        build_stencil_rows(owner, fs, c, g, rows);
        combo_rows.emplace_back(begin, rows.size());
    }

    const std::vector<double> pref = last_axis_prefix(f);
    const std::int64_t pstride = cl + 1;

    parallel_for(0, lines, threads, [&](std::int64_t lo_line, std::int64_t hi_line) {
        for (std::int64_t line = lo_line; line < hi_line; ++line) {
            const std::int64_t i0 = n == 3 ? line / c1 : line;
            const std::int64_t i1 = n == 3 ? line % c1 : 0;
            double* dst = out.values.data() + line * cl;
            for (std::int64_t j = 0; j < cl; ++j) {
                std::array<std::int64_t, 3> cell{i0, i1, j};
                if (n == 1) cell = {j, 0, 0};
                else if (n == 2) cell = {i0, j, 0};
                if (window_misses_support(g, box, cell, wmax)) continue;

                double best = 0.0;
                for (std::size_t ci = 0; ci < combos.size(); ++ci) {
                    double acc = 0.0;
                    for (std::size_t ri = combo_rows[ci].first; ri < combo_rows[ci].second; ++ri) {
                        const StencilRow& row = rows[ri];
                        if (n >= 2) {
                            const std::int64_t a0 = i0 + row.d0;
                            if (a0 < 0 || a0 >= c0) continue;
                            if (n == 3) {
                                const std::int64_t a1 = i1 + row.d1;
                                if (a1 < 0 || a1 >= c1) continue;
                            }
                        }
                        const std::int64_t seg_lo = std::max<std::int64_t>(j - row.run, 0);
                        const std::int64_t seg_hi = std::min<std::int64_t>(j + row.run, cl - 1);
                        if (seg_lo > seg_hi) continue;
                        const double* pl = pref.data() + (line + row.dline) * pstride;
                        acc += pl[seg_hi + 1] - pl[seg_lo];
                    }
                    if (acc > 0.0) {
                        const double val = acc * hn / combos[ci].denom;
                        if (val > best) best = val;
                    }
                }
                dst[j] = best;
            }
        }
    });
    return out;
}

/// Small-support kernel: gathers the nonzero cells once per output cell and
/// bins them by the smallest covering sample per factor; cumulative sums over
/// the sample lattice then give every combo's mass.  Same membership rule and
/// denominators as the dense path.
inline GridFunction product_max_sparse(const GridFunction& f, const TruncationParams& p,
                                       const std::vector<std::vector<double>>& samples,
                                       int threads) {
    const GridSpec& g = f.spec;
    const int n = g.n;
    const int k = p.factor_count();
    const double hn = g.cell_volume();

    GridFunction out = make_zero_grid_function(g);
    const SupportBox box = support_box(f);
    if (box.empty) return out;

    const std::vector<int> owner = axis_owner(p);
    const std::vector<FactorSamples> fs = factor_samples(p, samples, g.h);
    const std::vector<Combo> combos = enumerate_combos(p, samples);
    const std::array<std::int64_t, 3> wmax = max_axis_bounds(p, owner, fs);

    struct Point {
        std::array<std::int64_t, 3> c;
        double v;
    };
    std::vector<Point> support;
    support.reserve(static_cast<std::size_t>(box.nonzero));
    {
        std::int64_t idx = 0;
        for (std::int64_t i0 = 0; i0 < g.axis_cells(0); ++i0)
            for (std::int64_t i1 = 0; i1 < g.axis_cells(1); ++i1)
                for (std::int64_t i2 = 0; i2 < g.axis_cells(2); ++i2, ++idx) {
                    const double v = f.values[static_cast<std::size_t>(idx)];
                    if (v != 0.0) support.push_back(Point{{i0, i1, i2}, v});
                }
    }

    std::array<int, 3> counts{1, 1, 1};
    std::array<std::int64_t, 3> stride{1, 1, 1};
    for (int i = 0; i < k; ++i) counts[static_cast<std::size_t>(i)] =
        static_cast<int>(samples[static_cast<std::size_t>(i)].size());
    stride[static_cast<std::size_t>(k - 1)] = 1;
    for (int i = k - 2; i >= 0; --i)
        stride[static_cast<std::size_t>(i)] = stride[static_cast<std::size_t>(i + 1)] *
                                              counts[static_cast<std::size_t>(i + 1)];
    std::int64_t lattice = 1;
    for (int i = 0; i < k; ++i) lattice *= counts[static_cast<std::size_t>(i)];

    const std::int64_t cl = g.axis_cells(n - 1);
    const std::int64_t lines = g.total_cells() / cl;
    const std::int64_t c1 = g.axis_cells(1);

    parallel_for(0, lines, threads, [&](std::int64_t lo_line, std::int64_t hi_line) {
        std::vector<double> bucket(static_cast<std::size_t>(lattice));
        for (std::int64_t line = lo_line; line < hi_line; ++line) {
            const std::int64_t i0 = n == 3 ? line / c1 : line;
            const std::int64_t i1 = n == 3 ? line % c1 : 0;
            double* dst = out.values.data() + line * cl;
            for (std::int64_t j = 0; j < cl; ++j) {
                std::array<std::int64_t, 3> cell{i0, i1, j};
                if (n == 1) cell = {j, 0, 0};
                else if (n == 2) cell = {i0, j, 0};
                if (window_misses_support(g, box, cell, wmax)) continue;

                std::fill(bucket.begin(), bucket.end(), 0.0);
                for (const Point& pt : support) {
                    std::int64_t flat = 0;
                    bool inside = true;
                    int axis = 0;
                    for (int fi = 0; fi < k && inside; ++fi) {
                        const FactorSamples& fsi = fs[static_cast<std::size_t>(fi)];
                        int idx;
                        if (fsi.dim == 1) {
                            std::int64_t d = pt.c[static_cast<std::size_t>(axis)] -
                                             cell[static_cast<std::size_t>(axis)];
                            if (d < 0) d = -d;
                            const auto it =
                                std::lower_bound(fsi.width.begin(), fsi.width.end(), d);
                            if (it == fsi.width.end()) { inside = false; break; }
                            idx = static_cast<int>(it - fsi.width.begin());
                        } else {
                            double dsq = 0.0;
                            for (int t = 0; t < fsi.dim; ++t) {
                                const double d = static_cast<double>(
                                    pt.c[static_cast<std::size_t>(axis + t)] -
                                    cell[static_cast<std::size_t>(axis + t)]);
                                dsq += d * d;
                            }
                            const auto it = std::lower_bound(fsi.rsq.begin(), fsi.rsq.end(), dsq);
                            if (it == fsi.rsq.end()) { inside = false; break; }
                            idx = static_cast<int>(it - fsi.rsq.begin());
                        }
                        flat += static_cast<std::int64_t>(idx) * stride[static_cast<std::size_t>(fi)];
                        axis += fsi.dim;
                    }
                    if (inside) bucket[static_cast<std::size_t>(flat)] += pt.v;
                }

                // Cumulate along each factor axis of the sample lattice.
                for (int fi = 0; fi < k; ++fi) {
                    const std::int64_t s = stride[static_cast<std::size_t>(fi)];
                    const int cnt = counts[static_cast<std::size_t>(fi)];
                    for (std::int64_t base = 0; base < lattice; ++base) {
                        const std::int64_t pos = (base / s) % cnt;
                        if (pos > 0) bucket[static_cast<std::size_t>(base)] +=
                            bucket[static_cast<std::size_t>(base - s)];
                    }
                }

                double best = 0.0;
                for (std::int64_t c = 0; c < lattice; ++c) {
                    const double mass = bucket[static_cast<std::size_t>(c)];
                    if (mass <= 0.0) continue;
                    const double val = mass * hn / combos[static_cast<std::size_t>(c)].denom;
                    if (val > best) best = val;
                }
                dst[j] = best;
            }
        }
    });
    return out;
}

// ------------------------------------------------------- summed-area table --

struct Sat {
    std::vector<double> data;
    std::array<std::int64_t, 3> stride{0, 0, 1};
    std::array<std::int64_t, 3> dims{0, 0, 0};  // cells + 1 per axis

    double at(std::int64_t i0, std::int64_t i1, std::int64_t i2) const {
        return data[static_cast<std::size_t>(i0 * stride[0] + i1 * stride[1] + i2)];
    }
};

/// Summed-area table with a zero border, built by one compensated prefix pass
/// per axis.
inline Sat build_sat(const GridFunction& f) {
    const GridSpec& g = f.spec;
    Sat sat;
    for (int d = 0; d < 3; ++d) sat.dims[static_cast<std::size_t>(d)] = g.axis_cells(d) + 1;
    sat.stride[2] = 1;
    sat.stride[1] = sat.dims[2];
    sat.stride[0] = sat.dims[1] * sat.dims[2];
    sat.data.assign(static_cast<std::size_t>(sat.dims[0] * sat.stride[0]), 0.0);

    const std::int64_t c0 = g.axis_cells(0), c1 = g.axis_cells(1), c2 = g.axis_cells(2);
    for (std::int64_t i0 = 0; i0 < c0; ++i0)
        for (std::int64_t i1 = 0; i1 < c1; ++i1)
            for (std::int64_t i2 = 0; i2 < c2; ++i2)
                sat.data[static_cast<std::size_t>((i0 + 1) * sat.stride[0] +
                                                  (i1 + 1) * sat.stride[1] + (i2 + 1))] =
                    f.values[static_cast<std::size_t>(g.flat_index(i0, i1, i2))];

    for (std::int64_t i0 = 1; i0 < sat.dims[0]; ++i0)
        for (std::int64_t i1 = 1; i1 < sat.dims[1]; ++i1) {
            CompensatedSum acc;
            double* row = sat.data.data() + i0 * sat.stride[0] + i1 * sat.stride[1];
            for (std::int64_t i2 = 1; i2 < sat.dims[2]; ++i2) {
                acc.add(row[i2]);
                row[i2] = acc.value();
            }
        }
    for (std::int64_t i0 = 1; i0 < sat.dims[0]; ++i0)
        for (std::int64_t i2 = 1; i2 < sat.dims[2]; ++i2) {
            CompensatedSum acc;
            double* col = sat.data.data() + i0 * sat.stride[0] + i2;
            for (std::int64_t i1 = 1; i1 < sat.dims[1]; ++i1) {
                acc.add(col[i1 * sat.stride[1]]);
                col[i1 * sat.stride[1]] = acc.value();
            }
        }
    for (std::int64_t i1 = 1; i1 < sat.dims[1]; ++i1)
        for (std::int64_t i2 = 1; i2 < sat.dims[2]; ++i2) {
            CompensatedSum acc;
            double* pil = sat.data.data() + i1 * sat.stride[1] + i2;
            for (std::int64_t i0 = 1; i0 < sat.dims[0]; ++i0) {
                acc.add(pil[i0 * sat.stride[0]]);
                pil[i0 * sat.stride[0]] = acc.value();
            }
        }
    return sat;
}

/// Sum of f over the clipped cell box [lo, hi] by inclusion-exclusion.
inline double sat_box_sum(const Sat& sat, const std::array<std::int64_t, 3>& lo,
                          const std::array<std::int64_t, 3>& hi) {
    const std::int64_t a0 = lo[0], b0 = hi[0] + 1;
    const std::int64_t a1 = lo[1], b1 = hi[1] + 1;
    const std::int64_t a2 = lo[2], b2 = hi[2] + 1;
    return sat.at(b0, b1, b2) - sat.at(a0, b1, b2) - sat.at(b0, a1, b2) - sat.at(b0, b1, a2) +
           sat.at(a0, a1, b2) + sat.at(a0, b1, a2) + sat.at(b0, a1, a2) - sat.at(a0, a1, a2);
}

/// Rectangle kernel: one summed-area table per input, O(1) per window query,
/// swept over the full Cartesian product of per-axis half-side samples.
inline GridFunction strong_max_sat(const GridFunction& f, const TruncationParams& p,
                                   const std::vector<std::vector<double>>& samples,
                                   int threads) {
    const GridSpec& g = f.spec;
    const int n = g.n;
    const double hn = g.cell_volume();

    GridFunction out = make_zero_grid_function(g);
    const SupportBox box = support_box(f);
    if (box.empty) return out;

    const std::vector<int> owner = axis_owner(p);
    const std::vector<FactorSamples> fs = factor_samples(p, samples, g.h);
    const std::vector<Combo> combos = enumerate_combos(p, samples);
    const std::array<std::int64_t, 3> wmax = max_axis_bounds(p, owner, fs);

    // Rectangle measure prod 2 s_i replaces the generic ball denominator.
    std::vector<Combo> rect_combos = combos;
    for (Combo& c : rect_combos) {
        c.denom = 1.0;
        for (int i = 0; i < n; ++i)
            c.denom *= 2.0 * samples[static_cast<std::size_t>(i)]
                                 [static_cast<std::size_t>(c.idx[static_cast<std::size_t>(i)])];
    }
    std::vector<std::array<std::int64_t, 3>> widths(rect_combos.size(), {0, 0, 0});
    for (std::size_t ci = 0; ci < rect_combos.size(); ++ci)
        for (int d = 0; d < n; ++d)
            widths[ci][static_cast<std::size_t>(d)] =
                fs[static_cast<std::size_t>(d)]
                    .width[static_cast<std::size_t>(rect_combos[ci].idx[static_cast<std::size_t>(d)])];

    const Sat sat = build_sat(f);
    const std::int64_t cl = g.axis_cells(n - 1);
    const std::int64_t lines = g.total_cells() / cl;
    const std::int64_t c1 = g.axis_cells(1);

    parallel_for(0, lines, threads, [&](std::int64_t lo_line, std::int64_t hi_line) {
        for (std::int64_t line = lo_line; line < hi_line; ++line) {
            const std::int64_t i0 = n == 3 ? line / c1 : line;
            const std::int64_t i1 = n == 3 ? line % c1 : 0;
            double* dst = out.values.data() + line * cl;
            for (std::int64_t j = 0; j < cl; ++j) {
                std::array<std::int64_t, 3> cell{i0, i1, j};
                if (n == 1) cell = {j, 0, 0};
                else if (n == 2) cell = {i0, j, 0};
                if (window_misses_support(g, box, cell, wmax)) continue;

                double best = 0.0;
                for (std::size_t ci = 0; ci < rect_combos.size(); ++ci) {
                    std::array<std::int64_t, 3> wlo{0, 0, 0}, whi{0, 0, 0};
                    bool nonempty = true;
                    for (int d = 0; d < n; ++d) {
                        const auto dd = static_cast<std::size_t>(d);
                        wlo[dd] = std::max<std::int64_t>(cell[dd] - widths[ci][dd], 0);
                        whi[dd] = std::min<std::int64_t>(cell[dd] + widths[ci][dd],
                                                         g.axis_cells(d) - 1);
                        if (wlo[dd] > whi[dd]) { nonempty = false; break; }
                    }
                    if (!nonempty) continue;
                    const double mass = sat_box_sum(sat, wlo, whi);
                    if (mass > 0.0) {
                        const double val = mass * hn / rect_combos[ci].denom;
                        if (val > best) best = val;
                    }
                }
                dst[j] = best;
            }
        }
    });
    return out;
}

// ----------------------------------------------------------------- oracle --

/// Direct per-(cell, combo) summation over the stencil bounding box with the
/// shared membership rule; no stencil tables, prefix sums, or area tables.
/// Work = cells x sum over combos of the box volume; guarded by a budget.
inline GridFunction product_max_oracle(const GridFunction& f, const TruncationParams& p,
                                       const std::vector<std::vector<double>>& samples,
                                       double work_budget) {
    const GridSpec& g = f.spec;
    const int n = g.n;
    const int k = p.factor_count();
    const double hn = g.cell_volume();
    const std::vector<int> owner = axis_owner(p);
    const std::vector<FactorSamples> fs = factor_samples(p, samples, g.h);
    const std::vector<Combo> combos = enumerate_combos(p, samples);
    const bool strong_kind = p.kind == Kind::strong;

    // Per-combo axis bounds and (dim >= 2) factor radii.
    std::vector<std::array<std::int64_t, 3>> bounds(combos.size(), {0, 0, 0});
    std::vector<std::array<double, 3>> rsq(combos.size(), {0.0, 0.0, 0.0});
    double per_cell_work = 0.0;
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
        double vol = 1.0;
        for (int d = 0; d < n; ++d) {
            const int fi = owner[static_cast<std::size_t>(d)];
            const FactorSamples& fsi = fs[static_cast<std::size_t>(fi)];
            const int si = combos[ci].idx[fi];
            const std::int64_t b = fsi.dim == 1
                                       ? fsi.width[static_cast<std::size_t>(si)]
                                       : isqrt_floor(fsi.rsq[static_cast<std::size_t>(si)]);
            bounds[ci][static_cast<std::size_t>(d)] = b;
            vol *= static_cast<double>(2 * b + 1);
        }
        for (int fi = 0; fi < k; ++fi)
            if (fs[static_cast<std::size_t>(fi)].dim >= 2)
                rsq[ci][static_cast<std::size_t>(fi)] =
                    fs[static_cast<std::size_t>(fi)].rsq[static_cast<std::size_t>(combos[ci].idx[fi])];
        per_cell_work += vol;
    }
    const double work = per_cell_work * static_cast<double>(g.total_cells());
    if (work > work_budget)
        throw budget_error("truncated_max_oracle: estimated work " + std::to_string(work) +
                           " exceeds the budget " + std::to_string(work_budget));

    // Strong kind divides by the rectangle measure instead of ball volumes.
    std::vector<double> denom(combos.size());
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
        if (strong_kind) {
            double m = 1.0;
            for (int i = 0; i < k; ++i)
                m *= 2.0 * samples[static_cast<std::size_t>(i)]
                               [static_cast<std::size_t>(combos[ci].idx[i])];
            denom[ci] = m;
        } else {
            denom[ci] = combos[ci].denom;
        }
    }

    GridFunction out = make_zero_grid_function(g);
    const std::int64_t c0 = g.axis_cells(0), c1 = g.axis_cells(1), c2 = g.axis_cells(2);
    std::int64_t idx = 0;
    for (std::int64_t i0 = 0; i0 < c0; ++i0)
        for (std::int64_t i1 = 0; i1 < c1; ++i1)
            for (std::int64_t i2 = 0; i2 < c2; ++i2, ++idx) {
                double best = 0.0;
                for (std::size_t ci = 0; ci < combos.size(); ++ci) {
                    const auto& b = bounds[ci];
                    double acc = 0.0;
                    for (std::int64_t d0 = -b[0]; d0 <= b[0]; ++d0) {
                        const std::int64_t a0 = i0 + d0;
                        if (a0 < 0 || a0 >= c0) continue;
                        for (std::int64_t d1 = -b[1]; d1 <= b[1]; ++d1) {
                            const std::int64_t a1 = i1 + d1;
                            if (n >= 2 && (a1 < 0 || a1 >= c1)) continue;
                            for (std::int64_t d2 = -b[2]; d2 <= b[2]; ++d2) {
                                const std::int64_t a2 = i2 + d2;
                                if (n >= 3 && (a2 < 0 || a2 >= c2)) continue;
                                double sq[3] = {0.0, 0.0, 0.0};
                                const double ds[3] = {static_cast<double>(d0),
                                                      static_cast<double>(d1),
                                                      static_cast<double>(d2)};
                                for (int d = 0; d < n; ++d)
                                    sq[owner[static_cast<std::size_t>(d)]] +=
                                        ds[d] * ds[d];
                                bool inside = true;
                                for (int fi = 0; fi < k; ++fi)
                                    if (fs[static_cast<std::size_t>(fi)].dim >= 2 &&
                                        sq[fi] > rsq[ci][static_cast<std::size_t>(fi)]) {
                                        inside = false;
                                        break;
                                    }
                                if (!inside) continue;
                                acc += f.values[static_cast<std::size_t>(
                                    g.flat_index(a0, a1, a2))];
                            }
                        }
                    }
                    if (acc > 0.0) {
                        const double val = acc * hn / denom[ci];
                        if (val > best) best = val;
                    }
                }
                out.values[static_cast<std::size_t>(idx)] = best;
            }
    return out;
}

}  // namespace detail

// ------------------------------------------------------------- public API --

inline constexpr std::int64_t kSparseSupportLimit = 2048;
inline constexpr std::int64_t kSparseLatticeLimit = 16384;
inline constexpr double kDefaultOracleBudget = 3.0e8;

/// Truncated maximal average with explicit per-factor radius sample lists.
/// Sample sets are taken as given (ascending, positive); the public wrappers
/// build geometric samples from a RadiiResolution.
inline GridFunction truncated_max_with_samples(const GridFunction& f, const TruncationParams& p,
                                               const std::vector<std::vector<double>>& samples,
                                               int threads = 0) {
    detail::check_operator_input(f, p, samples);
    if (p.kind == Kind::strong) return detail::strong_max_sat(f, p, samples, threads);

    std::int64_t lattice = 1;
    for (const auto& list : samples) lattice *= static_cast<std::int64_t>(list.size());
    std::int64_t nonzero = 0;
    for (double v : f.values) nonzero += (v != 0.0);
    if (nonzero <= kSparseSupportLimit && lattice <= kSparseLatticeLimit)
        return detail::product_max_sparse(f, p, samples, threads);
    return detail::product_max_dense(f, p, samples, threads);
}

/// M_a^b f: per cell, the largest average of f over the closed balls B(x, r),
/// r running over the geometric sample set of [a, b].
inline GridFunction truncated_max(const GridFunction& f, const TruncationParams& p,
                                  RadiiResolution res, int threads = 0) {
    detail::require(p.kind == Kind::scalar, "truncated_max: params must be scalar kind");
    return truncated_max_with_samples(f, p, make_radius_samples(p, res), threads);
}

/// Strong variant: axis-parallel rectangles with independent half-sides
/// s_i in [a_i, b_i], evaluated through a summed-area table.
inline GridFunction strong_truncated_max(const GridFunction& f, const TruncationParams& p,
                                         RadiiResolution res, int threads = 0) {
    detail::require(p.kind == Kind::strong, "strong_truncated_max: params must be strong kind");
    return truncated_max_with_samples(f, p, make_radius_samples(p, res), threads);
}

/// General variant: products of balls over the factor partition, radii
/// r_i in [a_i, b_i] sampled per factor.
inline GridFunction general_truncated_max(const GridFunction& f, const TruncationParams& p,
                                          RadiiResolution res, int threads = 0) {
    detail::require(p.kind == Kind::general, "general_truncated_max: params must be general kind");
    return truncated_max_with_samples(f, p, make_radius_samples(p, res), threads);
}

/// Kind-dispatching convenience wrapper.
inline GridFunction apply_truncated_max(const GridFunction& f, const TruncationParams& p,
                                        RadiiResolution res, int threads = 0) {
    return truncated_max_with_samples(f, p, make_radius_samples(p, res), threads);
}

/// Brute-force reference: identical contract to the optimized kernels, by
/// direct summation.  Errors out when the estimated work exceeds the budget.
inline GridFunction truncated_max_oracle_with_samples(
    const GridFunction& f, const TruncationParams& p,
    const std::vector<std::vector<double>>& samples, double work_budget = kDefaultOracleBudget) {
    detail::check_operator_input(f, p, samples);
    return detail::product_max_oracle(f, p, samples, work_budget);
}

inline GridFunction truncated_max_oracle(const GridFunction& f, const TruncationParams& p,
                                         RadiiResolution res,
                                         double work_budget = kDefaultOracleBudget) {
    return truncated_max_oracle_with_samples(f, p, make_radius_samples(p, res), work_budget);
}

}  // namespace truncmax
