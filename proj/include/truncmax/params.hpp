#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "truncmax/errors.hpp"

namespace truncmax {

enum class Kind { scalar, strong, general };

inline const char* kind_name(Kind k) {
    switch (k) {
        case Kind::scalar: return "scalar";
        case Kind::strong: return "strong";
        case Kind::general: return "general";
    }
    return "?";
}

/// One factor R^{dim} of the product domain, with its radius interval [a, b].
struct Factor {
    int dim;
    double a;
    double b;
};

/// Truncation data for the three operator kinds.
///   scalar  - one factor of full dimension, a single radius interval
///   strong  - n one-dimensional factors (axis-parallel rectangles)
///   general - arbitrary partition n = n_1 + ... + n_k, radii per factor
struct TruncationParams {
    Kind kind = Kind::scalar;
    std::vector<Factor> factors;

    int total_dim() const {
        int n = 0;
        for (const auto& f : factors) n += f.dim;
        return n;
    }
    int factor_count() const { return static_cast<int>(factors.size()); }

    /// Truncation ratio b/a; defined for the scalar kind only.
    double theta() const {
        detail::require(kind == Kind::scalar && factors.size() == 1,
                        "theta: defined for scalar params only");
        return factors[0].b / factors[0].a;
    }

    double min_a() const {
        double v = factors[0].a;
        for (const auto& f : factors) v = std::min(v, f.a);
        return v;
    }
    double max_b() const {
        double v = factors[0].b;
        for (const auto& f : factors) v = std::max(v, f.b);
        return v;
    }

    static TruncationParams scalar(int n, double a, double b);
    static TruncationParams strong(const std::vector<double>& a, const std::vector<double>& b);
    static TruncationParams general(const std::vector<int>& partition,
                                    const std::vector<double>& a, const std::vector<double>& b);
};

namespace detail {

inline void check_factor(double a, double b, int dim, const char* who) {
    require(dim >= 1 && dim <= 8, std::string(who) + ": factor dimension must be in [1, 8]");
    require(std::isfinite(a) && std::isfinite(b) && a > 0.0 && a <= b,
            std::string(who) + ": radius bounds must satisfy 0 < a <= b");
}

}  // namespace detail

inline TruncationParams TruncationParams::scalar(int n, double a, double b) {
    detail::check_factor(a, b, n, "TruncationParams::scalar");
    return TruncationParams{Kind::scalar, {Factor{n, a, b}}};
}

inline TruncationParams TruncationParams::strong(const std::vector<double>& a,
                                                 const std::vector<double>& b) {
    detail::require(!a.empty() && a.size() == b.size(),
                    "TruncationParams::strong: a and b must be non-empty, equal-length");
    detail::require(a.size() <= 8, "TruncationParams::strong: at most 8 axes");
    TruncationParams p{Kind::strong, {}};
    for (std::size_t i = 0; i < a.size(); ++i) {
        detail::check_factor(a[i], b[i], 1, "TruncationParams::strong");
        p.factors.push_back(Factor{1, a[i], b[i]});
    }
    return p;
}

inline TruncationParams TruncationParams::general(const std::vector<int>& partition,
                                                  const std::vector<double>& a,
                                                  const std::vector<double>& b) {
    detail::require(!partition.empty() && partition.size() == a.size() && a.size() == b.size(),
                    "TruncationParams::general: partition, a, b must be non-empty, equal-length");
    TruncationParams p{Kind::general, {}};
    int n = 0;
    for (std::size_t i = 0; i < partition.size(); ++i) {
        detail::check_factor(a[i], b[i], partition[i], "TruncationParams::general");
        p.factors.push_back(Factor{partition[i], a[i], b[i]});
        n += partition[i];
    }
    detail::require(n <= 8, "TruncationParams::general: total dimension must be <= 8");
    return p;
}

/// Number of radius samples per factor interval.
struct RadiiResolution {
    int count = 64;
};

/// Geometric (log-uniform) samples of each factor interval [a_i, b_i], with
/// both endpoints placed exactly.  A degenerate interval (a == b) yields the
/// single sample {a}; otherwise count >= 2 is required.
inline std::vector<std::vector<double>> make_radius_samples(const TruncationParams& p,
                                                            RadiiResolution res) {
    detail::require(res.count >= 1, "make_radius_samples: count must be >= 1");
    std::vector<std::vector<double>> samples;
    samples.reserve(p.factors.size());
    for (std::size_t i = 0; i < p.factors.size(); ++i) {
        const auto& f = p.factors[i];
        if (f.a == f.b) {
            samples.push_back({f.a});
            continue;
        }
        if (res.count < 2)
            throw resolution_error("make_radius_samples: factor " + std::to_string(i) +
                                   " has a < b and needs count >= 2, got " +
                                   std::to_string(res.count));
        std::vector<double> r(static_cast<std::size_t>(res.count));
        const double ratio = f.b / f.a;
        for (int j = 1; j + 1 < res.count; ++j)
            r[static_cast<std::size_t>(j)] =
                f.a * std::pow(ratio, static_cast<double>(j) / (res.count - 1));
        r.front() = f.a;
        r.back() = f.b;
        samples.push_back(std::move(r));
    }
    return samples;
}

}  // namespace truncmax
