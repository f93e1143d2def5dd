#pragma once

#include <cmath>

namespace truncmax {

/// Neumaier-compensated accumulator. The result is fixed by the order of
/// add() calls, so summation stays deterministic across runs.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }

    double value() const { return sum + comp; }
};

}  // namespace truncmax
