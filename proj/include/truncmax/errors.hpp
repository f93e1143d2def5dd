#pragma once

#include <stdexcept>
#include <string>

namespace truncmax {

/// Malformed user input: bad parameters, inconsistent shapes, invalid grids.
struct invalid_argument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A discretization is too coarse for the requested computation.
struct resolution_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A computation would exceed its configured work or memory budget.
struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw invalid_argument(msg);
}

}  // namespace detail

}  // namespace truncmax
