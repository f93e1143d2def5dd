#pragma once

#include <cstdio>
#include <string>

namespace truncmax {

/// Fixed significant-digit rendering used by tables and CSV output.
inline std::string fmt_sig(double v, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return std::string(buf);
}

}  // namespace truncmax
