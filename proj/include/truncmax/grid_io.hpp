#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "truncmax/errors.hpp"
#include "truncmax/grid.hpp"

namespace truncmax {

// Grid file layout: one JSON header line {version, n, h, lo, cells} ending in
// '\n', then the samples as little-endian IEEE 754 doubles in flat cell order.

static_assert(std::endian::native == std::endian::little,
              "grid file I/O assumes a little-endian host");

inline void write_grid(const GridFunction& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    detail::require(out.good(), "write_grid: cannot open '" + path + "'");
    nlohmann::json header;
    header["version"] = 1;
    header["n"] = f.spec.n;
    header["h"] = f.spec.h;
    header["lo"] = std::vector<double>(f.spec.lo.begin(), f.spec.lo.begin() + f.spec.n);
    header["cells"] =
        std::vector<std::int64_t>(f.spec.cells.begin(), f.spec.cells.begin() + f.spec.n);
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    detail::require(out.good(), "write_grid: short write to '" + path + "'");
}

inline GridFunction read_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    detail::require(in.good(), "read_grid: cannot open '" + path + "'");
    std::string line;
    detail::require(static_cast<bool>(std::getline(in, line)), "read_grid: missing header line");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw invalid_argument("read_grid: bad header: " + std::string(e.what()));
    }
    detail::require(header.value("version", 0) == 1, "read_grid: unsupported version");
    detail::require(header.contains("n") && header.contains("h") && header.contains("lo") &&
                        header.contains("cells"),
                    "read_grid: header must carry n, h, lo, cells");

    const int n = header["n"].get<int>();
    detail::require(n >= 1 && n <= 3, "read_grid: n must be in [1, 3]");
    const auto lo_v = header["lo"].get<std::vector<double>>();
    const auto cells_v = header["cells"].get<std::vector<std::int64_t>>();
    detail::require(static_cast<int>(lo_v.size()) == n && static_cast<int>(cells_v.size()) == n,
                    "read_grid: lo and cells must have length n");

    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<std::int64_t, 3> cells{1, 1, 1};
    for (int d = 0; d < n; ++d) {
        lo[static_cast<std::size_t>(d)] = lo_v[static_cast<std::size_t>(d)];
        cells[static_cast<std::size_t>(d)] = cells_v[static_cast<std::size_t>(d)];
    }
    const GridSpec spec = make_grid_spec(n, header["h"].get<double>(), lo, cells);

    std::vector<double> values(static_cast<std::size_t>(spec.total_cells()));
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    detail::require(in.gcount() == static_cast<std::streamsize>(values.size() * sizeof(double)),
                    "read_grid: payload shorter than the header promises");
    return make_grid_function(spec, std::move(values));
}

/// One-column CSV fallback for n = 1; the header line is replaced by
/// caller-supplied h and lo.  Blank lines are ignored.
inline GridFunction read_grid_csv(const std::string& path, double h, double lo) {
    std::ifstream in(path);
    detail::require(in.good(), "read_grid_csv: cannot open '" + path + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(line, &pos);
        } catch (const std::exception&) {
            throw invalid_argument("read_grid_csv: bad value '" + line + "'");
        }
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\r')) ++pos;
        detail::require(pos == line.size(), "read_grid_csv: trailing junk in '" + line + "'");
        values.push_back(v);
    }
    detail::require(!values.empty(), "read_grid_csv: no values in '" + path + "'");
    const GridSpec spec = make_grid_spec(1, h, {lo, 0.0, 0.0},
                                         {static_cast<std::int64_t>(values.size()), 1, 1});
    return make_grid_function(spec, std::move(values));
}

}  // namespace truncmax
