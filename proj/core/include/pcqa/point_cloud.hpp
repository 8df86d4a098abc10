#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace pcqa {

struct Color8 {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Color8&) const = default;
};

// Colored point set. Positions are kept in double precision for stable
// geometry; the PLY layer stores float32 on disk (see ply.hpp).
struct PointCloud {
    std::vector<std::array<double, 3>> points;
    std::vector<Color8> colors; // one per point

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

struct Bounds {
    std::array<double, 3> lo{0, 0, 0};
    std::array<double, 3> hi{0, 0, 0};

    std::array<double, 3> center() const {
        return {(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2};
    }
    std::array<double, 3> extent() const {
        return {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]};
    }
    double longest_side() const {
        const auto e = extent();
        return std::max(e[0], std::max(e[1], e[2]));
    }
    double diagonal() const {
        const auto e = extent();
        return std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    }
};

Bounds bounding_box(const PointCloud& pc);

// Center the axis-aligned bounding box at the origin and scale uniformly so
// the longest side has length 1. Degenerate clouds (zero extent) are only
// centered. Colors are untouched. Idempotent up to rounding.
PointCloud normalize_unit_cube(const PointCloud& pc);

} // namespace pcqa
