#include "pcqa/point_cloud.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pcqa {

Bounds bounding_box(const PointCloud& pc) {
    if (pc.empty()) throw std::invalid_argument("bounding_box: empty point cloud");
    Bounds b;
    for (int a = 0; a < 3; ++a) {
        b.lo[a] = std::numeric_limits<double>::infinity();
        b.hi[a] = -std::numeric_limits<double>::infinity();
    }
    for (const auto& p : pc.points) {
        for (int a = 0; a < 3; ++a) {
            b.lo[a] = std::min(b.lo[a], p[a]);
            b.hi[a] = std::max(b.hi[a], p[a]);
        }
    }
    return b;
}

PointCloud normalize_unit_cube(const PointCloud& pc) {
    const Bounds b = bounding_box(pc);
    const auto c = b.center();
    const double side = b.longest_side();
    const double inv = side > 0.0 ? 1.0 / side : 1.0;

    PointCloud out;
    out.points.reserve(pc.size());
    out.colors = pc.colors;
    for (const auto& p : pc.points)
        out.points.push_back({(p[0] - c[0]) * inv, (p[1] - c[1]) * inv, (p[2] - c[2]) * inv});
    return out;
}

} // namespace pcqa
