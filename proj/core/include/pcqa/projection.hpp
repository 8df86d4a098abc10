#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "pcqa/point_cloud.hpp"
#include "pcqa/rng.hpp"

namespace pcqa {

// Orientation only; orthographic projection needs no position or scale.
struct Viewpoint {
    // Unit quaternion, (w, x, y, z).
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    std::array<std::array<double, 3>, 3> rotation_matrix() const;
};

// Uniform over the rotation group (Shoemake's three-uniform construction).
Viewpoint sample_viewpoint(Rng& rng);

// Canonical axis-aligned viewpoints in the order +x, -x, +y, -y, +z, -z.
// index must be in [0, 6).
Viewpoint canonical_viewpoint(int index);

// Four-channel view of a unit-cube-normalized cloud. Channels are H*W planes
// in [0, 1]; background pixels are 0 in all four. Depth is
// (z - z_lo) / (z_hi - z_lo) against the fixed range |z| <= sqrt(3)/2 that
// any rotated unit cube occupies, floored at kDepthFloor so covered pixels
// are always strictly positive; larger D = nearer the viewer.
struct Projection {
    int height = 0, width = 0;
    std::vector<float> r, g, b, d; // each height*width, row-major, row 0 at top
    Viewpoint viewpoint;
};

inline constexpr double kViewHalfSpan = 0.75;  // [-0.75, 0.75]^2 maps onto the pixel grid
inline constexpr float kDepthFloor = 1e-4f;

Projection render_rgbd(const PointCloud& pc, const Viewpoint& vp, int height, int width, int splat_radius);

// splat_radius < 0 selects the default: 0 for min(h,w) <= 64, else 1.
int default_splat_radius(int height, int width);

// n_v views of one cloud: canonical viewpoints when fixed, otherwise
// independent random viewpoints derived by per-view sub-seeding.
std::vector<Projection> render_views(const PointCloud& pc, int n_v, int height, int width, Rng& rng,
                                     bool fixed, int splat_radius = -1);

// Lossless dump: 8-bit PPM for color, 16-bit PGM for depth, plus a JSON
// sidecar recording viewpoints and the projection constants.
void dump_projections(const std::vector<Projection>& views, const std::filesystem::path& dir,
                      int splat_radius);

} // namespace pcqa
