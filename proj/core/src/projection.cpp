#include "pcqa/projection.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace pcqa {

std::array<std::array<double, 3>, 3> Viewpoint::rotation_matrix() const {
    const double ww = w * w, xx = x * x, yy = y * y, zz = z * z;
    return {{{ww + xx - yy - zz, 2 * (x * y - w * z), 2 * (x * z + w * y)},
             {2 * (x * y + w * z), ww - xx + yy - zz, 2 * (y * z - w * x)},
             {2 * (x * z - w * y), 2 * (y * z + w * x), ww - xx - yy + zz}}};
}

Viewpoint sample_viewpoint(Rng& rng) {
    const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    Viewpoint vp;
    vp.x = a * std::sin(2.0 * M_PI * u2);
    vp.y = a * std::cos(2.0 * M_PI * u2);
    vp.z = b * std::sin(2.0 * M_PI * u3);
    vp.w = b * std::cos(2.0 * M_PI * u3);
    return vp;
}

Viewpoint canonical_viewpoint(int index) {
    // Rotations mapping the requested axis onto the viewing direction (+z).
    constexpr double h = 0.70710678118654752440; // 1/sqrt(2)
    switch (index) {
    case 0: return {h, 0, -h, 0};  // +x -> +z
    case 1: return {h, 0, h, 0};   // -x -> +z
    case 2: return {h, h, 0, 0};   // +y -> +z
    case 3: return {h, -h, 0, 0};  // -y -> +z
    case 4: return {1, 0, 0, 0};   // +z
    case 5: return {0, 0, 1, 0};   // -z -> +z
    default: throw std::out_of_range("canonical_viewpoint: only 6 axis-aligned views exist");
    }
}

int default_splat_radius(int height, int width) {
    return std::min(height, width) <= 64 ? 0 : 1;
}

Projection render_rgbd(const PointCloud& pc, const Viewpoint& vp, int height, int width,
                       int splat_radius) {
    if (height < 1 || width < 1) throw std::invalid_argument("render_rgbd: empty image");
    if (pc.empty()) throw std::invalid_argument("render_rgbd: empty point cloud");
    if (splat_radius < 0) splat_radius = default_splat_radius(height, width);

    Projection out;
    out.height = height;
    out.width = width;
    out.viewpoint = vp;
    const std::size_t n_px = static_cast<std::size_t>(height) * width;
    out.r.assign(n_px, 0.0f);
    out.g.assign(n_px, 0.0f);
    out.b.assign(n_px, 0.0f);
    out.d.assign(n_px, 0.0f);

    const auto rot = vp.rotation_matrix();
    const double z_half = std::sqrt(3.0) / 2.0; // rotated unit cube stays within |z| <= sqrt(3)/2
    const double z_range = std::sqrt(3.0);
    const double span = 2.0 * kViewHalfSpan;

    // z-buffer; larger z wins (nearer the viewer), exact ties keep the
    // earlier point, which makes the result independent of point order for
    // distinct depths.
    std::vector<double> zbuf(n_px, -std::numeric_limits<double>::infinity());
    std::vector<std::uint32_t> winner(n_px, 0);

    // Precompute the splat disc offsets.
    std::vector<std::pair<int, int>> disc;
    for (int dy = -splat_radius; dy <= splat_radius; ++dy)
        for (int dx = -splat_radius; dx <= splat_radius; ++dx)
            if (dy * dy + dx * dx <= splat_radius * splat_radius) disc.emplace_back(dy, dx);

    std::vector<double> depth_of(pc.size());
    for (std::uint32_t i = 0; i < pc.size(); ++i) {
        const auto& p = pc.points[i];
        const double rx = rot[0][0] * p[0] + rot[0][1] * p[1] + rot[0][2] * p[2];
        const double ry = rot[1][0] * p[0] + rot[1][1] * p[1] + rot[1][2] * p[2];
        const double rz = rot[2][0] * p[0] + rot[2][1] * p[1] + rot[2][2] * p[2];
        depth_of[i] = rz;

        // x right, y up (row 0 at the top).
        const int col = static_cast<int>(std::floor((rx + kViewHalfSpan) / span * width));
        const int row = static_cast<int>(std::floor((kViewHalfSpan - ry) / span * height));
        for (const auto& [dy, dx] : disc) {
            const int rr = row + dy, cc = col + dx;
            if (rr < 0 || rr >= height || cc < 0 || cc >= width) continue;
            const std::size_t px = static_cast<std::size_t>(rr) * width + cc;
            if (rz > zbuf[px]) {
                zbuf[px] = rz;
                winner[px] = i;
            }
        }
    }

    for (std::size_t px = 0; px < n_px; ++px) {
        if (!(zbuf[px] > -std::numeric_limits<double>::infinity())) continue;
        const Color8& c = pc.colors[winner[px]];
        out.r[px] = static_cast<float>(c.r) / 255.0f;
        out.g[px] = static_cast<float>(c.g) / 255.0f;
        out.b[px] = static_cast<float>(c.b) / 255.0f;
        const double d = (depth_of[winner[px]] + z_half) / z_range;
        out.d[px] = std::max(kDepthFloor, static_cast<float>(std::min(d, 1.0)));
    }
    return out;
}

std::vector<Projection> render_views(const PointCloud& pc, int n_v, int height, int width, Rng& rng,
                                     bool fixed, int splat_radius) {
    if (n_v < 1) throw std::invalid_argument("render_views: need at least one view");
    if (fixed && n_v > 6) throw std::invalid_argument("render_views: at most 6 canonical viewpoints");

    // Consume one word so back-to-back calls on the same source differ, then
    // give each view its own sub-stream.
    const std::uint64_t base = fixed ? 0 : rng.next_u64();
    std::vector<Projection> views;
    views.reserve(static_cast<std::size_t>(n_v));
    for (int i = 0; i < n_v; ++i) {
        Viewpoint vp;
        if (fixed) {
            vp = canonical_viewpoint(i);
        } else {
            Rng sub(mix_seed({base, static_cast<std::uint64_t>(i)}));
            vp = sample_viewpoint(sub);
        }
        views.push_back(render_rgbd(pc, vp, height, width, splat_radius));
    }
    return views;
}

namespace {

void write_ppm(const Projection& v, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << "P6\n" << v.width << " " << v.height << "\n255\n";
    for (std::size_t px = 0; px < v.r.size(); ++px) {
        const unsigned char rgb[3] = {static_cast<unsigned char>(std::lround(v.r[px] * 255.0f)),
                                      static_cast<unsigned char>(std::lround(v.g[px] * 255.0f)),
                                      static_cast<unsigned char>(std::lround(v.b[px] * 255.0f))};
        out.write(reinterpret_cast<const char*>(rgb), 3);
    }
}

void write_pgm16(const Projection& v, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << "P5\n" << v.width << " " << v.height << "\n65535\n";
    for (float d : v.d) {
        const auto q = static_cast<std::uint16_t>(std::lround(d * 65535.0f));
        const unsigned char be[2] = {static_cast<unsigned char>(q >> 8),
                                     static_cast<unsigned char>(q & 0xff)}; // PGM is big-endian
        out.write(reinterpret_cast<const char*>(be), 2);
    }
}

} // namespace

void dump_projections(const std::vector<Projection>& views, const std::filesystem::path& dir,
                      int splat_radius) {
    std::filesystem::create_directories(dir);
    nlohmann::json side;
    side["half_span"] = kViewHalfSpan;
    side["depth_z_lo"] = -std::sqrt(3.0) / 2.0;
    side["depth_z_hi"] = std::sqrt(3.0) / 2.0;
    side["depth_floor"] = kDepthFloor;
    side["splat_radius"] = splat_radius;
    side["views"] = nlohmann::json::array();
    for (std::size_t i = 0; i < views.size(); ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "view_%02zu", i);
        write_ppm(views[i], dir / (std::string(stem) + "_rgb.ppm"));
        write_pgm16(views[i], dir / (std::string(stem) + "_depth.pgm"));
        const auto& q = views[i].viewpoint;
        side["views"].push_back({{"index", i},
                                 {"quaternion_wxyz", {q.w, q.x, q.y, q.z}},
                                 {"height", views[i].height},
                                 {"width", views[i].width}});
    }
    std::ofstream out(dir / "views.json", std::ios::binary);
    out << side.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write viewpoint sidecar");
}

} // namespace pcqa
