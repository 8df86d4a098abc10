#include <doctest.h>

#include <cmath>

#include "pcqa/model.hpp"
#include "pcqa/projection.hpp"
#include "pcqa/synthetic.hpp"

using namespace pcqa;

namespace {

PointCloud single_point_at_origin() {
    PointCloud pc;
    pc.points = {{0.0, 0.0, 0.0}};
    pc.colors = {{200, 100, 50}};
    return pc;
}

std::size_t covered_pixels(const Projection& p) {
    std::size_t n = 0;
    for (float d : p.d) n += d > 0.0f;
    return n;
}

} // namespace

TEST_CASE("sampled viewpoints are unit quaternions, deterministic in the seed") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) {
        const Viewpoint va = sample_viewpoint(a);
        const Viewpoint vb = sample_viewpoint(b);
        CHECK(va.w == vb.w);
        CHECK(va.x == vb.x);
        const double norm = std::sqrt(va.w * va.w + va.x * va.x + va.y * va.y + va.z * va.z);
        CHECK(std::abs(norm - 1.0) <= 1e-9);
    }
}

TEST_CASE("viewpoint distribution is uniform: rotated axis has zero mean") {
    Rng rng(123);
    double sx = 0, sy = 0, sz = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const auto rot = sample_viewpoint(rng).rotation_matrix();
        sx += rot[0][2]; // R * (0,0,1)
        sy += rot[1][2];
        sz += rot[2][2];
    }
    CHECK(std::abs(sx / n) < 0.01);
    CHECK(std::abs(sy / n) < 0.01);
    CHECK(std::abs(sz / n) < 0.01);
}

TEST_CASE("single point at the origin lands exactly mid-grid with D = 0.5") {
    const Projection p = render_rgbd(single_point_at_origin(), Viewpoint{}, 5, 5, 0);
    int nonzero = 0;
    for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 5; ++col) {
            const std::size_t px = static_cast<std::size_t>(row) * 5 + col;
            if (p.d[px] > 0.0f) {
                ++nonzero;
                CHECK(row == 2);
                CHECK(col == 2);
                CHECK(p.d[px] == 0.5f);
                CHECK(p.r[px] == doctest::Approx(200.0 / 255.0));
            }
        }
    CHECK(nonzero == 1);
}

TEST_CASE("z-buffer keeps the nearer of two coincident-pixel points") {
    PointCloud pc;
    pc.points = {{0.0, 0.0, -0.3}, {0.0, 0.0, 0.3}}; // same (x, y), different depth
    pc.colors = {{255, 0, 0}, {0, 255, 0}};
    const Projection p = render_rgbd(pc, Viewpoint{}, 9, 9, 0);
    const std::size_t px = 4 * 9 + 4;
    CHECK(p.g[px] == 1.0f); // larger z is nearer the viewer
    CHECK(p.r[px] == 0.0f);
    CHECK(p.d[px] > 0.5f);
}

TEST_CASE("rendering is bit-deterministic and order-independent for distinct depths") {
    const Stimulus st = gen_stimulus(BaseShape::torus, 1500, {}, 3);
    const PointCloud pc = normalize_unit_cube(st.cloud);
    Rng rng(7);
    const Viewpoint vp = sample_viewpoint(rng);

    const Projection a = render_rgbd(pc, vp, 48, 48, 1);
    const Projection b = render_rgbd(pc, vp, 48, 48, 1);
    CHECK(a.r == b.r);
    CHECK(a.g == b.g);
    CHECK(a.b == b.b);
    CHECK(a.d == b.d);

    PointCloud reversed;
    for (std::size_t i = pc.size(); i-- > 0;) {
        reversed.points.push_back(pc.points[i]);
        reversed.colors.push_back(pc.colors[i]);
    }
    const Projection c = render_rgbd(reversed, vp, 48, 48, 1);
    CHECK(a.r == c.r);
    CHECK(a.d == c.d);
}

TEST_CASE("all rendered values lie in [0,1]; coverage bounded by splat area") {
    const Stimulus st = gen_stimulus(BaseShape::gaussian_blob, 800, {}, 5);
    const PointCloud pc = normalize_unit_cube(st.cloud);
    Rng rng(11);
    for (int splat : {0, 1, 2}) {
        const Projection p = render_rgbd(pc, sample_viewpoint(rng), 64, 64, splat);
        for (const auto* plane : {&p.r, &p.g, &p.b, &p.d})
            for (float v : *plane) {
                CHECK(v >= 0.0f);
                CHECK(v <= 1.0f);
            }
        const std::size_t splat_area = static_cast<std::size_t>((2 * splat + 1) * (2 * splat + 1));
        CHECK(covered_pixels(p) <= pc.size() * splat_area);
        // Background is zero in every channel wherever depth is zero.
        for (std::size_t px = 0; px < p.d.size(); ++px)
            if (p.d[px] == 0.0f) {
                CHECK(p.r[px] == 0.0f);
                CHECK(p.g[px] == 0.0f);
                CHECK(p.b[px] == 0.0f);
            }
    }
}

TEST_CASE("fixed mode uses the +x, -x canonical rotations first") {
    PointCloud pc;
    pc.points = {{0.4, 0.0, 0.0}, {-0.4, 0.0, 0.0}};
    pc.colors = {{255, 0, 0}, {0, 0, 255}};
    Rng rng(1);
    const auto views = render_views(pc, 2, 16, 16, rng, true, 0);
    REQUIRE(views.size() == 2);

    auto depth_of_color = [](const Projection& p, bool red) {
        for (std::size_t px = 0; px < p.d.size(); ++px)
            if ((red && p.r[px] > 0.5f) || (!red && p.b[px] > 0.5f)) return p.d[px];
        return -1.0f;
    };
    // +x view: the +x point is nearer (larger D); -x view: the -x point is.
    CHECK(depth_of_color(views[0], true) > depth_of_color(views[0], false));
    CHECK(depth_of_color(views[1], false) > depth_of_color(views[1], true));
    CHECK_THROWS(render_views(pc, 7, 16, 16, rng, true, 0));
}

TEST_CASE("random views: n_v projections, reproducible under one seed") {
    const Stimulus st = gen_stimulus(BaseShape::sphere, 600, {}, 8);
    const PointCloud pc = normalize_unit_cube(st.cloud);
    Rng a(99), b(99);
    const auto va = render_views(pc, 4, 32, 32, a, false);
    const auto vb = render_views(pc, 4, 32, 32, b, false);
    REQUIRE(va.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(va[static_cast<std::size_t>(i)].d == vb[static_cast<std::size_t>(i)].d);
        CHECK(va[static_cast<std::size_t>(i)].viewpoint.w == vb[static_cast<std::size_t>(i)].viewpoint.w);
    }
    // Consecutive calls on one source give different viewpoints.
    const auto vc = render_views(pc, 4, 32, 32, a, false);
    CHECK(vc[0].viewpoint.w != va[0].viewpoint.w);
}

TEST_CASE("depth-free ablation zeroes channel D without changing the layout") {
    const Stimulus st = gen_stimulus(BaseShape::sphere, 400, {}, 4);
    const PointCloud pc = normalize_unit_cube(st.cloud);
    const Projection p = render_rgbd(pc, Viewpoint{}, 16, 16, 0);
    const auto full = pcqa::view_to_tensor<float>(p, false);
    const auto flat = pcqa::view_to_tensor<float>(p, true);
    REQUIRE(full.shape == std::vector<int>{4, 16, 16});
    REQUIRE(flat.shape == std::vector<int>{4, 16, 16});
    const std::size_t plane = 16 * 16;
    for (std::size_t i = 0; i < 3 * plane; ++i) CHECK(flat.v[i] == full.v[i]);
    for (std::size_t i = 3 * plane; i < 4 * plane; ++i) CHECK(flat.v[i] == 0.0f);
}

TEST_CASE("projection dump writes parseable image files plus a sidecar") {
    const Stimulus st = gen_stimulus(BaseShape::cube, 500, {}, 2);
    const PointCloud pc = normalize_unit_cube(st.cloud);
    Rng rng(17);
    const auto views = render_views(pc, 2, 24, 24, rng, false, 0);
    const auto dir = std::filesystem::temp_directory_path() / "pcqa_test_dump";
    std::filesystem::remove_all(dir);
    dump_projections(views, dir, 0);
    CHECK(std::filesystem::exists(dir / "view_00_rgb.ppm"));
    CHECK(std::filesystem::exists(dir / "view_01_depth.pgm"));
    CHECK(std::filesystem::exists(dir / "views.json"));
    CHECK(std::filesystem::file_size(dir / "view_00_rgb.ppm") > 24 * 24 * 3);
    CHECK(std::filesystem::file_size(dir / "view_01_depth.pgm") > 24 * 24 * 2);
}
