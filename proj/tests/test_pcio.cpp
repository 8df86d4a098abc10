#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "pcqa/distortion.hpp"
#include "pcqa/ply.hpp"
#include "pcqa/rng.hpp"

using namespace pcqa;

namespace {

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "pcqa_test_pcio";
    std::filesystem::create_directories(dir);
    return dir;
}

PointCloud random_cloud(std::size_t n, Rng& rng, double scale = 3.0) {
    PointCloud pc;
    for (std::size_t i = 0; i < n; ++i) {
        pc.points.push_back({scale * (rng.uniform() - 0.5), scale * (rng.uniform() - 0.5),
                             scale * (rng.uniform() - 0.5)});
        pc.colors.push_back({static_cast<std::uint8_t>(rng.uniform_below(256)),
                             static_cast<std::uint8_t>(rng.uniform_below(256)),
                             static_cast<std::uint8_t>(rng.uniform_below(256))});
    }
    return pc;
}

} // namespace

TEST_CASE("ascii PLY with one vertex parses to the declared values") {
    const auto path = temp_dir() / "one.ply";
    std::ofstream out(path);
    out << "ply\nformat ascii 1.0\ncomment hand written\nelement vertex 1\n"
           "property float x\nproperty float y\nproperty float z\n"
           "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n"
           "0 0 0 255 0 0\n";
    out.close();

    const PointCloud pc = load_ply(path);
    REQUIRE(pc.size() == 1);
    CHECK(pc.points[0] == std::array<double, 3>{0.0, 0.0, 0.0});
    CHECK(pc.colors[0] == Color8{255, 0, 0});
}

TEST_CASE("binary save/load round-trips bit-exactly") {
    Rng rng(42);
    const auto path = temp_dir() / "rt.ply";
    for (int round = 0; round < 5; ++round) {
        PointCloud pc = random_cloud(50 + 17 * static_cast<std::size_t>(round), rng);
        // First trip rounds coordinates to the on-disk float32 type...
        save_ply(pc, path, true);
        const PointCloud once = load_ply(path);
        REQUIRE(once.size() == pc.size());
        for (std::size_t i = 0; i < pc.size(); ++i) {
            CHECK(once.points[i][0] == static_cast<double>(static_cast<float>(pc.points[i][0])));
            CHECK(once.colors[i] == pc.colors[i]);
        }
        // ...after which save/load is the identity.
        save_ply(once, path, true);
        const PointCloud twice = load_ply(path);
        CHECK(twice.points == once.points);
        CHECK(twice.colors == once.colors);
    }
}

TEST_CASE("ascii mode preserves 6 decimals") {
    Rng rng(7);
    PointCloud pc = random_cloud(40, rng);
    const auto path = temp_dir() / "ascii.ply";
    save_ply(pc, path, false);
    const PointCloud back = load_ply(path);
    REQUIRE(back.size() == pc.size());
    for (std::size_t i = 0; i < pc.size(); ++i)
        for (int a = 0; a < 3; ++a) CHECK(std::abs(back.points[i][a] - pc.points[i][a]) <= 1e-6);
}

TEST_CASE("truncated binary body is rejected with a byte diagnostic") {
    Rng rng(3);
    PointCloud pc = random_cloud(10, rng);
    const auto path = temp_dir() / "trunc.ply";
    save_ply(pc, path, true);
    // Rewrite with only 5 of the 10 declared vertices.
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    bytes.resize(bytes.size() - 5 * 15);
    std::ofstream out(path, std::ios::binary);
    out << bytes;
    out.close();
    CHECK_THROWS_WITH_AS(load_ply(path), doctest::Contains("truncated"), PlyError);
}

TEST_CASE("truncated ascii body is rejected with a line diagnostic") {
    const auto path = temp_dir() / "trunc_ascii.ply";
    std::ofstream out(path);
    out << "ply\nformat ascii 1.0\nelement vertex 10\n"
           "property float x\nproperty float y\nproperty float z\n"
           "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
    for (int i = 0; i < 5; ++i) out << "0 0 0 1 2 3\n";
    out.close();
    CHECK_THROWS_AS(load_ply(path), PlyError);
}

TEST_CASE("unsupported property layouts are rejected loudly") {
    const auto path = temp_dir() / "layout.ply";
    std::ofstream out(path);
    out << "ply\nformat ascii 1.0\nelement vertex 1\n"
           "property double x\nproperty double y\nproperty double z\n"
           "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n"
           "0 0 0 1 2 3\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_ply(path), doctest::Contains("line 4"), PlyError);
}

TEST_CASE("save to an unwritable location fails") {
    Rng rng(5);
    PointCloud pc = random_cloud(5, rng);
    CHECK_THROWS_AS(save_ply(pc, "/nonexistent-dir/x.ply", true), PlyError);
}

TEST_CASE("normalize_unit_cube centers and scales the longest side to 1") {
    PointCloud pc;
    pc.points = {{0, 0, 0}, {2, 0, 0}};
    pc.colors = {{1, 2, 3}, {4, 5, 6}};
    const PointCloud n = normalize_unit_cube(pc);
    CHECK(n.points[0] == std::array<double, 3>{-0.5, 0.0, 0.0});
    CHECK(n.points[1] == std::array<double, 3>{0.5, 0.0, 0.0});
    CHECK(n.colors == pc.colors);
}

TEST_CASE("normalize_unit_cube maps a single point to the origin") {
    PointCloud pc;
    pc.points = {{31.5, -2.25, 14.0}};
    pc.colors = {{9, 9, 9}};
    const PointCloud n = normalize_unit_cube(pc);
    CHECK(n.points[0] == std::array<double, 3>{0.0, 0.0, 0.0});
}

TEST_CASE("normalize_unit_cube: recomputed bbox confirms the contract; idempotent") {
    Rng rng(11);
    for (int round = 0; round < 10; ++round) {
        const PointCloud pc = random_cloud(200, rng, 1.0 + 20.0 * rng.uniform());
        const PointCloud n = normalize_unit_cube(pc);
        const Bounds b = bounding_box(n);
        CHECK(std::abs(b.longest_side() - 1.0) <= 1e-12);
        const auto c = b.center();
        for (int a = 0; a < 3; ++a) CHECK(std::abs(c[a]) <= 1e-12);

        const PointCloud again = normalize_unit_cube(n);
        for (std::size_t i = 0; i < n.size(); ++i)
            for (int a = 0; a < 3; ++a) CHECK(std::abs(again.points[i][a] - n.points[i][a]) <= 1e-12);
    }
}

TEST_CASE("severity 0 is the identity for every distortion kind") {
    Rng rng(13);
    const PointCloud pc = random_cloud(300, rng);
    for (auto kind : {DistortionKind::geometry_noise, DistortionKind::downsample,
                      DistortionKind::color_quantize, DistortionKind::compound}) {
        const PointCloud out = apply_distortion(pc, {kind, 0.0, 99});
        CHECK(out.points == pc.points);
        CHECK(out.colors == pc.colors);
    }
}

TEST_CASE("downsample keep count follows ceil((1 - 0.9 s) n)") {
    Rng rng(17);
    const PointCloud pc = random_cloud(1000, rng);
    const PointCloud half = apply_distortion(pc, {DistortionKind::downsample, 5.0 / 9.0, 1});
    CHECK(half.size() == 500);
    const PointCloud worst = apply_distortion(pc, {DistortionKind::downsample, 1.0, 1});
    CHECK(worst.size() == 100);
}

TEST_CASE("distortions are deterministic in the seed") {
    Rng rng(19);
    const PointCloud pc = random_cloud(400, rng);
    for (auto kind : {DistortionKind::geometry_noise, DistortionKind::compound}) {
        const PointCloud a = apply_distortion(pc, {kind, 1.0, 7});
        const PointCloud b = apply_distortion(pc, {kind, 1.0, 7});
        CHECK(a.points == b.points);
        CHECK(a.colors == b.colors);
        const PointCloud c = apply_distortion(pc, {kind, 1.0, 8});
        CHECK(a.points != c.points);
    }
}

TEST_CASE("distortions keep counts (except downsample) and stay finite") {
    Rng rng(23);
    const PointCloud pc = random_cloud(256, rng);
    for (auto kind : {DistortionKind::geometry_noise, DistortionKind::color_quantize}) {
        for (double s : {0.25, 0.5, 1.0}) {
            const PointCloud out = apply_distortion(pc, {kind, s, 3});
            CHECK(out.size() == pc.size());
            for (const auto& p : out.points)
                for (int a = 0; a < 3; ++a) CHECK(std::isfinite(p[a]));
        }
    }
}

TEST_CASE("full-severity color quantization leaves 1 bit per channel") {
    Rng rng(29);
    const PointCloud pc = random_cloud(200, rng);
    const PointCloud out = apply_distortion(pc, {DistortionKind::color_quantize, 1.0, 0});
    for (const auto& c : out.colors) {
        CHECK((c.r == 0 || c.r == 255));
        CHECK((c.g == 0 || c.g == 255));
        CHECK((c.b == 0 || c.b == 255));
    }
}
