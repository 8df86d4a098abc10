#include "pcqa/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "pcqa/rng.hpp"

namespace pcqa {

const char* to_string(BaseShape s) {
    switch (s) {
    case BaseShape::sphere: return "sphere";
    case BaseShape::cube: return "cube";
    case BaseShape::torus: return "torus";
    case BaseShape::gaussian_blob: return "blob";
    }
    return "?";
}

namespace {

std::array<double, 3> sample_sphere_surface(Rng& rng) {
    // Radius 0.5 so the base shape has unit bounding box.
    for (;;) {
        const double x = rng.normal(), y = rng.normal(), z = rng.normal();
        const double n = std::sqrt(x * x + y * y + z * z);
        if (n > 1e-12) return {0.5 * x / n, 0.5 * y / n, 0.5 * z / n};
    }
}

std::array<double, 3> sample_cube_volume(Rng& rng) {
    return {rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5};
}

std::array<double, 3> sample_torus_surface(Rng& rng) {
    const double R = 0.35, r = 0.15;
    // Rejection in v for uniform surface area (density ∝ R + r cos v).
    for (;;) {
        const double v = 2.0 * M_PI * rng.uniform();
        if (rng.uniform() * (R + r) <= R + r * std::cos(v)) {
            const double u = 2.0 * M_PI * rng.uniform();
            return {(R + r * std::cos(v)) * std::cos(u), (R + r * std::cos(v)) * std::sin(u), r * std::sin(v)};
        }
    }
}

std::array<double, 3> sample_blob(Rng& rng) {
    return {0.18 * rng.normal(), 0.18 * rng.normal(), 0.18 * rng.normal()};
}

std::uint8_t to_byte(double v01) {
    const double c = std::min(std::max(v01, 0.0), 1.0);
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

// Smooth position-dependent palette; gives color quantization visible
// banding to chew on.
Color8 procedural_color(const std::array<double, 3>& p) {
    const double r = 0.5 + 0.5 * std::sin(7.0 * p[0] + 11.0 * p[1]);
    const double g = 0.5 + 0.5 * std::sin(5.0 * p[1] + 13.0 * p[2] + 1.3);
    const double b = 0.5 + 0.5 * std::sin(9.0 * p[2] + 3.0 * p[0] + 2.1);
    return {to_byte(r), to_byte(g), to_byte(b)};
}

} // namespace

Stimulus gen_stimulus(BaseShape shape, std::size_t n_points, const DistortionSpec& spec, std::uint64_t seed) {
    if (n_points < 100) throw std::invalid_argument("gen_stimulus: need at least 100 points");

    Rng rng(mix_seed({seed, 0x5a5a5a5aULL}));
    PointCloud base;
    base.points.reserve(n_points);
    base.colors.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        std::array<double, 3> p;
        switch (shape) {
        case BaseShape::sphere: p = sample_sphere_surface(rng); break;
        case BaseShape::cube: p = sample_cube_volume(rng); break;
        case BaseShape::torus: p = sample_torus_surface(rng); break;
        case BaseShape::gaussian_blob: p = sample_blob(rng); break;
        }
        base.points.push_back(p);
        base.colors.push_back(procedural_color(p));
    }

    Stimulus st;
    st.cloud = apply_distortion(base, spec);
    st.spec = spec;
    st.true_quality = std::exp(-3.0 * spec.severity);
    return st;
}

JudgmentSet simulate_judgments(double true_quality, std::size_t n_subjects, double subject_bias_std,
                               double noise_std, std::uint64_t seed) {
    if (n_subjects < 1) throw std::invalid_argument("simulate_judgments: need at least one subject");
    if (subject_bias_std < 0.0 || noise_std < 0.0)
        throw std::invalid_argument("simulate_judgments: negative std");

    Rng rng(mix_seed({seed, 0x6a09e667ULL}));
    JudgmentSet js;
    js.judgments.reserve(n_subjects);
    double sum = 0.0;
    for (std::size_t s = 0; s < n_subjects; ++s) {
        const double bias = subject_bias_std * rng.normal();
        const double noise = noise_std * rng.normal();
        const double j = std::min(std::max(true_quality + bias + noise, 0.0), 1.0);
        js.judgments.push_back(j);
        sum += j;
    }
    js.mos = sum / static_cast<double>(n_subjects);
    return js;
}

} // namespace pcqa
