#include "pcqa/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pcqa/rng.hpp"

namespace pcqa {

const char* to_string(DistortionKind k) {
    switch (k) {
    case DistortionKind::geometry_noise: return "geometry_noise";
    case DistortionKind::downsample: return "downsample";
    case DistortionKind::color_quantize: return "color_quantize";
    case DistortionKind::compound: return "compound";
    }
    return "?";
}

DistortionKind distortion_kind_from_string(const std::string& s) {
    if (s == "geometry_noise") return DistortionKind::geometry_noise;
    if (s == "downsample") return DistortionKind::downsample;
    if (s == "color_quantize") return DistortionKind::color_quantize;
    if (s == "compound") return DistortionKind::compound;
    throw std::invalid_argument("unknown distortion kind '" + s + "'");
}

namespace {

PointCloud add_geometry_noise(const PointCloud& pc, double severity, Rng rng) {
    const double stddev = severity * 0.05 * bounding_box(pc).diagonal();
    PointCloud out = pc;
    if (stddev <= 0.0) return out;
    for (auto& p : out.points)
        for (int a = 0; a < 3; ++a) p[a] += stddev * rng.normal();
    return out;
}

PointCloud downsample(const PointCloud& pc, double severity, Rng rng) {
    const std::size_t n = pc.size();
    const auto keep = static_cast<std::size_t>(std::ceil((1.0 - 0.9 * severity) * static_cast<double>(n)));
    if (keep >= n) return pc;

    // Partial Fisher-Yates picks `keep` distinct indices; re-sorting keeps
    // the surviving points in their original order.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());

    PointCloud out;
    out.points.reserve(keep);
    out.colors.reserve(keep);
    for (std::size_t i : idx) {
        out.points.push_back(pc.points[i]);
        out.colors.push_back(pc.colors[i]);
    }
    return out;
}

std::uint8_t quantize_channel(std::uint8_t c, int bits) {
    const int levels = (1 << bits) - 1;
    const int q = static_cast<int>(std::lround(static_cast<double>(c) * levels / 255.0));
    return static_cast<std::uint8_t>(std::lround(static_cast<double>(q) * 255.0 / levels));
}

PointCloud quantize_colors(const PointCloud& pc, double severity) {
    const int bits = std::max(1, static_cast<int>(std::lround(8.0 - 7.0 * severity)));
    if (bits >= 8) return pc;
    PointCloud out = pc;
    for (auto& c : out.colors) {
        c.r = quantize_channel(c.r, bits);
        c.g = quantize_channel(c.g, bits);
        c.b = quantize_channel(c.b, bits);
    }
    return out;
}

} // namespace

PointCloud apply_distortion(const PointCloud& pc, const DistortionSpec& spec) {
    if (spec.severity < 0.0 || spec.severity > 1.0)
        throw std::invalid_argument("distortion severity must lie in [0, 1]");
    if (spec.severity == 0.0) return pc;

    const Rng base(spec.seed);
    switch (spec.kind) {
    case DistortionKind::geometry_noise:
        return add_geometry_noise(pc, spec.severity, base.split(1));
    case DistortionKind::downsample:
        return downsample(pc, spec.severity, base.split(2));
    case DistortionKind::color_quantize:
        return quantize_colors(pc, spec.severity);
    case DistortionKind::compound: {
        PointCloud out = add_geometry_noise(pc, spec.severity, base.split(1));
        out = downsample(out, spec.severity, base.split(2));
        return quantize_colors(out, spec.severity);
    }
    }
    throw std::logic_error("unreachable distortion kind");
}

} // namespace pcqa
