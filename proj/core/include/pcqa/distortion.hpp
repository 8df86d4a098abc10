#pragma once

#include <cstdint>
#include <string>

#include "pcqa/point_cloud.hpp"

namespace pcqa {

enum class DistortionKind { geometry_noise, downsample, color_quantize, compound };

const char* to_string(DistortionKind k);
DistortionKind distortion_kind_from_string(const std::string& s);

// Parameterized synthetic degradation. Severity 0 is the identity for every
// kind; severity 1 is severe but still renderable. Severity maps:
//   geometry_noise : iid Gaussian displacement, std = severity * 0.05 * bbox diagonal
//   downsample     : keep ceil((1 - 0.9*severity) * n) points, uniform by seed
//   color_quantize : round each channel to max(1, round(8 - 7*severity)) bits
//   compound       : noise, then downsample, then quantize, same severity
struct DistortionSpec {
    DistortionKind kind = DistortionKind::geometry_noise;
    double severity = 0.0; // in [0, 1]
    std::uint64_t seed = 0;
};

PointCloud apply_distortion(const PointCloud& pc, const DistortionSpec& spec);

} // namespace pcqa
