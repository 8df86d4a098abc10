#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcqa/distortion.hpp"
#include "pcqa/point_cloud.hpp"

namespace pcqa {

enum class BaseShape { sphere, cube, torus, gaussian_blob };

const char* to_string(BaseShape s);

// One generated test sample with known ground-truth quality.
// true_quality = exp(-3 * severity), a smooth strictly decreasing map onto
// roughly [0.05, 1].
struct Stimulus {
    std::string id;
    PointCloud cloud;
    DistortionSpec spec;
    double true_quality = 1.0;
};

// Per-subject scores for one stimulus plus their mean. The mean is stored
// explicitly and is exactly the arithmetic mean of `judgments`.
struct JudgmentSet {
    std::vector<double> judgments; // each in [0, 1]
    double mos = 0.0;
};

// Uniformly sample a procedurally colored base shape (n_points >= 100),
// apply the distortion, and tag the result with its ground-truth quality.
Stimulus gen_stimulus(BaseShape shape, std::size_t n_points, const DistortionSpec& spec, std::uint64_t seed);

// judgment_s = clip(q + bias_s + noise_s, 0, 1): one Gaussian bias per
// subject plus per-judgment Gaussian noise.
JudgmentSet simulate_judgments(double true_quality, std::size_t n_subjects, double subject_bias_std,
                               double noise_std, std::uint64_t seed);

} // namespace pcqa
