#pragma once

#include <cstdint>
#include <filesystem>

#include "pcqa/manifest.hpp"
#include "pcqa/synthetic.hpp"

namespace pcqa {

// Generation grid: n_base procedurally varied base shapes x all distortion
// kinds x `severities` evenly spaced severity levels (starting at 0).
struct GenConfig {
    int n_base = 6;
    int severities = 5;
    std::size_t n_points = 4096;
    int subjects = 37;
    double bias_std = 0.08;
    double noise_std = 0.05;
    double train_fraction = 0.8;
    std::uint64_t seed = 7;
};

std::uint64_t gen_config_hash(const GenConfig& c);

// Writes one binary PLY per stimulus plus manifest.jsonl into out_dir and
// returns the manifest. Byte-identical for identical configs.
DatasetManifest build_dataset(const GenConfig& cfg, const std::filesystem::path& out_dir);

} // namespace pcqa
