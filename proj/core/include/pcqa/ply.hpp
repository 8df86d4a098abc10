#pragma once

#include <filesystem>
#include <stdexcept>

#include "pcqa/point_cloud.hpp"

namespace pcqa {

// Parse or serialization failure; message carries the line number (header,
// ASCII body) or byte offset (binary body) of the offending input.
class PlyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Supported subset: formats "ascii 1.0" and "binary_little_endian 1.0",
// a single "vertex" element with properties float x, float y, float z,
// uchar red, uchar green, uchar blue, in that order. Comments are allowed.
// Anything else is rejected with a diagnostic rather than guessed at.
PointCloud load_ply(const std::filesystem::path& path);

// Binary mode round-trips coordinates bit-exactly (positions pass through
// float32, the on-disk type); ASCII mode writes 6 decimal places, so a
// reload matches within 1e-6.
void save_ply(const PointCloud& pc, const std::filesystem::path& path, bool binary = true);

} // namespace pcqa
