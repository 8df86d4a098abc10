#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcqa {

class ManifestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ManifestRecord {
    std::string id;
    std::string path; // PLY location, relative to the manifest file
    double mos = 0.0;
    std::vector<double> judgments; // optional raw subject scores
    std::string split;             // "train" or "test"
};

// Dataset index. Serialized as JSON lines: a header object carrying the
// declared MOS range and the generator config hash, then one record per
// line. The declared range is what training normalizes against.
struct DatasetManifest {
    double mos_min = 0.0;
    double mos_max = 1.0;
    std::uint64_t config_hash = 0;
    std::vector<ManifestRecord> records;

    std::vector<const ManifestRecord*> split(const std::string& tag) const;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& m, const std::filesystem::path& path);

} // namespace pcqa
