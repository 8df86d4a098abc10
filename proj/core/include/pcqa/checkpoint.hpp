#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcqa {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NamedTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> values;
};

// Self-describing container: magic, version, a JSON header (training config,
// epoch, seed, optimizer step), then named tensors as
// (name length, name, rank, dims, float32 little-endian values).
struct Checkpoint {
    std::uint32_t version = 1;
    std::string header_json;
    std::vector<NamedTensor> tensors;

    const NamedTensor* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace pcqa
