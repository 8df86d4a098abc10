#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "pcqa/trainer.hpp"

namespace pcqa {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// `key = value` text, '#' comments; unknown keys are rejected with their
// line number. Values for list keys (encoder_channels, stage_channels) are
// comma-separated.
TrainConfig parse_config_file(const std::filesystem::path& path, TrainConfig base);
void apply_config_line(TrainConfig& cfg, const std::string& key, const std::string& value);

TrainConfig preset_by_name(const std::string& name); // "desk" | "paper"

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& json_text);

} // namespace pcqa
