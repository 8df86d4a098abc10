#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pcqa/adam.hpp"
#include "pcqa/checkpoint.hpp"
#include "pcqa/manifest.hpp"
#include "pcqa/model.hpp"
#include "pcqa/objective.hpp"

namespace pcqa {

struct TrainConfig {
    double lr = 2.5e-5;
    double beta1 = 0.5;
    double beta2 = 0.999;
    int epochs = 200;
    int batch = 8;
    double alpha = 0.4;
    int num_views = 4;
    int height = 480;
    int width = 480;
    int latent_dim = 3;
    int fusion_channels = 32;
    std::vector<int> encoder_channels = {8, 16, 32, 64, 64};
    int encoder_fc_hidden = 32;
    std::vector<int> stage_channels = {16, 32, 64, 128};
    int blocks_per_stage = 1;
    int splat_radius = -1;  // auto
    double grad_clip = 0.0; // 0 disables
    std::uint64_t seed = 1;

    bool no_stochastic = false;
    bool no_annealing = false;
    bool no_depth = false;
    bool fixed_viewpoint = false;
    bool render_once = false; // reuse the epoch-1 viewpoints instead of re-sampling per epoch

    ModelConfig model_config() const;
    void validate() const;
};

// "paper": the published configuration. "desk": small-everything variant
// that trains in minutes on a CPU.
TrainConfig paper_preset();
TrainConfig desk_preset();

// Learning rate halves past the midpoint of training.
double lr_at(int epoch, const TrainConfig& cfg);

struct EpochLog {
    int epoch = 0;
    double lambda = 1.0;
    double lr = 0.0;
    double loss_total = 0.0;
    double recon_post = 0.0;
    double recon_prior = 0.0;
    double kl = 0.0;
    double probe_rating_std = 0.0;
    double wall_s = 0.0;
};

struct DivergenceEvent {
    bool diverged = false;
    int epoch = 0;
    int step = 0;
    std::string sample_id;
    std::string detail;
};

struct TrainResult {
    std::shared_ptr<QualityModel<float>> model;
    Adam<float> adam;
    std::vector<EpochLog> log;
    DivergenceEvent divergence;
    int completed_epochs = 0;
};

// Optimize on the manifest's train split. PLY paths resolve against
// data_root. Per-epoch work (shuffle order, viewpoints, latent noise) is
// derived from (seed, epoch, record index), so a resumed run replays the
// remaining epochs bit-identically. A non-finite loss aborts the run and is
// reported via TrainResult::divergence. When log_stream is given, one JSON
// record per epoch (and any divergence event) is appended to it.
TrainResult train(const DatasetManifest& manifest, const std::filesystem::path& data_root,
                  const TrainConfig& cfg, const Checkpoint* resume = nullptr, int stop_after = 0,
                  std::ostream* log_stream = nullptr);

Checkpoint to_checkpoint(const QualityModel<float>& model, const Adam<float>& adam,
                         const TrainConfig& cfg, int epoch);
void restore_into(const Checkpoint& ckpt, QualityModel<float>& model, Adam<float>& adam);
TrainConfig config_from_checkpoint(const Checkpoint& ckpt);
int epoch_from_checkpoint(const Checkpoint& ckpt);

} // namespace pcqa
