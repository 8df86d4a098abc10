#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pcqa/checkpoint.hpp"
#include "pcqa/point_cloud.hpp"
#include "pcqa/trainer.hpp"

namespace pcqa {

enum class AverageMode { late, early };

const char* to_string(AverageMode m);
AverageMode average_mode_from_string(const std::string& s);

// One scored stimulus. Ratings and the final score are on the reporting
// (de-normalized) MOS scale; in late mode the final score is exactly the
// mean of the ratings.
struct QualityPrediction {
    std::string id;
    double final_score = 0.0;
    std::vector<double> ratings;
    AverageMode mode = AverageMode::late;
};

struct RestoredModel {
    TrainConfig cfg;
    std::shared_ptr<QualityModel<float>> model;
};

RestoredModel restore_model(const Checkpoint& ckpt);

// Render views once, take the prior statistic, then either rate t latent
// draws and average the ratings (late) or average the t draws and rate once
// (early). Deterministic in (checkpoint, seed, t, mode). Deterministic
// checkpoints (no_stochastic) produce a single rating regardless of t.
QualityPrediction predict(const RestoredModel& rm, const PointCloud& cloud_raw, int t, AverageMode mode,
                          std::uint64_t seed, double mos_min, double mos_max);

} // namespace pcqa
