#include "pcqa/predict.hpp"

#include <numeric>
#include <stdexcept>

#include "pcqa/rng.hpp"

namespace pcqa {

const char* to_string(AverageMode m) {
    return m == AverageMode::late ? "late" : "early";
}

AverageMode average_mode_from_string(const std::string& s) {
    if (s == "late") return AverageMode::late;
    if (s == "early") return AverageMode::early;
    throw std::invalid_argument("unknown average mode '" + s + "' (expected late|early)");
}

RestoredModel restore_model(const Checkpoint& ckpt) {
    RestoredModel rm;
    rm.cfg = config_from_checkpoint(ckpt);
    rm.model = std::make_shared<QualityModel<float>>(rm.cfg.model_config(), rm.cfg.seed);
    Adam<float> scratch;
    restore_into(ckpt, *rm.model, scratch);
    return rm;
}

QualityPrediction predict(const RestoredModel& rm, const PointCloud& cloud_raw, int t, AverageMode mode,
                          std::uint64_t seed, double mos_min, double mos_max) {
    if (t < 1) throw std::invalid_argument("predict: need at least one rating sample");
    if (!(mos_min < mos_max)) throw std::invalid_argument("predict: bad MOS range");
    const TrainConfig& cfg = rm.cfg;
    QualityModel<float>& model = *rm.model;

    const PointCloud cloud = normalize_unit_cube(cloud_raw);
    Rng rng(mix_seed({seed, 0x9d3fULL}));
    const auto projections = render_views(cloud, cfg.num_views, cfg.height, cfg.width, rng,
                                          cfg.fixed_viewpoint, cfg.splat_radius);
    std::vector<Var<float>> views;
    for (const auto& t4 : views_to_tensors<float>(projections, cfg.no_depth))
        views.push_back(constant(t4));

    const double span = mos_max - mos_min;
    auto denorm = [&](double r) { return mos_min + r * span; };

    QualityPrediction out;
    out.mode = mode;

    if (cfg.no_stochastic) {
        const double r = denorm(static_cast<double>(model.rate(views, nullptr)->val.v[0]));
        out.ratings = {r};
        out.final_score = r;
        return out;
    }

    const GaussStat<float> prior = model.encode_prior(views);
    const int k = cfg.latent_dim;

    if (mode == AverageMode::late) {
        double sum = 0.0;
        out.ratings.reserve(static_cast<std::size_t>(t));
        for (int i = 0; i < t; ++i) {
            Var<float> z = reparameterize(prior, draw_standard_normal<float>(k, rng));
            const double r = denorm(static_cast<double>(model.rate(views, z)->val.v[0]));
            out.ratings.push_back(r);
            sum += r;
        }
        out.final_score = sum / static_cast<double>(t);
    } else {
        // Average the sampled z vectors first, then rate once. Tiling is
        // linear, so this equals averaging the stochastic features. With
        // t = 1 the z below is bit-identical to the late-mode draw.
        Tensor<float> z_mean({k});
        for (int i = 0; i < t; ++i) {
            const Tensor<float> eps = draw_standard_normal<float>(k, rng);
            for (int c = 0; c < k; ++c) {
                const auto ci = static_cast<std::size_t>(c);
                // Two rounding steps, matching the graph's mul-then-add, so
                // t = 1 reproduces the late-mode rating bit for bit.
                const float prod = prior.sigma->val.v[ci] * eps.v[ci];
                z_mean.v[ci] += prod + prior.mu->val.v[ci];
            }
        }
        if (t > 1)
            for (auto& zc : z_mean.v) zc /= static_cast<float>(t);
        const double r = denorm(static_cast<double>(model.rate(views, constant(z_mean))->val.v[0]));
        out.ratings = {r};
        out.final_score = r;
    }
    return out;
}

} // namespace pcqa
