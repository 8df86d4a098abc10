#include "pcqa/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "pcqa/config_io.hpp"
#include "pcqa/ply.hpp"
#include "pcqa/rng.hpp"

namespace pcqa {

using nlohmann::json;

ModelConfig TrainConfig::model_config() const {
    ModelConfig m;
    m.latent_dim = latent_dim;
    m.fusion_channels = fusion_channels;
    m.height = height;
    m.width = width;
    m.encoder_channels = encoder_channels;
    m.encoder_fc_hidden = encoder_fc_hidden;
    m.stage_channels = stage_channels;
    m.blocks_per_stage = blocks_per_stage;
    m.no_stochastic = no_stochastic;
    return m;
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be positive");
    if (epochs < 1 || batch < 1 || num_views < 1 || latent_dim < 1 || fusion_channels < 1 ||
        blocks_per_stage < 1 || encoder_fc_hidden < 1)
        throw std::invalid_argument("config: counts must be >= 1");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("config: alpha outside [0, 1]");
    if (height < 8 || width < 8) throw std::invalid_argument("config: projection size must be >= 8");
    if (stage_channels.size() != 4) throw std::invalid_argument("config: need exactly 4 stage channels");
    if (encoder_channels.empty()) throw std::invalid_argument("config: encoder channels empty");
    if (fixed_viewpoint && num_views > 6)
        throw std::invalid_argument("config: at most 6 fixed viewpoints");
}

TrainConfig paper_preset() {
    return TrainConfig{}; // defaults are the published configuration
}

TrainConfig desk_preset() {
    TrainConfig c;
    c.height = 64;
    c.width = 64;
    c.num_views = 2;
    c.epochs = 150; // loss is still falling at 60; 150 converges within minutes
    c.batch = 8;
    c.lr = 1e-3; // small model, few steps; the published 2.5e-5 barely moves it
    return c;
}

double lr_at(int epoch, const TrainConfig& cfg) {
    if (epoch < 1 || epoch > cfg.epochs) throw std::out_of_range("lr_at: epoch outside [1, epochs]");
    return epoch <= cfg.epochs / 2.0 ? cfg.lr : 0.5 * cfg.lr;
}

namespace {

// Every random stream in a run is addressed by (seed, purpose, epoch,
// record); nothing is drawn sequentially across epochs, which is what makes
// checkpoint resume replay the tail of a run exactly.
enum : std::uint64_t { kStreamShuffle = 1, kStreamRender = 2, kStreamLatent = 3, kStreamProbe = 4 };

Rng stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(mix_seed({seed, purpose, a, b}));
}

struct Sample {
    const ManifestRecord* rec = nullptr;
    PointCloud cloud; // unit-cube normalized
    double mos_norm = 0.0;
};

double clip_gradients(ParamStore<float>& params, double max_norm) {
    double sq = 0.0;
    for (const auto& [name, p] : params.entries())
        for (float g : p->grad.v) sq += static_cast<double>(g) * static_cast<double>(g);
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const float s = static_cast<float>(max_norm / norm);
        for (const auto& [name, p] : params.entries())
            for (float& g : p->grad.v) g *= s;
    }
    return norm;
}

std::vector<Var<float>> make_view_vars(const std::vector<Tensor<float>>& tensors) {
    std::vector<Var<float>> out;
    out.reserve(tensors.size());
    for (const auto& t : tensors) out.push_back(constant(t));
    return out;
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

} // namespace

TrainResult train(const DatasetManifest& manifest, const std::filesystem::path& data_root,
                  const TrainConfig& cfg_in, const Checkpoint* resume, int stop_after,
                  std::ostream* log_stream) {
    const TrainConfig cfg = resume ? config_from_checkpoint(*resume) : cfg_in;
    cfg.validate();

    const auto train_recs = manifest.split("train");
    if (train_recs.empty()) throw ManifestError("train: manifest has no train split");

    std::vector<Sample> samples;
    samples.reserve(train_recs.size());
    const double mos_span = manifest.mos_max - manifest.mos_min;
    for (const auto* rec : train_recs) {
        Sample s;
        s.rec = rec;
        s.cloud = normalize_unit_cube(load_ply(data_root / rec->path));
        s.mos_norm = (rec->mos - manifest.mos_min) / mos_span;
        samples.push_back(std::move(s));
    }

    TrainResult res;
    res.model = std::make_shared<QualityModel<float>>(cfg.model_config(), cfg.seed);
    if (resume) restore_into(*resume, *res.model, res.adam);
    const int start_epoch = resume ? epoch_from_checkpoint(*resume) + 1 : 1;
    const int last_epoch = stop_after > 0 ? std::min(stop_after, cfg.epochs) : cfg.epochs;
    res.completed_epochs = start_epoch - 1;

    QualityModel<float>& model = *res.model;
    const int splat = cfg.splat_radius;

    // Fixed probe set for the per-epoch rating-spread diagnostic: first few
    // train records, rendered once with their own stream.
    const std::size_t n_probe = cfg.no_stochastic ? 0 : std::min<std::size_t>(4, samples.size());
    std::vector<std::vector<Tensor<float>>> probe_views;
    for (std::size_t j = 0; j < n_probe; ++j) {
        Rng prng = stream(cfg.seed, kStreamProbe, j);
        probe_views.push_back(views_to_tensors<float>(
            render_views(samples[j].cloud, cfg.num_views, cfg.height, cfg.width, prng,
                         cfg.fixed_viewpoint, splat),
            cfg.no_depth));
    }
    constexpr int kProbeDraws = 6;

    auto emit = [&](const json& j) {
        if (log_stream) *log_stream << j.dump() << "\n" << std::flush;
    };

    for (int epoch = start_epoch; epoch <= last_epoch; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr = lr_at(epoch, cfg);
        const double lambda =
            cfg.no_stochastic ? 0.0 : (cfg.no_annealing ? 1.0 : lambda_schedule(epoch, cfg.epochs));

        std::vector<std::size_t> order(samples.size());
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng = stream(cfg.seed, kStreamShuffle, static_cast<std::uint64_t>(epoch));
        shuffle(order, shuffle_rng);

        double sum_total = 0, sum_post = 0, sum_prior = 0, sum_kl = 0;
        int step = 0;
        for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(cfg.batch)) {
            ++step;
            const std::size_t batch_end = std::min(order.size(), pos + static_cast<std::size_t>(cfg.batch));
            const auto batch_n = static_cast<float>(batch_end - pos);
            model.params().zero_grad();

            for (std::size_t bi = pos; bi < batch_end; ++bi) {
                const Sample& s = samples[order[bi]];
                const auto rec_idx = static_cast<std::uint64_t>(order[bi]);
                try {
                    const auto render_epoch = static_cast<std::uint64_t>(cfg.render_once ? 1 : epoch);
                    Rng render_rng = stream(cfg.seed, kStreamRender, render_epoch, rec_idx);
                    const auto views = make_view_vars(views_to_tensors<float>(
                        render_views(s.cloud, cfg.num_views, cfg.height, cfg.width, render_rng,
                                     cfg.fixed_viewpoint, splat),
                        cfg.no_depth));

                    if (cfg.no_stochastic) {
                        Var<float> loss = recon_mae(model.rate(views, nullptr), s.mos_norm);
                        sum_total += static_cast<double>(loss->val.v[0]);
                        sum_post += static_cast<double>(loss->val.v[0]);
                        backward(scale(loss, 1.0f / batch_n));
                    } else {
                        Rng latent_rng =
                            stream(cfg.seed, kStreamLatent, static_cast<std::uint64_t>(epoch), rec_idx);
                        StepLoss<float> sl =
                            overall_loss(model, views, s.mos_norm, lambda, cfg.alpha, latent_rng);
                        sum_total += sl.parts.total;
                        sum_post += sl.parts.recon_post;
                        sum_prior += sl.parts.recon_prior;
                        sum_kl += sl.parts.kl;
                        backward(scale(sl.total, 1.0f / batch_n));
                    }
                } catch (const NonFiniteError& e) {
                    res.divergence = {true, epoch, step, s.rec->id, e.what()};
                    emit(json{{"event", "divergence"},
                              {"epoch", epoch},
                              {"step", step},
                              {"sample", s.rec->id},
                              {"detail", e.what()}});
                    return res;
                }
            }
            if (cfg.grad_clip > 0.0) clip_gradients(model.params(), cfg.grad_clip);
            res.adam.step(model.params(), lr, cfg.beta1, cfg.beta2);
        }

        // Rating spread on the probe set: prior statistic once, a handful of
        // latent draws, sample std of the resulting ratings.
        double probe_std = 0.0;
        for (std::size_t j = 0; j < n_probe; ++j) {
            const auto views = make_view_vars(probe_views[j]);
            const GaussStat<float> prior = model.encode_prior(views);
            Rng eps_rng = stream(cfg.seed, kStreamProbe, static_cast<std::uint64_t>(epoch), j);
            std::vector<double> ratings;
            for (int t = 0; t < kProbeDraws; ++t) {
                Var<float> z = reparameterize(prior, draw_standard_normal<float>(cfg.latent_dim, eps_rng));
                ratings.push_back(static_cast<double>(model.rate(views, z)->val.v[0]));
            }
            probe_std += sample_std(ratings);
        }
        if (n_probe > 0) probe_std /= static_cast<double>(n_probe);

        const double n_samples = static_cast<double>(samples.size());
        EpochLog el;
        el.epoch = epoch;
        el.lambda = lambda;
        el.lr = lr;
        el.loss_total = sum_total / n_samples;
        el.recon_post = sum_post / n_samples;
        el.recon_prior = sum_prior / n_samples;
        el.kl = sum_kl / n_samples;
        el.probe_rating_std = probe_std;
        el.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.log.push_back(el);
        res.completed_epochs = epoch;
        emit(json{{"epoch", el.epoch},
                  {"lambda", el.lambda},
                  {"lr", el.lr},
                  {"loss_total", el.loss_total},
                  {"recon_post", el.recon_post},
                  {"recon_prior", el.recon_prior},
                  {"kl", el.kl},
                  {"probe_rating_std", el.probe_rating_std},
                  {"wall_s", el.wall_s}});
    }
    return res;
}

Checkpoint to_checkpoint(const QualityModel<float>& model, const Adam<float>& adam,
                         const TrainConfig& cfg, int epoch) {
    Checkpoint c;
    json header;
    header["format"] = "pcqa_checkpoint";
    header["config"] = json::parse(train_config_to_json(cfg));
    header["epoch"] = epoch;
    header["adam_step"] = adam.step_count();
    // Every stream is re-derived from (seed, purpose, epoch, record), so the
    // master seed plus the completed-epoch count is the entire rng state.
    header["rng_state"] = {{"master_seed", cfg.seed}, {"completed_epochs", epoch}};
    c.header_json = header.dump();

    auto push = [&c](const std::string& name, const Tensor<float>& t) {
        c.tensors.push_back({name, t.shape, t.v});
    };
    for (const auto& [name, p] : model.params().entries()) push(name, p->val);
    for (const auto& [name, p] : model.params().entries()) {
        auto it = adam.moments().find(name);
        if (it == adam.moments().end()) continue; // untrained checkpoint
        push("adam.m." + name, it->second.m);
        push("adam.v." + name, it->second.v);
    }
    return c;
}

void restore_into(const Checkpoint& ckpt, QualityModel<float>& model, Adam<float>& adam) {
    json header;
    try {
        header = json::parse(ckpt.header_json);
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
    }
    for (const auto& [name, p] : model.params().entries()) {
        const NamedTensor* t = ckpt.find(name);
        if (!t) throw CheckpointError("checkpoint missing tensor '" + name + "'");
        if (t->shape != p->val.shape) throw CheckpointError("checkpoint shape mismatch for '" + name + "'");
        p->val.v = t->values;
        const NamedTensor* m = ckpt.find("adam.m." + name);
        const NamedTensor* v = ckpt.find("adam.v." + name);
        if (m && v) {
            adam.moments()[name].m = Tensor<float>(m->shape, m->values);
            adam.moments()[name].v = Tensor<float>(v->shape, v->values);
        }
    }
    adam.set_step_count(header.value("adam_step", 0LL));
}

TrainConfig config_from_checkpoint(const Checkpoint& ckpt) {
    json header;
    try {
        header = json::parse(ckpt.header_json);
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
    }
    if (header.value("format", "") != "pcqa_checkpoint")
        throw CheckpointError("not a pcqa checkpoint header");
    return train_config_from_json(header.at("config").dump());
}

int epoch_from_checkpoint(const Checkpoint& ckpt) {
    json header = json::parse(ckpt.header_json);
    return header.value("epoch", 0);
}

} // namespace pcqa
