#pragma once

// Network definition: the prior/posterior latent encoders and the quality
// rating generator (QRG). Both encoders share one architecture (five
// stride-2 convs, spatial average, cross-view sum, two fully connected
// layers) with independent parameter sets; the QRG is a small residual
// backbone whose input is each 4-channel view concatenated with the tiled
// latent sample, fused across its last three feature levels.

#include <cstdint>
#include <string>
#include <vector>

#include "pcqa/graph.hpp"
#include "pcqa/params.hpp"
#include "pcqa/projection.hpp"
#include "pcqa/rng.hpp"

namespace pcqa {

struct ModelConfig {
    int latent_dim = 3;       // latent z dimension
    int fusion_channels = 32; // channel width of the fused multi-scale feature
    int height = 480, width = 480;
    std::vector<int> encoder_channels = {8, 16, 32, 64, 64};
    int encoder_fc_hidden = 32;
    std::vector<int> stage_channels = {16, 32, 64, 128}; // backbone stages, each stride 2
    int blocks_per_stage = 1;
    bool no_stochastic = false; // QRG only, latent path disabled

    int qrg_input_channels() const { return 4 + latent_dim; }
};

// Value-level diagonal Gaussian (for logging, metrics and tests).
struct GaussianStat {
    std::vector<double> mu;
    std::vector<double> sigma;
};

// Graph-attached diagonal Gaussian. sigma = exp(clamp(log_sigma, -7, 7)),
// so it is strictly positive by construction.
template <typename T>
struct GaussStat {
    Var<T> mu;
    Var<T> log_sigma;
    Var<T> sigma;

    GaussianStat values() const {
        GaussianStat g;
        for (const T& m : mu->val.v) g.mu.push_back(static_cast<double>(m));
        for (const T& s : sigma->val.v) g.sigma.push_back(static_cast<double>(s));
        return g;
    }
};

inline constexpr double kLogSigmaClamp = 7.0;

template <typename T>
Tensor<T> draw_standard_normal(int k, Rng& rng) {
    Tensor<T> eps({k});
    for (auto& e : eps.v) e = static_cast<T>(rng.normal());
    return eps;
}

// z = sigma .* eps + mu; gradients flow to mu and sigma through z.
template <typename T>
Var<T> reparameterize(const GaussStat<T>& stat, const Tensor<T>& eps) {
    return add(mul(stat.sigma, constant(eps)), stat.mu);
}

// Tile a latent vector into a spatially constant K x h x w feature.
template <typename T>
Var<T> expand_spatial(const Var<T>& z, int h, int w) {
    return tile_spatial(z, h, w);
}

// Convert a rendered view to a 4 x H x W input tensor (R, G, B, D).
template <typename T>
Tensor<T> view_to_tensor(const Projection& v, bool zero_depth = false) {
    Tensor<T> t({4, v.height, v.width});
    const std::size_t n = v.r.size();
    for (std::size_t i = 0; i < n; ++i) t.v[i] = static_cast<T>(v.r[i]);
    for (std::size_t i = 0; i < n; ++i) t.v[n + i] = static_cast<T>(v.g[i]);
    for (std::size_t i = 0; i < n; ++i) t.v[2 * n + i] = static_cast<T>(v.b[i]);
    if (!zero_depth)
        for (std::size_t i = 0; i < n; ++i) t.v[3 * n + i] = static_cast<T>(v.d[i]);
    return t;
}

template <typename T>
std::vector<Tensor<T>> views_to_tensors(const std::vector<Projection>& views, bool zero_depth = false) {
    std::vector<Tensor<T>> out;
    out.reserve(views.size());
    for (const auto& v : views) out.push_back(view_to_tensor<T>(v, zero_depth));
    return out;
}

template <typename T>
class QualityModel {
public:
    QualityModel(ModelConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)), store_(init_seed) {
        if (cfg_.encoder_channels.empty() || cfg_.stage_channels.size() != 4)
            throw ShapeError("model: need encoder channels and exactly 4 backbone stages");
        if (!cfg_.no_stochastic) {
            create_encoder("prior", 4);
            create_encoder("posterior", 5);
        }
        create_qrg();
    }

    const ModelConfig& config() const { return cfg_; }
    ParamStore<T>& params() { return store_; }
    const ParamStore<T>& params() const { return store_; }

    // P(z | views): five rectified stride-2 convs per view, spatial average,
    // elementwise sum across views, two fully connected layers splitting
    // into (mu, log_sigma).
    GaussStat<T> encode_prior(const std::vector<Var<T>>& views) const {
        return encode("prior", views, nullptr);
    }

    // Q(z | views, mos): identical structure, independent parameters; each
    // view is concatenated with a constant plane holding the normalized MOS.
    GaussStat<T> encode_posterior(const std::vector<Var<T>>& views, double mos_normalized) const {
        if (mos_normalized < 0.0 || mos_normalized > 1.0)
            throw std::invalid_argument("encode_posterior: normalized MOS outside [0, 1]");
        return encode("posterior", views, &mos_normalized);
    }

    // One stochastic quality rating from the shared-parameter QRG. A null z
    // rates on all-zero stochastic features (the deterministic variant).
    Var<T> rate(const std::vector<Var<T>>& views, const Var<T>& z) const {
        if (views.empty()) throw ShapeError("rate: no views");
        const int h = views[0]->val.dim(1), w = views[0]->val.dim(2);
        Var<T> fs = z ? expand_spatial(z, h, w)
                      : constant(Tensor<T>::zeros({cfg_.latent_dim, h, w}));
        std::vector<Var<T>> pooled;
        pooled.reserve(views.size());
        for (const auto& v : views) {
            if (v->val.dim(0) != 4) throw ShapeError("rate: views must have 4 channels");
            const auto levels = backbone_features(concat_channels<T>({v, fs}));
            pooled.push_back(spatial_avg(fuse_multiscale(levels)));
        }
        Var<T> feat = add_n(pooled);
        return linear(feat, store_.at("qrg.head.w"), store_.at("qrg.head.b"));
    }

    // Backbone levels 2..4 for one (4 + latent_dim)-channel input. Stage s
    // output has stage_channels[s] channels at spatial size H / 2^(s+2)
    // (0-based s; a stride-2 stem precedes the four stride-2 stages).
    std::array<Var<T>, 3> backbone_features(const Var<T>& input) const {
        if (input->val.dim(0) != cfg_.qrg_input_channels())
            throw ShapeError("backbone: input channel count must be 4 + latent_dim");
        Var<T> x = conv2d(input, store_.at("qrg.stem.w"), store_.at("qrg.stem.b"), 2, 1, Activation::relu);
        std::array<Var<T>, 3> levels;
        for (int s = 0; s < 4; ++s) {
            for (int b = 0; b < cfg_.blocks_per_stage; ++b)
                x = residual_block(x, stage_prefix(s, b), b == 0 ? 2 : 1);
            if (s >= 1) levels[static_cast<std::size_t>(s - 1)] = x;
        }
        return levels;
    }

    // 1x1-reduce each level to the fusion width, average-pool the shallower
    // levels down to the deepest level's size, concatenate, 3x3-convolve.
    Var<T> fuse_multiscale(const std::array<Var<T>, 3>& levels) const {
        std::vector<Var<T>> reduced;
        const int target_h = levels[2]->val.dim(1);
        const int target_w = levels[2]->val.dim(2);
        for (int i = 0; i < 3; ++i) {
            const std::string p = "qrg.reduce" + std::to_string(i + 2);
            Var<T> r = conv2d(levels[static_cast<std::size_t>(i)], store_.at(p + ".w"), store_.at(p + ".b"),
                              1, 0, Activation::relu);
            const int fh = r->val.dim(1) / target_h;
            if (r->val.dim(1) != fh * target_h || r->val.dim(2) != fh * target_w)
                throw ShapeError("fuse_multiscale: non-integer pooling factor");
            if (fh > 1) r = avg_pool(r, fh);
            reduced.push_back(r);
        }
        return conv2d(concat_channels(reduced), store_.at("qrg.fuse.w"), store_.at("qrg.fuse.b"), 1, 1,
                      Activation::relu);
    }

private:
    std::string stage_prefix(int stage, int block) const {
        return "qrg.stage" + std::to_string(stage + 1) + ".block" + std::to_string(block + 1);
    }

    void create_encoder(const std::string& prefix, int in_channels) {
        int c_in = in_channels;
        for (std::size_t i = 0; i < cfg_.encoder_channels.size(); ++i) {
            const int c_out = cfg_.encoder_channels[i];
            const std::string p = prefix + ".conv" + std::to_string(i + 1);
            store_.create(p + ".w", {c_out, c_in, 3, 3}, Init::fan_in_uniform);
            store_.create(p + ".b", {c_out}, Init::zeros);
            c_in = c_out;
        }
        store_.create(prefix + ".fc1.w", {cfg_.encoder_fc_hidden, c_in}, Init::fan_in_uniform);
        store_.create(prefix + ".fc1.b", {cfg_.encoder_fc_hidden}, Init::zeros);
        store_.create(prefix + ".fc2.w", {2 * cfg_.latent_dim, cfg_.encoder_fc_hidden}, Init::fan_in_uniform);
        store_.create(prefix + ".fc2.b", {2 * cfg_.latent_dim}, Init::zeros);
    }

    void create_qrg() {
        const int in_c = cfg_.qrg_input_channels();
        store_.create("qrg.stem.w", {cfg_.stage_channels[0], in_c, 3, 3}, Init::fan_in_uniform);
        store_.create("qrg.stem.b", {cfg_.stage_channels[0]}, Init::zeros);
        int c_in = cfg_.stage_channels[0];
        for (int s = 0; s < 4; ++s) {
            const int c_out = cfg_.stage_channels[static_cast<std::size_t>(s)];
            for (int b = 0; b < cfg_.blocks_per_stage; ++b) {
                const std::string p = stage_prefix(s, b);
                const int bc_in = b == 0 ? c_in : c_out;
                const int stride = b == 0 ? 2 : 1;
                store_.create(p + ".conv1.w", {c_out, bc_in, 3, 3}, Init::fan_in_uniform);
                store_.create(p + ".conv1.b", {c_out}, Init::zeros);
                store_.create(p + ".conv2.w", {c_out, c_out, 3, 3}, Init::fan_in_uniform);
                store_.create(p + ".conv2.b", {c_out}, Init::zeros);
                if (stride != 1 || bc_in != c_out) {
                    store_.create(p + ".skip.w", {c_out, bc_in, 1, 1}, Init::fan_in_uniform);
                    store_.create(p + ".skip.b", {c_out}, Init::zeros);
                }
            }
            c_in = c_out;
        }
        for (int level = 2; level <= 4; ++level) {
            const std::string p = "qrg.reduce" + std::to_string(level);
            store_.create(p + ".w", {cfg_.fusion_channels, cfg_.stage_channels[static_cast<std::size_t>(level - 1)], 1, 1},
                          Init::fan_in_uniform);
            store_.create(p + ".b", {cfg_.fusion_channels}, Init::zeros);
        }
        store_.create("qrg.fuse.w", {cfg_.fusion_channels, 3 * cfg_.fusion_channels, 3, 3},
                      Init::fan_in_uniform);
        store_.create("qrg.fuse.b", {cfg_.fusion_channels}, Init::zeros);
        store_.create("qrg.head.w", {1, cfg_.fusion_channels}, Init::fan_in_uniform);
        store_.create("qrg.head.b", {1}, Init::zeros);
    }

    Var<T> residual_block(const Var<T>& x, const std::string& p, int stride) const {
        Var<T> y = conv2d(x, store_.at(p + ".conv1.w"), store_.at(p + ".conv1.b"), stride, 1,
                          Activation::relu);
        y = conv2d(y, store_.at(p + ".conv2.w"), store_.at(p + ".conv2.b"), 1, 1, Activation::none);
        Var<T> skip = store_.contains(p + ".skip.w")
                          ? conv2d(x, store_.at(p + ".skip.w"), store_.at(p + ".skip.b"), stride, 0,
                                   Activation::none)
                          : x;
        return relu(add(y, skip));
    }

    GaussStat<T> encode(const std::string& prefix, const std::vector<Var<T>>& views,
                        const double* mos_normalized) const {
        if (cfg_.no_stochastic) throw std::logic_error("latent encoders disabled (no_stochastic)");
        if (views.empty()) throw ShapeError("encode: no views");
        const int h = views[0]->val.dim(1), w = views[0]->val.dim(2);

        std::vector<Var<T>> pooled;
        pooled.reserve(views.size());
        for (const auto& v : views) {
            if (v->val.rank() != 3 || v->val.dim(0) != 4)
                throw ShapeError("encode: views must be 4 x H x W");
            if (v->val.dim(1) != h || v->val.dim(2) != w)
                throw ShapeError("encode: views must share one size");
            Var<T> x = v;
            if (mos_normalized)
                x = concat_channels<T>(
                    {v, constant(Tensor<T>::full({1, h, w}, static_cast<T>(*mos_normalized)))});
            for (std::size_t i = 0; i < cfg_.encoder_channels.size(); ++i) {
                const std::string p = prefix + ".conv" + std::to_string(i + 1);
                x = conv2d(x, store_.at(p + ".w"), store_.at(p + ".b"), 2, 1, Activation::relu);
            }
            pooled.push_back(spatial_avg(x));
        }
        Var<T> agg = add_n(pooled);
        Var<T> hid = relu(linear(agg, store_.at(prefix + ".fc1.w"), store_.at(prefix + ".fc1.b")));
        Var<T> stat2k = linear(hid, store_.at(prefix + ".fc2.w"), store_.at(prefix + ".fc2.b"));

        GaussStat<T> g;
        g.mu = slice(stat2k, 0, cfg_.latent_dim);
        g.log_sigma = clamp(slice(stat2k, cfg_.latent_dim, cfg_.latent_dim),
                            static_cast<T>(-kLogSigmaClamp), static_cast<T>(kLogSigmaClamp));
        g.sigma = vexp(g.log_sigma);
        return g;
    }

    ModelConfig cfg_;
    ParamStore<T> store_;
};

} // namespace pcqa
