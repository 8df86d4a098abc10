#include <doctest.h>

#include "oracles.hpp"

#include "pcqa/model.hpp"

using namespace pcqa;
using oracles::random_tensor;

namespace {

ModelConfig tiny_config() {
    ModelConfig c;
    c.latent_dim = 2;
    c.fusion_channels = 2;
    c.height = 8;
    c.width = 8;
    c.encoder_channels = {2, 2};
    c.encoder_fc_hidden = 3;
    c.stage_channels = {2, 3, 4, 5};
    return c;
}

template <typename T>
std::vector<Var<T>> random_views(int n, int h, int w, Rng& rng) {
    std::vector<Var<T>> out;
    for (int i = 0; i < n; ++i) out.push_back(constant(random_tensor<T>({4, h, w}, rng, 0.0, 1.0)));
    return out;
}

} // namespace

TEST_CASE("backbone levels at 64x64 defaults: 32x8x8, 64x4x4, 128x2x2") {
    ModelConfig cfg;
    cfg.height = cfg.width = 64;
    QualityModel<float> model(cfg, 2);
    Rng rng(1);
    const auto input = constant(random_tensor<float>({cfg.qrg_input_channels(), 64, 64}, rng));
    const auto levels = model.backbone_features(input);
    CHECK(levels[0]->val.shape == std::vector<int>{32, 8, 8});
    CHECK(levels[1]->val.shape == std::vector<int>{64, 4, 4});
    CHECK(levels[2]->val.shape == std::vector<int>{128, 2, 2});
}

TEST_CASE("backbone is deterministic, including on all-zero input") {
    QualityModel<float> model(tiny_config(), 5);
    const auto zero = constant(Tensor<float>::zeros({6, 8, 8}));
    const auto a = model.backbone_features(zero);
    const auto b = model.backbone_features(zero);
    for (int l = 0; l < 3; ++l) CHECK(a[static_cast<std::size_t>(l)]->val.v == b[static_cast<std::size_t>(l)]->val.v);
    CHECK_THROWS_AS(model.backbone_features(constant(Tensor<float>::zeros({5, 8, 8}))), ShapeError);
}

TEST_CASE("fused map has fusion_channels channels at the deepest level's size") {
    ModelConfig cfg;
    cfg.height = cfg.width = 64;
    cfg.fusion_channels = 32;
    QualityModel<float> model(cfg, 3);
    Rng rng(2);
    const auto input = constant(random_tensor<float>({cfg.qrg_input_channels(), 64, 64}, rng));
    const auto fused = model.fuse_multiscale(model.backbone_features(input));
    CHECK(fused->val.shape == std::vector<int>{32, 2, 2});
}

TEST_CASE("zero features with zero biases fuse to an all-zero map") {
    ModelConfig cfg = tiny_config();
    QualityModel<float> model(cfg, 4);
    std::array<Var<float>, 3> zeros = {constant(Tensor<float>::zeros({3, 2, 2})),
                                       constant(Tensor<float>::zeros({4, 1, 1})),
                                       constant(Tensor<float>::zeros({5, 1, 1}))};
    const auto fused = model.fuse_multiscale(zeros);
    for (float v : fused->val.v) CHECK(v == 0.0f);
}

TEST_CASE("rate: scalar output, view-permutation invariant, deterministic in z") {
    QualityModel<float> model(tiny_config(), 6);
    Rng rng(7);
    auto views = random_views<float>(3, 8, 8, rng);
    auto z = constant(random_tensor<float>({2}, rng));

    const auto r1 = model.rate(views, z);
    REQUIRE(r1->val.numel() == 1);
    CHECK(std::isfinite(static_cast<double>(r1->val.v[0])));
    const auto r2 = model.rate(views, z);
    CHECK(r1->val.v[0] == r2->val.v[0]);

    std::rotate(views.begin(), views.begin() + 2, views.end());
    CHECK(model.rate(views, z)->val.v[0] == r1->val.v[0]);
}

TEST_CASE("distinct latent samples generally produce distinct ratings") {
    QualityModel<float> model(tiny_config(), 8);
    Rng rng(9);
    int distinct = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto views = random_views<float>(2, 8, 8, rng);
        const auto za = constant(random_tensor<float>({2}, rng));
        const auto zb = constant(random_tensor<float>({2}, rng));
        distinct += model.rate(views, za)->val.v[0] != model.rate(views, zb)->val.v[0];
    }
    CHECK(distinct >= 1);
}

TEST_CASE("null z rates on zero stochastic features") {
    QualityModel<float> model(tiny_config(), 10);
    Rng rng(11);
    const auto views = random_views<float>(2, 8, 8, rng);
    const auto via_null = model.rate(views, nullptr);
    const auto via_zero = model.rate(views, constant(Tensor<float>::zeros({2})));
    CHECK(via_null->val.v[0] == via_zero->val.v[0]);
}

TEST_CASE("blocks_per_stage > 1 keeps the level geometry") {
    ModelConfig cfg = tiny_config();
    cfg.blocks_per_stage = 2;
    cfg.height = cfg.width = 16;
    QualityModel<float> model(cfg, 12);
    Rng rng(13);
    const auto input = constant(random_tensor<float>({6, 16, 16}, rng));
    const auto levels = model.backbone_features(input);
    CHECK(levels[0]->val.shape == std::vector<int>{3, 2, 2});
    CHECK(levels[1]->val.shape == std::vector<int>{4, 1, 1});
    CHECK(levels[2]->val.shape == std::vector<int>{5, 1, 1});
}

TEST_CASE("QRG gradients pass finite differences on the tiny config") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        ModelConfig cfg = tiny_config();
        cfg.no_stochastic = true; // QRG parameters only
        QualityModel<double> model(cfg, seed);
        Rng rng(seed + 50);
        oracles::randomize_params(model.params(), rng);
        const auto views = random_views<double>(2, 8, 8, rng);
        const auto z = constant(random_tensor<double>({2}, rng));

        std::vector<Var<double>> leaves;
        for (const auto& [name, p] : model.params().entries()) leaves.push_back(p);
        const double err =
            oracles::fd_max_rel_err(leaves, [&] { return vabs(model.rate(views, z)); });
        CHECK(err < 1e-4);
    }
}

TEST_CASE("rating gradient reaches mu and sigma through the reparameterization") {
    QualityModel<double> model(tiny_config(), 44);
    Rng rng(45);
    oracles::randomize_params(model.params(), rng);
    const auto views = random_views<double>(2, 8, 8, rng);
    auto mu = leaf(random_tensor<double>({2}, rng), true);
    auto log_sigma = leaf(random_tensor<double>({2}, rng, -0.5, 0.5), true);
    const Tensor<double> eps = draw_standard_normal<double>(2, rng);

    const double err = oracles::fd_max_rel_err({mu, log_sigma}, [&] {
        GaussStat<double> stat;
        stat.mu = mu;
        stat.log_sigma = log_sigma;
        stat.sigma = vexp(log_sigma);
        return model.rate(views, reparameterize(stat, eps));
    });
    CHECK(err < 1e-4);
    double grad_norm = 0.0;
    for (double g : mu->grad.v) grad_norm += g * g;
    for (double g : log_sigma->grad.v) grad_norm += g * g;
    CHECK(grad_norm > 0.0);
}
