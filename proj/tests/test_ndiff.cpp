#include <doctest.h>

#include "oracles.hpp"

#include "pcqa/graph.hpp"

using namespace pcqa;
using oracles::random_tensor;

namespace {

constexpr double kFdTol = 1e-4;
constexpr int kSeeds = 20;

} // namespace

TEST_CASE("conv2d: 1x1 identity kernel reproduces the input") {
    Rng rng(1);
    auto x = constant(random_tensor<float>({1, 3, 3}, rng));
    auto w = constant(Tensor<float>({1, 1, 1, 1}, {1.0f}));
    auto b = constant(Tensor<float>::zeros({1}));
    auto y = conv2d(x, w, b, 1, 0, Activation::none);
    CHECK(y->val.v == x->val.v);
}

TEST_CASE("conv2d: output size follows floor((H + 2p - k)/s) + 1") {
    Rng rng(2);
    auto x = constant(random_tensor<float>({1, 4, 4}, rng));
    auto w = constant(random_tensor<float>({2, 1, 3, 3}, rng));
    auto b = constant(Tensor<float>::zeros({2}));
    auto y = conv2d(x, w, b, 2, 1, Activation::none);
    CHECK(y->val.shape == std::vector<int>{2, 2, 2});
}

TEST_CASE("conv2d forward matches the nested-loop oracle") {
    Rng rng(3);
    for (int round = 0; round < 8; ++round) {
        const int C = 1 + static_cast<int>(rng.uniform_below(3));
        const int OC = 1 + static_cast<int>(rng.uniform_below(4));
        const int H = 4 + static_cast<int>(rng.uniform_below(5));
        const int stride = 1 + static_cast<int>(rng.uniform_below(2));
        const int pad = static_cast<int>(rng.uniform_below(2));
        const bool relu_after = rng.uniform() < 0.5;
        const auto xt = random_tensor<float>({C, H, H}, rng);
        const auto wt = random_tensor<float>({OC, C, 3, 3}, rng);
        const auto bt = random_tensor<float>({OC}, rng);
        auto y = conv2d(constant(xt), constant(wt), constant(bt), stride, pad,
                        relu_after ? Activation::relu : Activation::none);
        const auto ref = oracles::conv2d_naive(xt, wt, bt, stride, pad, relu_after);
        REQUIRE(y->val.shape == ref.shape);
        for (std::size_t i = 0; i < ref.numel(); ++i)
            CHECK(std::abs(y->val.v[i] - ref.v[i]) <= 1e-6);
    }
}

TEST_CASE("linear: identity, pure-bias, and dot-product oracle") {
    auto x = constant(Tensor<float>({3}, {1.5f, -2.0f, 0.25f}));
    auto eye = constant(Tensor<float>({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1}));
    auto zero_b = constant(Tensor<float>::zeros({3}));
    CHECK(linear(x, eye, zero_b)->val.v == x->val.v);

    auto zero_w = constant(Tensor<float>::zeros({2, 3}));
    auto b = constant(Tensor<float>({2}, {4.0f, -1.0f}));
    CHECK(linear(x, zero_w, b)->val.v == b->val.v);

    Rng rng(4);
    for (int round = 0; round < 8; ++round) {
        const auto xt = random_tensor<float>({5}, rng);
        const auto wt = random_tensor<float>({7, 5}, rng);
        const auto bt = random_tensor<float>({7}, rng);
        const auto y = linear(constant(xt), constant(wt), constant(bt));
        const auto ref = oracles::linear_naive(xt, wt, bt);
        for (std::size_t i = 0; i < ref.numel(); ++i)
            CHECK(std::abs(y->val.v[i] - ref.v[i]) <= 1e-6);
    }
}

TEST_CASE("spatial_avg: constants, arithmetic, and direct-sum oracle") {
    auto c = constant(Tensor<float>::full({3, 4, 5}, 2.5f));
    const auto avg = spatial_avg(c);
    for (float v : avg->val.v) CHECK(v == 2.5f);

    auto t = constant(Tensor<float>({1, 2, 2}, {0, 1, 2, 3}));
    CHECK(spatial_avg(t)->val.v[0] == doctest::Approx(1.5));

    Rng rng(5);
    const auto xt = random_tensor<float>({4, 6, 3}, rng);
    const auto y = spatial_avg(constant(xt));
    const auto ref = oracles::spatial_avg_naive(xt);
    for (std::size_t i = 0; i < ref.numel(); ++i) CHECK(std::abs(y->val.v[i] - ref.v[i]) <= 1e-7);
}

TEST_CASE("backward: sum of a parameter gives an all-ones gradient") {
    Rng rng(6);
    auto w = leaf(random_tensor<double>({8}, rng), true);
    backward(reduce_sum(w));
    for (double g : w->grad.v) CHECK(g == 1.0);
}

TEST_CASE("backward: gradients accumulate additively across branches") {
    Rng rng(7);
    auto w = leaf(random_tensor<double>({4}, rng), true);
    auto a = constant(random_tensor<double>({4}, rng));
    // loss = sum(w .* a) + sum(w) -> grad = a + 1
    backward(add(reduce_sum(mul(w, a)), reduce_sum(w)));
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(w->grad.v[i] == doctest::Approx(a->val.v[i] + 1.0).epsilon(1e-12));
}

TEST_CASE("backward on a detached constant is an error") {
    auto c = constant(Tensor<double>::scalar(1.0));
    CHECK_THROWS_AS(backward(c), std::logic_error);
    auto v = constant(Tensor<double>({3}, {1, 2, 3}));
    CHECK_THROWS_AS(backward(reduce_sum(v)), std::logic_error); // still no grad-requiring leaf
}

TEST_CASE("ops reject shape mismatches and never mutate inputs") {
    Rng rng(8);
    const auto at = random_tensor<float>({3}, rng);
    const auto bt = random_tensor<float>({4}, rng);
    auto a = constant(at), b = constant(bt);
    CHECK_THROWS_AS(add(a, b), ShapeError);
    CHECK_THROWS_AS(mul(a, b), ShapeError);
    CHECK_THROWS_AS(linear(a, constant(random_tensor<float>({2, 4}, rng)), constant(Tensor<float>::zeros({2}))),
                    ShapeError);

    const auto snapshot = at.v;
    auto x = constant(at);
    vexp(x);
    vabs(x);
    scale(x, 2.0f);
    relu(x);
    CHECK(x->val.v == snapshot);
}

TEST_CASE("non-finite results are detected at the producing op") {
    auto big = constant(Tensor<float>::full({4}, 100.0f));
    CHECK_THROWS_AS(vexp(big), NonFiniteError); // exp(100) overflows float
}

TEST_CASE("avg_pool rejects non-integer factors") {
    Rng rng(9);
    auto x = constant(random_tensor<float>({2, 6, 6}, rng));
    CHECK(avg_pool(x, 3)->val.shape == std::vector<int>{2, 2, 2});
    CHECK_THROWS_AS(avg_pool(x, 4), ShapeError);
}

namespace {

// Magnitudes in [0.2, 1.0] with random sign: keeps finite differencing away
// from the relu/abs kinks.
Tensor<double> random_signed_away_from_zero(std::vector<int> shape, Rng& rng) {
    Tensor<double> t(std::move(shape));
    for (auto& x : t.v) {
        const double mag = 0.2 + 0.8 * rng.uniform();
        x = rng.uniform() < 0.5 ? -mag : mag;
    }
    return t;
}

} // namespace

TEST_CASE("per-op gradients match central finite differences on 20 seeds each") {
    for (int seed = 1; seed <= kSeeds; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed));
        {
            // conv2d over both strides/pads with relu on and off
            auto x = leaf(random_tensor<double>({2, 5, 5}, rng), true);
            auto w = leaf(random_tensor<double>({3, 2, 3, 3}, rng), true);
            auto b = leaf(random_tensor<double>({3}, rng), true);
            const int stride = 1 + seed % 2, pad = seed % 2;
            const auto act = seed % 3 == 0 ? Activation::relu : Activation::none;
            const double err = oracles::fd_max_rel_err(
                {x, w, b}, [&] { return reduce_sum(conv2d(x, w, b, stride, pad, act)); });
            CHECK(err < kFdTol);
        }
        {
            auto x = leaf(random_tensor<double>({6}, rng), true);
            auto w = leaf(random_tensor<double>({4, 6}, rng), true);
            auto b = leaf(random_tensor<double>({4}, rng), true);
            const double err =
                oracles::fd_max_rel_err({x, w, b}, [&] { return reduce_sum(vabs(linear(x, w, b))); });
            CHECK(err < kFdTol);
        }
        {
            auto x = leaf(random_tensor<double>({3, 4, 4}, rng), true);
            const double err = oracles::fd_max_rel_err({x}, [&] { return reduce_sum(spatial_avg(x)); });
            CHECK(err < kFdTol);
        }
        {
            auto z = leaf(random_tensor<double>({3}, rng), true);
            const double err = oracles::fd_max_rel_err(
                {z}, [&] { return reduce_sum(mul(tile_spatial(z, 4, 5), tile_spatial(z, 4, 5))); });
            CHECK(err < kFdTol);
        }
        {
            auto x = leaf(random_tensor<double>({2, 6, 6}, rng), true);
            const double err = oracles::fd_max_rel_err({x}, [&] { return reduce_sum(avg_pool(x, 2)); });
            CHECK(err < kFdTol);
        }
        {
            // elementwise chain: relu, exp, mul, clamp (interior), abs, add,
            // sub, scale, concat. Inputs bounded away from every kink.
            auto a = leaf(random_signed_away_from_zero({1, 2, 3}, rng), true);
            auto b = leaf(random_signed_away_from_zero({1, 2, 3}, rng), true);
            const double err = oracles::fd_max_rel_err({a, b}, [&] {
                auto stacked = concat_channels<double>({relu(a), vexp(scale(b, 0.5)), mul(a, b)});
                auto shifted = vabs(add_const(clamp(stacked, -3.0, 3.0), 2.0));
                return reduce_sum(sub(shifted, scale(add(stacked, stacked), 0.125)));
            });
            CHECK(err < kFdTol);
        }
        {
            auto v = leaf(random_tensor<double>({8}, rng), true);
            const double err = oracles::fd_max_rel_err(
                {v}, [&] { return reduce_sum(mul(slice(v, 2, 4), slice(v, 0, 4))); });
            CHECK(err < kFdTol);
        }
    }
}

TEST_CASE("clamp blocks gradient outside its range; abs flips it for negatives") {
    auto x = leaf(Tensor<double>({3}, {-2.0, 0.3, 2.0}), true);
    backward(reduce_sum(clamp(x, -1.0, 1.0)));
    CHECK(x->grad.v == std::vector<double>{0.0, 1.0, 0.0});

    auto y = leaf(Tensor<double>({3}, {-0.7, 0.0, 0.4}), true);
    backward(reduce_sum(vabs(y)));
    CHECK(y->grad.v == std::vector<double>{-1.0, 0.0, 1.0}); // subgradient 0 at the kink
}
