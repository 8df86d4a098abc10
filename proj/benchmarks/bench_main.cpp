#include <benchmark/benchmark.h>

#include "pcqa/graph.hpp"
#include "pcqa/metrics.hpp"
#include "pcqa/model.hpp"
#include "pcqa/objective.hpp"
#include "pcqa/synthetic.hpp"

namespace {

using namespace pcqa;

Tensor<float> random_tensor(std::vector<int> shape, Rng& rng) {
    Tensor<float> t(std::move(shape));
    for (auto& x : t.v) x = static_cast<float>(rng.uniform() - 0.5);
    return t;
}

void BM_Conv2dForward(benchmark::State& state) {
    Rng rng(1);
    const int c = static_cast<int>(state.range(0));
    auto x = constant(random_tensor({c, 32, 32}, rng));
    auto w = leaf(random_tensor({2 * c, c, 3, 3}, rng), true);
    auto b = leaf(Tensor<float>::zeros({2 * c}), true);
    for (auto _ : state) {
        auto y = conv2d(x, w, b, 2, 1, Activation::relu);
        benchmark::DoNotOptimize(y->val.v.data());
    }
}
BENCHMARK(BM_Conv2dForward)->Arg(16)->Arg(64);

void BM_TrainStepDesk(benchmark::State& state) {
    Rng rng(2);
    ModelConfig mc;
    mc.height = mc.width = 64;
    QualityModel<float> model(mc, 7);
    std::vector<Var<float>> views;
    for (int v = 0; v < 2; ++v) views.push_back(constant(random_tensor({4, 64, 64}, rng)));
    for (auto _ : state) {
        model.params().zero_grad();
        Rng step_rng(3);
        auto loss = overall_loss(model, views, 0.5, 0.5, 0.4, step_rng);
        backward(loss.total);
        benchmark::DoNotOptimize(loss.parts.total);
    }
}
BENCHMARK(BM_TrainStepDesk);

void BM_RenderDesk(benchmark::State& state) {
    const Stimulus st = gen_stimulus(BaseShape::torus, 4096, {}, 11);
    const PointCloud pc = normalize_unit_cube(st.cloud);
    Rng rng(5);
    for (auto _ : state) {
        auto views = render_views(pc, 2, 64, 64, rng, false);
        benchmark::DoNotOptimize(views.data());
    }
}
BENCHMARK(BM_RenderDesk);

void BM_MetricReport(benchmark::State& state) {
    Rng rng(9);
    std::vector<double> pred, mos;
    for (int i = 0; i < 200; ++i) {
        const double m = rng.uniform();
        mos.push_back(m);
        pred.push_back(m + 0.05 * rng.normal());
    }
    for (auto _ : state) {
        auto rep = report(pred, mos);
        benchmark::DoNotOptimize(rep.srcc);
    }
}
BENCHMARK(BM_MetricReport);

} // namespace

BENCHMARK_MAIN();
