#include <benchmark/benchmark.h>

#include <vector>

#include "xfid/alignment.hpp"
#include "xfid/dataset.hpp"
#include "xfid/explainers.hpp"
#include "xfid/ground_truth.hpp"
#include "xfid/model_gen.hpp"

namespace {

using namespace xfid;

AdditiveModel bench_model(int d) {
    GenParams p;
    p.d = d;
    p.pct_nonlinear = 0.375;
    p.pct_interact = 0.5;
    p.order_interact = 2;
    p.seed = 42;
    return generate_model(p, 500);
}

void BM_EvalModel(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const AdditiveModel model = bench_model(d);
    const Dataset data = sample_dataset(d, 7);
    std::size_t row = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_model(model, data.X.row(row)));
        row = (row + 1) % data.n();
    }
}
BENCHMARK(BM_EvalModel)->Arg(4)->Arg(16);

void BM_GroundTruth(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const AdditiveModel model = bench_model(d);
    const Dataset data = sample_dataset(d, 7);
    for (auto _ : state) benchmark::DoNotOptimize(explain_ground_truth(model, data));
}
BENCHMARK(BM_GroundTruth)->Arg(4)->Arg(16);

void BM_MatchEffects(benchmark::State& state) {
    const int count = static_cast<int>(state.range(0));
    // dense-overlap worst case: every pair of effects shares feature 0
    std::vector<std::vector<int>> m(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) m[static_cast<std::size_t>(i)] = {0, 1 + i % 64};
    for (auto _ : state) benchmark::DoNotOptimize(match_effects(m, m));
}
BENCHMARK(BM_MatchEffects)->Arg(100)->Arg(1000);

void BM_PdCurves(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const AdditiveModel model = bench_model(d);
    const Dataset data = sample_dataset(d, 7);
    const BlackBox box = [&model](std::span<const double> x) { return eval_model(model, x); };
    for (auto _ : state) benchmark::DoNotOptimize(compute_pd_curves(box, data.X));
}
BENCHMARK(BM_PdCurves)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_LimeFit(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const AdditiveModel model = bench_model(d);
    const Dataset data = sample_dataset(d, 7);
    const BlackBox box = [&model](std::span<const double> x) { return eval_model(model, x); };
    for (auto _ : state)
        benchmark::DoNotOptimize(lime_fit(box, data.stats, data.X.row(0), 3));
}
BENCHMARK(BM_LimeFit)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_KernelShap(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const AdditiveModel model = bench_model(d);
    const Dataset data = sample_dataset(d, 7);
    const Matrix background = summarize_background(data.X, 100, 11);
    const BlackBox box = [&model](std::span<const double> x) { return eval_model(model, x); };
    for (auto _ : state)
        benchmark::DoNotOptimize(kernelshap_fit(box, data.X.row(0), background, 3));
}
// d=8 runs the exact 2^d - 2 enumeration; d=16 the sampled 2048 + 2d budget
BENCHMARK(BM_KernelShap)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_KmeansBackground(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const Dataset data = sample_dataset(d, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(summarize_background(data.X, 100, 11));
}
BENCHMARK(BM_KmeansBackground)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
