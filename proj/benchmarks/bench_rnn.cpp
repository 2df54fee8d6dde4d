#include <benchmark/benchmark.h>

#include "mmrnn/baselines.hpp"
#include "mmrnn/coupled.hpp"
#include "mmrnn/data.hpp"
#include "mmrnn/metrics.hpp"
#include "mmrnn/rnn2d.hpp"
#include "mmrnn/train.hpp"
#include "mmrnn/upsample.hpp"

namespace mmrnn {
namespace {

GridPair scene(int side) {
  SceneSpec spec;
  spec.height = side;
  spec.width = side;
  return generate_scene(spec, 0);
}

MultimodalModel coupled_model(const GridPair& pair, int hidden) {
  return init_model(TrainConfig{}, dims_of(pair, hidden), 7);
}

void BM_ForwardCoupled(benchmark::State& state) {
  const GridPair pair = scene(static_cast<int>(state.range(0)));
  const MultimodalModel model = coupled_model(pair, static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(forward_coupled(model, pair.color, pair.depth));
  state.SetItemsProcessed(state.iterations() * pair.color.cell_count());
}
BENCHMARK(BM_ForwardCoupled)->Args({16, 64})->Args({32, 64})->Args({16, 16});

void BM_BackwardCoupled(benchmark::State& state) {
  const GridPair pair = scene(static_cast<int>(state.range(0)));
  const MultimodalModel model = coupled_model(pair, static_cast<int>(state.range(1)));
  const ForwardCache cache = forward_coupled(model, pair.color, pair.depth);
  const auto mode = state.range(2) ? BackwardMode::Full : BackwardMode::PaperFaithful;
  for (auto _ : state) benchmark::DoNotOptimize(backward_coupled(model, pair.color, pair.depth, cache, mode));
  state.SetItemsProcessed(state.iterations() * pair.color.cell_count());
}
BENCHMARK(BM_BackwardCoupled)->Args({16, 64, 1})->Args({16, 64, 0})->Args({32, 64, 1});

void BM_ForwardBackwardSingle(benchmark::State& state) {
  const GridPair pair = scene(static_cast<int>(state.range(0)));
  const SingleModel model =
      init_single(TrainConfig{}, {pair.color.feat_dim(), 64, pair.color.num_classes()}, 7, InitStream::Color);
  for (auto _ : state) {
    const SingleCache cache = forward_single(model, pair.color);
    benchmark::DoNotOptimize(backward_single(model, pair.color, cache));
  }
  state.SetItemsProcessed(state.iterations() * pair.color.cell_count());
}
BENCHMARK(BM_ForwardBackwardSingle)->Arg(16)->Arg(32);

void BM_TrainEpoch(benchmark::State& state) {
  SceneSpec spec;
  const auto data = generate_dataset(spec, static_cast<std::size_t>(state.range(0)));
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_epochs(cfg, data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_UpsamplePredict(benchmark::State& state) {
  const GridPair pair = scene(16);
  const MultimodalModel model = coupled_model(pair, 64);
  const ProbMap probs = fused_probabilities(forward_coupled(model, pair.color, pair.depth));
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(argmax_map(bilinear_upsample(probs, 16 * k, 16 * k)));
}
BENCHMARK(BM_UpsamplePredict)->Arg(4)->Arg(16);

void BM_Summarize(benchmark::State& state) {
  ConfusionMatrix cm(40);
  for (int t = 0; t < 40; ++t) {
    for (int p = 0; p < 40; ++p) cm.add(t, p);
  }
  for (auto _ : state) benchmark::DoNotOptimize(summarize(cm));
}
BENCHMARK(BM_Summarize);

}  // namespace
}  // namespace mmrnn

BENCHMARK_MAIN();
