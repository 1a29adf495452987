#include <benchmark/benchmark.h>

#include <vector>

#include "demo.hpp"
#include "sisynth/features.hpp"
#include "sisynth/linear_model.hpp"
#include "sisynth/metrics.hpp"
#include "sisynth/rng.hpp"

namespace {

using namespace sisynth;

std::vector<std::string> texts_of(const Dataset& d) {
  std::vector<std::string> out;
  for (const auto& r : d.records()) out.push_back(r.text);
  return out;
}

void BM_FitFeatures(benchmark::State& state) {
  const auto texts = texts_of(cli::make_demo_real_corpus(static_cast<std::size_t>(state.range(0)), 3));
  for (auto _ : state) benchmark::DoNotOptimize(FeatureModel::fit(texts));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * texts.size()));
}
BENCHMARK(BM_FitFeatures)->Arg(200)->Arg(2000);

void BM_Transform(benchmark::State& state) {
  const auto texts = texts_of(cli::make_demo_real_corpus(500, 3));
  const auto features = FeatureModel::fit(texts);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(features.transform(texts[i++ % texts.size()]));
}
BENCHMARK(BM_Transform);

void BM_TrainBaseline(benchmark::State& state) {
  const auto corpus = cli::make_demo_real_corpus(static_cast<std::size_t>(state.range(0)), 5);
  TrainConfig config;
  config.epochs = 10;
  const BaselineTrainer trainer(config);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.fit(corpus));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * corpus.size() * config.epochs));
}
BENCHMARK(BM_TrainBaseline)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ComputeMetrics(benchmark::State& state) {
  const auto schema = LabelSchema::fourclass();
  Rng rng(1);
  std::vector<Label> pred, gold;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    pred.push_back(schema.at(rng.below(schema.size())));
    gold.push_back(schema.at(rng.below(schema.size())));
  }
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(pred, gold, SchemaKind::kFourClass));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeMetrics)->Arg(1000)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
