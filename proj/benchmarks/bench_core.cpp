#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "osval/active.hpp"
#include "osval/dataset.hpp"
#include "osval/synth.hpp"

using namespace osval;

namespace {

const Dataset& preset() {
  static const Dataset ds = generate(*synth_preset("utsig-like"));
  return ds;
}

UserSplit split_for(UserId user) {
  return build_split(preset(), user, SplitConfig{}, 7);
}

SvmModel calibrated_model(const UserSplit& split) {
  const auto data =
      make_training_set(preset(), split.initial_positive_ids, split.initial_negative_ids);
  return fit_platt(train(data, SvmConfig{}), data);
}

}  // namespace

// One initial training set: 2 positives against 228 negatives, dim 64.
void BM_Train(benchmark::State& state) {
  const auto split = split_for(3);
  const auto data =
      make_training_set(preset(), split.initial_positive_ids, split.initial_negative_ids);
  for (auto _ : state) benchmark::DoNotOptimize(train(data, SvmConfig{}));
}
BENCHMARK(BM_Train)->Unit(benchmark::kMicrosecond);

void BM_MarginBand(benchmark::State& state) {
  const auto split = split_for(3);
  const auto model = calibrated_model(split);
  for (auto _ : state) {
    benchmark::DoNotOptimize(margin_band(model, split.unlabeled_pool_ids, preset()));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(split.unlabeled_pool_ids.size()));
}
BENCHMARK(BM_MarginBand)->Unit(benchmark::kMicrosecond);

void BM_SelectEntropy(benchmark::State& state) {
  const auto split = split_for(3);
  const auto model = calibrated_model(split);
  const auto& band = split.unlabeled_pool_ids;
  for (auto _ : state) benchmark::DoNotOptimize(select_entropy(model, band, preset()));
}
BENCHMARK(BM_SelectEntropy)->Unit(benchmark::kMicrosecond);

// Knn scores for a band of the given size against the full pool.
void BM_KnnScores(benchmark::State& state) {
  const auto split = split_for(3);
  const auto& pool = split.unlabeled_pool_ids;
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(state.range(0)), pool.size());
  const std::vector<SampleId> band(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
  for (auto _ : state) benchmark::DoNotOptimize(knn_scores(band, pool, preset(), 5));
}
BENCHMARK(BM_KnnScores)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ActiveLoop(benchmark::State& state) {
  const auto split = split_for(3);
  Strategy s;
  s.kind = static_cast<StrategyKind>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_al_loop(split, s, 5, SvmConfig{}, preset(), 11));
  }
}
BENCHMARK(BM_ActiveLoop)
    ->Arg(static_cast<int>(StrategyKind::Distance))
    ->Arg(static_cast<int>(StrategyKind::Entropy))
    ->Arg(static_cast<int>(StrategyKind::Knn))
    ->Arg(static_cast<int>(StrategyKind::Random))
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
