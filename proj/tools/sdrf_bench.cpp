#include <benchmark/benchmark.h>

#include <numeric>

#include "sdrf/forest.hpp"
#include "sdrf/reference.hpp"
#include "sdrf/sim.hpp"

using namespace sdrf;

namespace {

const SurveySample& sample_for(std::size_t N) {
  static std::map<std::size_t, SurveySample> cache;
  auto it = cache.find(N);
  if (it == cache.end()) {
    const SimConfig c = sim_preset(N);
    it = cache.emplace(N, apply_survey(generate_population(c, 1), c, 2)).first;
  }
  return it->second;
}

ForestConfig bench_config() {
  ForestConfig cfg;
  cfg.num_trees = 64;
  cfg.master_seed = 3;
  return cfg;
}

void BM_FitParallel(benchmark::State& state) {
  const auto& s = sample_for(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_forest(s, bench_config()));
}

void BM_FitSerial(benchmark::State& state) {
  const auto& s = sample_for(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::fit_forest_serial(s, bench_config()));
}

struct RootNode {
  const SurveySample& s;
  std::vector<std::size_t> units;
  std::vector<double> weights;
  KernelSpec kernel;

  explicit RootNode(const SurveySample& sample)
      : s(sample), units(sample.size()), weights(sample.size()), kernel(median_heuristic(sample.y), sample.y.cols()) {
    std::iota(units.begin(), units.end(), 0);
    for (std::size_t i = 0; i < s.size(); ++i) weights[i] = 1.0 / s.pi[i];
  }
  NodeView view() const { return {s.x, s.y, units, weights}; }
};

const std::vector<std::size_t> kFeatures{0, 1, 2};

void BM_SplitScan(benchmark::State& state) {
  const RootNode root(sample_for(static_cast<std::size_t>(state.range(0))));
  const SplitContext ctx(root.s.y, root.kernel);
  SplitSearch search;
  search.min_node_size = 20;
  for (auto _ : state) benchmark::DoNotOptimize(best_split(root.view(), kFeatures, ctx, search));
}

void BM_SplitExhaustive(benchmark::State& state) {
  const RootNode root(sample_for(static_cast<std::size_t>(state.range(0))));
  SplitSearch search;
  search.min_node_size = 20;
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::best_split_exhaustive(root.view(), kFeatures, root.kernel, search));
  }
}

void BM_ForestWeights(benchmark::State& state) {
  const Forest f = fit_forest(sample_for(5000), bench_config());
  const std::vector<double> x{0.4, 1.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(forest_weights(f, x));
}

void BM_ForestWeightsNaive(benchmark::State& state) {
  const Forest f = fit_forest(sample_for(5000), bench_config());
  const std::vector<double> x{0.4, 1.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(reference::forest_weights_naive(f, x));
}

}  // namespace

BENCHMARK(BM_FitParallel)->Arg(5000)->Arg(15000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FitSerial)->Arg(5000)->Arg(15000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SplitScan)->Arg(5000)->Arg(15000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SplitExhaustive)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestWeights)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ForestWeightsNaive)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
