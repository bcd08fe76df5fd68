#include <benchmark/benchmark.h>

#include "wsisel/cluster.hpp"
#include "wsisel/entropy.hpp"
#include "wsisel/evalharness.hpp"
#include "wsisel/pca.hpp"
#include "wsisel/simbench.hpp"

namespace {

using namespace wsisel;

const SimResult& bench_data() {
  static const SimResult result = [] {
    SimConfig config;
    config.target_wsis = 30;
    config.source_wsis = 10;
    config.min_patches_per_wsi = 100;
    config.max_patches_per_wsi = 200;
    config.seed = 5;
    return generate(config);
  }();
  return result;
}

const FeatureTable& reduced_target() {
  static const FeatureTable table = [] {
    const PcaModel model = fit_pca(bench_data().target, 8);
    return transform(model, bench_data().target);
  }();
  return table;
}

void BM_FitPca(benchmark::State& state) {
  const FeatureTable& target = bench_data().target;
  const int dim = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_pca(target, dim));
  }
  state.SetItemsProcessed(state.iterations() * target.size());
}
BENCHMARK(BM_FitPca)->Arg(4)->Arg(8)->Arg(16);

void BM_Transform(benchmark::State& state) {
  const FeatureTable& target = bench_data().target;
  const PcaModel model = fit_pca(target, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(transform(model, target));
  }
  state.SetItemsProcessed(state.iterations() * target.size());
}
BENCHMARK(BM_Transform);

void BM_SeedPlusPlus(benchmark::State& state) {
  const FeatureTable& table = reduced_target();
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(seed_plus_plus(table, 10, seed++));
  }
  state.SetItemsProcessed(state.iterations() * table.size());
}
BENCHMARK(BM_SeedPlusPlus);

void BM_FitKmeans(benchmark::State& state) {
  const FeatureTable& table = reduced_target();
  KMeansOptions options;
  options.restarts = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_kmeans(table, 10, 17, options));
  }
}
BENCHMARK(BM_FitKmeans)->Arg(1)->Arg(5)->Arg(10);

void BM_FitKmeansParallelRestarts(benchmark::State& state) {
  const FeatureTable& table = reduced_target();
  KMeansOptions options;
  options.restarts = 10;
  options.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_kmeans(table, 10, 17, options));
  }
}
BENCHMARK(BM_FitKmeansParallelRestarts)->Arg(1)->Arg(2)->Arg(4);

void BM_GroupEntropies(benchmark::State& state) {
  const FeatureTable& table = reduced_target();
  KMeansOptions options;
  options.restarts = 2;
  const auto kmeans = fit_kmeans(table, 10, 17, options);
  for (auto _ : state) {
    benchmark::DoNotOptimize(group_entropies(kmeans.assignment, table, 10));
  }
  state.SetItemsProcessed(state.iterations() * table.size());
}
BENCHMARK(BM_GroupEntropies);

void BM_TrainEpoch(benchmark::State& state) {
  const FeatureTable& source = bench_data().source;
  TrainConfig config;
  config.epochs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(source, nullptr, config, 3));
  }
  state.SetItemsProcessed(state.iterations() * source.size());
}
BENCHMARK(BM_TrainEpoch);

}  // namespace

BENCHMARK_MAIN();
