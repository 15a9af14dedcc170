#include <benchmark/benchmark.h>

#include <random>

#include "fexprobe/fexprobe.hpp"

using namespace fexprobe;

namespace {

std::vector<double> normal_sample(std::size_t n, double shift, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(shift, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

void BM_SignedKs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto inner = normal_sample(n / 10, 0.5, 1);
  const auto outer = normal_sample(n, 0.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(stats::signed_ks(inner, outer));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n + n / 10));
}
BENCHMARK(BM_SignedKs)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_KsSweep(benchmark::State& state) {
  SynthSpec spec;
  spec.images_per_class.assign(static_cast<std::size_t>(state.range(1)), 100);
  spec.n_features = static_cast<std::size_t>(state.range(0));
  const auto data = generate_synthetic(spec, 3);
  SweepOptions opts;
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(ks_sweep(data.embedding, data.labels, opts));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_KsSweep)->Args({1024, 10})->Args({1024, 67})->Args({4096, 67})->Unit(benchmark::kMillisecond);

void BM_AvgDistanceCurve(benchmark::State& state) {
  SynthSpec spec;
  spec.images_per_class.assign(67, 100);
  spec.n_features = static_cast<std::size_t>(state.range(0));
  const auto data = generate_synthetic(spec, 4);
  const auto real = ks_sweep(data.embedding, data.labels);
  const std::vector<KSMatrix> rand{ks_sweep(data.embedding, randomize_labels(data.labels, 5))};
  for (auto _ : state) benchmark::DoNotOptimize(avg_distance_curve(real, rand, Side::Positive));
}
BENCHMARK(BM_AvgDistanceCurve)->Arg(1024)->Arg(12416)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
