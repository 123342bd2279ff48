#include <benchmark/benchmark.h>

#include <random>

#include "ruelle/extremality.hpp"
#include "ruelle/path_space.hpp"
#include "ruelle/transfer.hpp"

using namespace ruelle;

namespace {

// Normalized weight on the full k-shift at the given depth: V(a x) = t(a x) / sum_b t(b x).
CylinderFunction normalized_weight(int k, int depth, std::uint64_t seed) {
  const auto shift = Subshift::full_shift(k);
  const auto layout = shift.layout(depth);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> t(layout->size());
  for (auto& x : t) x = u(gen);
  // words sharing the tail x_1.. x_{d-1} differ only in the first symbol
  const std::size_t stride = layout->size() / static_cast<std::size_t>(k);
  std::vector<double> values(t.size());
  for (std::size_t tail = 0; tail < stride; ++tail) {
    double total = 0.0;
    for (int a = 0; a < k; ++a) total += t[static_cast<std::size_t>(a) * stride + tail];
    for (int a = 0; a < k; ++a) {
      const std::size_t i = static_cast<std::size_t>(a) * stride + tail;
      values[i] = static_cast<double>(k) * t[i] / total;
    }
  }
  return CylinderFunction(layout, std::move(values));
}

PathMeasure path_measure(int k, int depth) {
  const auto v = normalized_weight(k, depth, 7);
  const Measure mu0 = fixed_density_measure(v, strongly_invariant_measure(v.shift())).mu0;
  return build_path_measure(v, mu0);
}

void BM_TransferMatrix(benchmark::State& state) {
  const auto v = normalized_weight(3, static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(transfer_matrix(v, v.depth()));
}
BENCHMARK(BM_TransferMatrix)->DenseRange(1, 4);

void BM_IterateToH(benchmark::State& state) {
  const auto v = normalized_weight(3, static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(iterate_to_h(v));
}
BENCHMARK(BM_IterateToH)->DenseRange(1, 4);

void BM_SamplePaths(benchmark::State& state) {
  const auto pm = path_measure(2, 2);
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_paths(pm, 3, 2, 100'000, 42, workers));
  state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_SamplePaths)->Arg(1)->Arg(4)->UseRealTime();

void BM_RelativeErgodicity(benchmark::State& state) {
  const auto v = normalized_weight(2, 2, 3);
  const Measure mu0 = fixed_density_measure(v, strongly_invariant_measure(v.shift())).mu0;
  const int depth = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(relative_ergodicity_dimension(mu0, v, depth));
}
BENCHMARK(BM_RelativeErgodicity)->DenseRange(2, 5);

}  // namespace
BENCHMARK_MAIN();
