#include <benchmark/benchmark.h>

#include "lmlab/numkit.hpp"
#include "lmlab/rng.hpp"

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  lmlab::Rng rng(1);
  const auto a = lmlab::random_gaussian(rng, n, n);
  const auto b = lmlab::random_gaussian(rng, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(lmlab::matmul(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(8, 128)->Complexity(benchmark::oNCubed);

static void BM_RandomUnitVectors(benchmark::State& state) {
  lmlab::Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(lmlab::random_unit_vectors(rng, 256, 64));
}
BENCHMARK(BM_RandomUnitVectors);
