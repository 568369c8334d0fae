#include <benchmark/benchmark.h>

#include "lmlab/capacity.hpp"
#include "lmlab/rng.hpp"

static void BM_GreedyPack(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::size_t accepted = 0;
  for (auto _ : state) {
    lmlab::Rng rng(6);
    accepted = lmlab::capacity::greedy_pack(rng, d, 0.3, 200);
  }
  state.counters["accepted"] = static_cast<double>(accepted);
}
BENCHMARK(BM_GreedyPack)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_MeasurePacking(benchmark::State& state) {
  lmlab::Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(lmlab::capacity::measure_packing(rng, 1000, 256, 0.3));
}
BENCHMARK(BM_MeasurePacking)->Unit(benchmark::kMillisecond);
