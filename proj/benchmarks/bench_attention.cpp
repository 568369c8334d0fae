#include <benchmark/benchmark.h>

#include "lmlab/attention.hpp"
#include "lmlab/rng.hpp"

// One causal block over n tokens, d = 64, 4 heads.
static void BM_TransformerBlock(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  lmlab::Rng rng(3);
  const auto block = lmlab::attention::random_block(rng, 64, 4);
  const auto X = lmlab::random_gaussian(rng, n, 64);
  for (auto _ : state) benchmark::DoNotOptimize(lmlab::attention::transformer_block(X, block, true));
}
BENCHMARK(BM_TransformerBlock)->Arg(8)->Arg(32)->Arg(128);

static void BM_AttentionWeights(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  lmlab::Rng rng(4);
  const auto Q = lmlab::random_gaussian(rng, n, 32);
  const auto K = lmlab::random_gaussian(rng, n, 32);
  for (auto _ : state) benchmark::DoNotOptimize(lmlab::attention::attention_weights(Q, K, true));
}
BENCHMARK(BM_AttentionWeights)->Arg(32)->Arg(256);
