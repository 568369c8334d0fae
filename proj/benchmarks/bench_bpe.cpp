#include <benchmark/benchmark.h>

#include <string>

#include "lmlab/bpe.hpp"
#include "lmlab/rng.hpp"

namespace {

std::string synthetic_corpus(std::size_t words) {
  static const char* vocab[] = {"the ", "attention ", "token ", "vector ", "model ",
                                "space ", "layer ", "weights ", "banking ", "river "};
  lmlab::Rng rng(5);
  std::string s;
  for (std::size_t i = 0; i < words; ++i) s += vocab[rng.below(10)];
  return s;
}

}  // namespace

static void BM_BpeTrain(benchmark::State& state) {
  const auto corpus = synthetic_corpus(2000);
  for (auto _ : state) benchmark::DoNotOptimize(lmlab::bpe::train(corpus, 320));
}
BENCHMARK(BM_BpeTrain)->Unit(benchmark::kMillisecond);

static void BM_BpeEncode(benchmark::State& state) {
  const auto corpus = synthetic_corpus(2000);
  const auto vocab = lmlab::bpe::train(corpus, 320);
  const auto text = synthetic_corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lmlab::bpe::encode(vocab, text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_BpeEncode)->Arg(100)->Arg(1000);
