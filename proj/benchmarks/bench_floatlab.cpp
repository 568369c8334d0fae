#include <benchmark/benchmark.h>

#include <vector>

#include "lmlab/floatlab.hpp"
#include "lmlab/rng.hpp"

namespace {

std::vector<double> data(std::size_t n) {
  lmlab::Rng rng(8);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

static void BM_Reduce(benchmark::State& state) {
  using lmlab::floatlab::ReductionPlan;
  const auto v = data(1 << 16);
  const ReductionPlan plans[] = {ReductionPlan::sequential(), ReductionPlan::pairwise_tree(),
                                 ReductionPlan::chunked(256), ReductionPlan::shuffled(1)};
  const auto& plan = plans[state.range(0)];
  for (auto _ : state) benchmark::DoNotOptimize(lmlab::floatlab::reduce(v, plan));
  state.SetLabel(plan.name());
}
BENCHMARK(BM_Reduce)->DenseRange(0, 3);
