#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "cdiff/kernels.hpp"
#include "cdiff/random.hpp"
#include "cdiff/rate.hpp"
#include "cdiff/tabular.hpp"

using namespace cdiff;

namespace {

std::vector<State> random_states(const StateSpace& space, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<State> xs(n, State(space.dims()));
  for (auto& x : xs)
    for (auto& v : x) v = rng.uniform_int(0, space.vocab() - 1);
  return xs;
}

struct GramFixture {
  StateSpace space{32, 2};
  kernels::PackedStates a;
  kernels::PackedStates b;
  std::vector<double> table;
  explicit GramFixture(std::size_t n)
      : a(space, random_states(space, n, 1)), b(space, random_states(space, n, 2)), table(33) {
    for (int h = 0; h <= 32; ++h) table[h] = std::exp(-h / 3.2);
  }
};

void BM_GramSerial(benchmark::State& st) {
  GramFixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::gram_sum(f.a, f.b, f.table, false));
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

void BM_GramOmp(benchmark::State& st) {
  GramFixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::gram_sum(f.a, f.b, f.table, false));
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

void BM_PropagateSerial(benchmark::State& st) {
  StateSpace space(static_cast<int>(st.range(0)), 3);
  Rng rng(3);
  auto p = TabularDistribution::random(space, rng);
  auto k = RateSpec::uniform(3).transition(0.3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::propagate(space, p.probs(), k));
}

void BM_PropagateOmp(benchmark::State& st) {
  StateSpace space(static_cast<int>(st.range(0)), 3);
  Rng rng(3);
  auto p = TabularDistribution::random(space, rng);
  auto k = RateSpec::uniform(3).transition(0.3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::propagate(space, p.probs(), k));
}

}  // namespace

BENCHMARK(BM_GramSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramOmp)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagateSerial)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagateOmp)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
