#include "common.hpp"

#include "d2/transport.hpp"

#include <benchmark/benchmark.h>

static void BM_SolveTransport(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto data = d2bench::planted(2, 3, m, 1);
  const auto cost = d2::cost_matrix(data[0], data[1]);
  for (auto _ : state) benchmark::DoNotOptimize(d2::solve_transport(cost, data[0].weights, data[1].weights).cost);
}
BENCHMARK(BM_SolveTransport)->RangeMultiplier(2)->Range(4, 64);

static void BM_Wasserstein2(benchmark::State& state) {
  const auto data = d2bench::planted(2, 8, 8, 1);
  for (auto _ : state) benchmark::DoNotOptimize(d2::wasserstein2_squared(data[0], data[1]));
}
BENCHMARK(BM_Wasserstein2);
