#include "common.hpp"

#include "d2/clustering.hpp"

#include <benchmark/benchmark.h>

static void BM_AssignLabels(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const bool prune = state.range(1) != 0;
  const auto data = d2bench::planted(500, 4, 6, k);
  const auto centroids = d2::seed_centroids(data, k, 6, d2::SeedStrategy::plus_plus, 1);
  long long evals = 0;
  for (auto _ : state) {
    d2::AssignmentCache cache;
    evals += d2::assign_labels(data, centroids, cache, prune).distance_evals;
  }
  state.counters["evals"] = benchmark::Counter(static_cast<double>(evals), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_AssignLabels)->ArgsProduct({{4, 16}, {0, 1}})->Unit(benchmark::kMillisecond);
