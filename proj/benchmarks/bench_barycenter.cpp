#include "common.hpp"

#include "d2/badmm.hpp"
#include "d2/clustering.hpp"
#include "d2/ibp.hpp"

#include <benchmark/benchmark.h>

namespace {

struct Fixture {
  std::vector<d2::DiscreteDistribution> data;
  d2::MemberList members;
  d2::DiscreteDistribution init;

  explicit Fixture(int n) : data(d2bench::planted(n, 3, 6, 1)) {
    members = d2::member_list(data);
    init = d2::init_centroid(members, 6, 1);
  }
};

}  // namespace

static void BM_BadmmCentroid(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  d2::BadmmParams p;
  d2::RunControl control;
  control.compute_objective = false;
  for (auto _ : state) benchmark::DoNotOptimize(d2::badmm_centroid(f.members, f.init, nullptr, p, control));
  state.SetItemsProcessed(state.iterations() * p.inner_iters);
}
BENCHMARK(BM_BadmmCentroid)->RangeMultiplier(4)->Range(16, 1024)->Unit(benchmark::kMillisecond);

static void BM_IbpCentroid(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  d2::IbpParams p;
  p.iters = 100;
  p.variant = d2::IbpVariant::relocate_keep;
  d2::RunControl control;
  control.compute_objective = false;
  for (auto _ : state) benchmark::DoNotOptimize(d2::ibp_centroid(f.members, f.init, p, control));
  state.SetItemsProcessed(state.iterations() * p.iters);
}
BENCHMARK(BM_IbpCentroid)->RangeMultiplier(4)->Range(16, 1024)->Unit(benchmark::kMillisecond);
