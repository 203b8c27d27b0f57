#pragma once

#include "d2/dataio.hpp"
#include "d2/distribution.hpp"

#include <cstdint>
#include <vector>

namespace d2bench {

inline std::vector<d2::DiscreteDistribution> planted(int n, int d, int m, int clusters,
                                                     std::uint64_t seed = 1) {
  d2::SynthSpec spec;
  spec.n = n;
  spec.d = d;
  spec.m = m;
  spec.clusters = clusters;
  spec.seed = seed;
  return d2::generate_synthetic(spec).data;
}

}  // namespace d2bench
