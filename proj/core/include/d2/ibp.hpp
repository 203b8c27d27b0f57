#pragma once

#include "d2/barycenter.hpp"

#include <Eigen/Core>

namespace d2 {

enum class IbpVariant {
  fixed_support,
  relocate_keep,     ///< V1: relocate every tau iterations, keep the scalings
  relocate_restart,  ///< V2: relocate every tau iterations and restart
};

struct IbpParams {
  /// Regularization relative to the average initial transport cost:
  /// eps = epsilon0 * mean(C).
  double epsilon0 = 0.1;
  int iters = 1000;
  int tau = 100;
  IbpVariant variant = IbpVariant::fixed_support;
};

struct IbpResult {
  Centroid centroid;
  double epsilon = 0.0;
  SolveInfo info;
};

/// Entropic barycenter by iterative Bregman projections with Gibbs kernels
/// exp(-C_k / eps). Throws NumericOverflow (with the iteration index) when a
/// kernel column underflows or a scaling vector stops being finite.
IbpResult ibp_centroid(const MemberList& members, const DiscreteDistribution& init,
                       const IbpParams& params, const RunControl& control = {});

}  // namespace d2
