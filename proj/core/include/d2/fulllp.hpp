#pragma once

#include "d2/barycenter.hpp"

#include <Eigen/Core>

#include <vector>

namespace d2 {

struct FullLpParams {
  int outer_iters = 20;
  bool relocate_support = true;
  /// Stop alternating once the objective improves by less than this (relative).
  double tolerance = 1e-12;
};

/// Desk-scale limits for the joint LP.
inline constexpr int kFullLpMaxMembers = 32;
inline constexpr int kFullLpMaxSupport = 8;

struct FullLpWeights {
  Eigen::VectorXd w;
  std::vector<Eigen::MatrixXd> couplings;
  double cost = 0.0;
};

/// Solves the joint LP over (w, pi^(1..N)) for a fixed support:
///   min sum_k <C_k, pi^(k)>  s.t. pi^(k) 1 = w, pi^(k)^T 1 = w^(k).
FullLpWeights solve_joint_lp(const std::vector<Eigen::MatrixXd>& costs,
                             const MemberList& members);

struct FullLpResult {
  Centroid centroid;
  SolveInfo info;
};

/// Alternates the support relocation with the joint LP, moving the support
/// first using exact couplings of the init. Exact at fixed
/// support; used as the accuracy reference for the scalable solvers.
FullLpResult fulllp_centroid(const MemberList& members, const DiscreteDistribution& init,
                             const FullLpParams& params = {}, const RunControl& control = {});

}  // namespace d2
