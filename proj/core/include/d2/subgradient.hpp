#pragma once

#include "d2/barycenter.hpp"

#include <Eigen/Core>

#include <vector>

namespace d2 {

struct SubgradParams {
  /// Maximum step length in the log-weight coordinates.
  double alpha = 0.5;
  /// Cap on the step multiplier.
  double zeta = 10.0;
  /// Support relocation period.
  int tau = 1;
  int iters = 10;
  bool relocate_support = true;
};

/// Projected subgradient of W2^2(w) for one member from its LP row duals:
/// lambda - (sum_i lambda_i) 1.
Eigen::VectorXd projected_subgradient(const Eigen::VectorXd& row_duals);

/// Chain rule through the softmax: (grad_s)_i = w_i (g_i - <w, g>).
Eigen::VectorXd softmax_gradient(const Eigen::VectorXd& w, const Eigen::VectorXd& grad_w);

/// min(alpha / ||grad_s||, zeta); zero when the gradient vanishes.
double subgradient_step(const Eigen::VectorXd& grad_s, double alpha, double zeta);

struct SubgradResult {
  Centroid centroid;
  SolveInfo info;
};

/// Subgradient descent on softmax-reparametrized weights with exact LP
/// subgradients; the support moves every tau iterations.
SubgradResult subgrad_centroid(const MemberList& members, const DiscreteDistribution& init,
                               const SubgradParams& params, const RunControl& control = {});

}  // namespace d2
