#pragma once

#include "d2/barycenter.hpp"

#include <Eigen/Core>

#include <vector>

namespace d2 {

struct AdmmParams {
  double rho0 = 2.0;
  /// ADMM sweeps between two support relocations.
  int t_admm = 10;
  int outer_iters = 5;
  bool relocate_support = true;
};

struct QpOptions {
  int max_iters = 20000;
  double tolerance = 1e-11;
};

struct QpResult {
  Eigen::MatrixXd pi;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes
///   <C, pi> + rho/2 sum_i (sum_j pi_ij - w_i + lambda_i)^2
/// over couplings whose columns sum to the member weights, by accelerated
/// projected gradient warm-started at `start`.
QpResult admm_qp_subproblem(const Eigen::MatrixXd& cost, const Eigen::VectorXd& member_weights,
                            const Eigen::VectorXd& w, const Eigen::VectorXd& lambda, double rho,
                            const Eigen::MatrixXd& start, const QpOptions& options = {});

/// argmin_{w in simplex} sum_k ||tilde_w^(k) - w||^2, i.e. the simplex
/// projection of the mean.
Eigen::VectorXd admm_w_update(const std::vector<Eigen::VectorXd>& tilde_w);

struct AdmmResult {
  Centroid centroid;
  std::vector<Eigen::MatrixXd> couplings;
  SolveInfo info;
  /// Subproblems that hit the iteration cap before the tolerance.
  int unconverged_qps = 0;
};

/// Standard ADMM barycenter: each outer step relocates the support, resets
/// the duals and runs t_admm sweeps of {per-member QP, weight projection,
/// dual ascent}.
AdmmResult admm_centroid(const MemberList& members, const DiscreteDistribution& init,
                         const std::vector<Eigen::MatrixXd>* warm, const AdmmParams& params,
                         const RunControl& control = {});

}  // namespace d2
