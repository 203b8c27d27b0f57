#pragma once

#include "d2/barycenter.hpp"

#include <Eigen/Core>

#include <optional>
#include <utility>
#include <vector>

namespace d2 {

/// How the per-member row masses are merged into the centroid weights.
enum class ConsensusRule {
  r1,  ///< arithmetic mean of the normalized row masses
  r2,  ///< square of the mean of their square roots
};

struct BadmmParams {
  double rho0 = 2.0;
  /// Support relocation period, in iterations.
  int tau = 10;
  int inner_iters = 100;
  ConsensusRule rule = ConsensusRule::r1;
  /// Floor added to every multiplicative update.
  double float_floor = 1e-16;
  bool relocate_support = true;
  /// Early exit once max(primal, dual) residual drops below this.
  double tolerance = 1e-8;
  /// Record the exact objective at the start, right before and right after
  /// every relocation (including the final one), and at the end.
  bool track_exact_objective = false;
};

/// Split couplings and duals for one member: pi1 has the member's column
/// marginals, pi2 has the centroid's row marginals.
struct MemberSplit {
  Eigen::MatrixXd pi1;
  Eigen::MatrixXd pi2;
  Eigen::MatrixXd lambda;
};

struct BadmmState {
  std::vector<MemberSplit> members;
  double rho = 0.0;
};

/// Relative L1 residuals per iteration: primal = sum ||pi1 - pi2|| / N,
/// dual = sum ||pi2^n - pi2^{n-1}|| / N.
struct ResidualTrace {
  std::vector<double> primal;
  std::vector<double> dual;
  /// (iteration, exact objective) pairs; filled when tracking is on. A
  /// relocation at iteration t contributes two consecutive entries tagged t.
  std::vector<std::pair<int, double>> exact_objective;
};

struct BadmmResult {
  Centroid centroid;
  BadmmState state;
  ResidualTrace trace;
  SolveInfo info;
};

/// pi1 = colnormalize(pi2 .* exp(-(C + lambda)/rho) + eps) scaled to the
/// member weights. Throws SolverError on a non-finite exponent.
void pi1_update(const Eigen::MatrixXd& cost, const Eigen::VectorXd& member_weights, double rho,
                double eps, MemberSplit& split);

/// pi1 .* exp(lambda/rho) + eps.
Eigen::MatrixXd tilde_pi1(const MemberSplit& split, double rho, double eps);

/// Row sums of `tilde`, normalized to one.
Eigen::VectorXd normalized_row_mass(const Eigen::MatrixXd& tilde);

/// pi2 = rownormalize(tilde) scaled to the centroid weights w.
void pi2_from_tilde(const Eigen::MatrixXd& tilde, const Eigen::VectorXd& w, MemberSplit& split);

/// Whole-state forms of the two coupling updates.
void badmm_pi1_update(BadmmState& state, const std::vector<Eigen::MatrixXd>& costs,
                      const MemberList& members, double eps);
void badmm_pi2_update(BadmmState& state, const Eigen::VectorXd& w, double eps);

/// Merges normalized row-mass vectors into centroid weights. Throws
/// InputError if any input is off the simplex by more than 1e-6.
Eigen::VectorXd consensus_weights(const std::vector<Eigen::VectorXd>& tilde_w,
                                  ConsensusRule rule);

/// lambda += rho (pi1 - pi2) for every member.
void dual_update(BadmmState& state);
void dual_update(MemberSplit& split, double rho);

/// Modified Bregman ADMM barycenter. `warm` optionally supplies an initial
/// pi2 per member (the product coupling is used otherwise); duals always
/// start at zero. The support moves every tau iterations and once more at
/// the end.
BadmmResult badmm_centroid(const MemberList& members, const DiscreteDistribution& init,
                           const std::vector<Eigen::MatrixXd>* warm, const BadmmParams& params,
                           const RunControl& control = {});

}  // namespace d2
