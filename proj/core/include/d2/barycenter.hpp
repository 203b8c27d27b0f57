#pragma once

#include "d2/distribution.hpp"
#include "d2/parallel.hpp"

#include <Eigen/Core>

#include <chrono>
#include <optional>
#include <vector>

namespace d2 {

/// A barycenter estimate together with its exact objective
/// (1/N) sum_k W2^2(P, P_k) over the members it was fitted to.
struct Centroid {
  DiscreteDistribution distribution;
  double objective = 0.0;
};

using Clock = std::chrono::steady_clock;

/// Execution knobs shared by every centroid solver.
struct RunControl {
  WorkerPool* pool = nullptr;
  /// Iterations stop once this passes. If the very first iteration cannot
  /// finish in time the solver reports `budget_skipped` and returns the
  /// initial centroid untouched.
  std::optional<Clock::time_point> deadline;
  /// Skip the N exact transport solves at the end (callers that recompute
  /// distances themselves, such as the clustering loop).
  bool compute_objective = true;
};

/// Bookkeeping every solver returns next to its centroid.
struct SolveInfo {
  int iterations = 0;
  bool budget_skipped = false;
};

/// Cost matrices C(x, x^(k)) for every member, computed on `pool`.
std::vector<Eigen::MatrixXd> member_costs(const DiscreteDistribution& centroid,
                                          const MemberList& members, WorkerPool* pool = nullptr);

/// rho = rho0 * (sum_k sum_ij C_k(i,j)) / (n m), n = sum_k m_k: rho0 times the
/// average transport cost between the centroid and the members.
double rho_from_costs(const std::vector<Eigen::MatrixXd>& costs, double rho0);
double rho_from_costs(const MemberList& members, const DiscreteDistribution& centroid,
                      double rho0);

/// Closed-form support relocation
///   x_i = 1/(N w_i) sum_k sum_j pi^(k)_ij x^(k)_j.
/// Points whose weight is below 1e-12 keep their location. Symbolic
/// centroids are returned unchanged.
DiscreteDistribution update_support(const DiscreteDistribution& centroid,
                                    const MemberList& members,
                                    const std::vector<Eigen::MatrixXd>& plans);

/// pi_ij = w_i w^(k)_j.
Eigen::MatrixXd product_coupling(const Eigen::VectorXd& w, const Eigen::VectorXd& member_w);

/// Exact (1/N) sum_k W2^2(centroid, member_k) via the transport LP.
double centroid_objective(const DiscreteDistribution& centroid, const MemberList& members,
                          WorkerPool* pool = nullptr);

/// Exact optimal couplings between the centroid and each member.
std::vector<Eigen::MatrixXd> optimal_couplings(const DiscreteDistribution& centroid,
                                               const MemberList& members,
                                               WorkerPool* pool = nullptr);

namespace detail {
inline bool expired(const RunControl& control) {
  return control.deadline && Clock::now() >= *control.deadline;
}
void require_members(const MemberList& members);
void require_compatible(const DiscreteDistribution& centroid, const MemberList& members);
}  // namespace detail

}  // namespace d2
