#pragma once

#include "d2/distribution.hpp"

#include <Eigen/Core>

namespace d2 {

/// Ground cost between the support points of two distributions:
/// entries(i, j) = ||x_i^a - x_j^b||_p^p. For symbolic supports the shared
/// cost table is read directly and `p` is ignored.
Eigen::MatrixXd cost_matrix(const DiscreteDistribution& a, const DiscreteDistribution& b,
                            int p = 2);

/// An optimal coupling between two weight vectors.
struct TransportPlan {
  Eigen::MatrixXd pi;
  double cost = 0.0;
  Eigen::VectorXd row_duals;
  Eigen::VectorXd col_duals;
};

/// Solves the transportation LP
///   min <C, pi>  s.t.  pi 1 = w_a,  pi^T 1 = w_b,  pi >= 0
/// exactly with a transportation simplex (MODI pivoting, Bland fallback on
/// degenerate stalls). Row/column duals satisfy u_i + v_j <= C_ij with
/// equality on the basis; rows or columns of zero weight get the tightest
/// dual-feasible value.
TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& w_a,
                              const Eigen::VectorXd& w_b);

/// Squared W2 distance (the LP optimum with squared Euclidean ground cost).
double wasserstein2_squared(const DiscreteDistribution& a, const DiscreteDistribution& b);

/// W2 distance.
double wasserstein2(const DiscreteDistribution& a, const DiscreteDistribution& b);

}  // namespace d2
