#pragma once

#include <Eigen/Core>

namespace d2::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
  Status status = Status::optimal;
  Eigen::VectorXd x;
  double objective = 0.0;
  int pivots = 0;
};

/// Dense two-phase tableau simplex for  min c^T x  s.t.  A x = b, x >= 0.
/// Dantzig pricing with a switch to Bland's rule after a run of degenerate
/// pivots. Redundant equality rows are tolerated.
Result solve_standard_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c, int max_pivots = 200000);

}  // namespace d2::lp
