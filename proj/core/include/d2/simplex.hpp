#pragma once

#include <Eigen/Core>

namespace d2 {

/// Euclidean projection onto the probability simplex (sort-based).
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// Euclidean projection onto {x >= 0, sum x = mass}.
Eigen::VectorXd project_to_scaled_simplex(const Eigen::VectorXd& v, double mass);

/// exp(s_i) / sum_j exp(s_j), evaluated with the max shifted out.
Eigen::VectorXd softmax(const Eigen::VectorXd& s);

/// True when every entry is >= -tol and the entries sum to 1 within tol.
bool on_simplex(const Eigen::VectorXd& w, double tol);

}  // namespace d2
