#pragma once

#include <Eigen/Core>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace d2 {

/// Square symbol-to-symbol ground cost used by symbolic-support distributions.
struct CostTable {
  std::string id;
  Eigen::MatrixXd costs;

  int size() const { return static_cast<int>(costs.rows()); }
};

/// A finite weighted point set. In vector mode `support` is d x m with one
/// support point per column; in symbolic mode `symbols` indexes into `table`
/// and `support` is empty.
struct DiscreteDistribution {
  Eigen::VectorXd weights;
  Eigen::MatrixXd support;
  std::vector<int> symbols;
  std::shared_ptr<const CostTable> table;

  static DiscreteDistribution from_points(Eigen::VectorXd weights, Eigen::MatrixXd support);
  static DiscreteDistribution from_symbols(Eigen::VectorXd weights, std::vector<int> symbols,
                                           std::shared_ptr<const CostTable> table);

  int size() const { return static_cast<int>(weights.size()); }
  int dim() const { return symbolic() ? 0 : static_cast<int>(support.rows()); }
  bool symbolic() const { return table != nullptr; }
};

/// Throws InputError unless weights are non-negative, sum to one within
/// `tolerance`, and the support is shape-consistent.
void validate(const DiscreteDistribution& dist, double tolerance = 1e-9);

/// Weighted mean of the support points (vector mode only).
Eigen::VectorXd mean_point(const DiscreteDistribution& dist);

/// Non-owning view of the members handed to a barycenter solver.
using MemberList = std::vector<const DiscreteDistribution*>;

MemberList member_list(std::span<const DiscreteDistribution> data);

/// Average support size of the members, rounded to the nearest integer (>= 1).
int average_support_size(const MemberList& members);

}  // namespace d2
