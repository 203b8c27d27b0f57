#pragma once

#include <Eigen/Core>

#include <span>
#include <utility>

namespace d2 {

/// Counts of (true class, predicted cluster) pairs.
struct ContingencyTable {
  Eigen::MatrixXd counts;
  double n = 0.0;

  static ContingencyTable from_labels(std::span<const int> truth, std::span<const int> predicted);
  static ContingencyTable from_counts(Eigen::MatrixXd counts);
};

/// Adjusted Rand index. Returns 1 when both partitions are a single block.
double ari(const ContingencyTable& table);

/// Adjusted mutual information with the max-entropy normalizer and the
/// hypergeometric expected MI. Returns 1 when both entropies vanish.
double ami(const ContingencyTable& table);

/// (homogeneity, completeness); each is 1 when its conditioning entropy is 0.
std::pair<double, double> homogeneity_completeness(const ContingencyTable& table);

}  // namespace d2
