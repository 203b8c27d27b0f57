#include "d2/metrics.hpp"

#include "d2/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace d2 {

namespace {

std::map<int, Eigen::Index> dense_ids(std::span<const int> labels) {
  std::map<int, Eigen::Index> ids;
  for (int l : labels) ids.emplace(l, 0);
  Eigen::Index next = 0;
  for (auto& [label, id] : ids) id = next++;
  return ids;
}

// Drops empty rows and columns so degenerate checks see only real blocks.
Eigen::MatrixXd compact(const Eigen::MatrixXd& counts) {
  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index i = 0; i < counts.rows(); ++i)
    if (counts.row(i).sum() > 0.0) rows.push_back(i);
  for (Eigen::Index j = 0; j < counts.cols(); ++j)
    if (counts.col(j).sum() > 0.0) cols.push_back(j);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = counts(rows[i], cols[j]);
  return out;
}

double pairs(double x) { return 0.5 * x * (x - 1.0); }

double entropy(const Eigen::VectorXd& marginal, double n) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < marginal.size(); ++i)
    if (marginal[i] > 0.0) h -= marginal[i] / n * std::log(marginal[i] / n);
  return h;
}

double mutual_information(const Eigen::MatrixXd& c, double n) {
  const Eigen::VectorXd a = c.rowwise().sum();
  const Eigen::VectorXd b = c.colwise().sum().transpose();
  double mi = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j)
      if (c(i, j) > 0.0) mi += c(i, j) / n * std::log(n * c(i, j) / (a[i] * b[j]));
  return std::max(mi, 0.0);
}

double expected_mutual_information(const Eigen::MatrixXd& c, double n) {
  const Eigen::VectorXd a = c.rowwise().sum();
  const Eigen::VectorXd b = c.colwise().sum().transpose();
  const double lg_n = std::lgamma(n + 1.0);
  double emi = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      const double ai = a[i], bj = b[j];
      const double lo = std::max(1.0, ai + bj - n), hi = std::min(ai, bj);
      const double base = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) +
                          std::lgamma(n - ai + 1.0) + std::lgamma(n - bj + 1.0) - lg_n;
      for (double nij = lo; nij <= hi; nij += 1.0) {
        const double log_p = base - std::lgamma(nij + 1.0) - std::lgamma(ai - nij + 1.0) -
                             std::lgamma(bj - nij + 1.0) - std::lgamma(n - ai - bj + nij + 1.0);
        emi += nij / n * std::log(n * nij / (ai * bj)) * std::exp(log_p);
      }
    }
  return emi;
}

void require_pairs(const ContingencyTable& t) {
  if (t.n < 2.0) throw InputError("metric needs at least two labelled objects");
}

}  // namespace

ContingencyTable ContingencyTable::from_labels(std::span<const int> truth,
                                               std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw InputError("label vectors differ in length");
  const auto rows = dense_ids(truth);
  const auto cols = dense_ids(predicted);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                                 static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < truth.size(); ++i)
    counts(rows.at(truth[i]), cols.at(predicted[i])) += 1.0;
  return from_counts(std::move(counts));
}

ContingencyTable ContingencyTable::from_counts(Eigen::MatrixXd counts) {
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    const double v = counts.data()[i];
    if (!(v >= 0.0) || v != std::floor(v)) throw InputError("counts must be non-negative integers");
  }
  ContingencyTable t;
  t.n = counts.sum();
  t.counts = std::move(counts);
  return t;
}

double ari(const ContingencyTable& table) {
  require_pairs(table);
  const Eigen::MatrixXd c = compact(table.counts);
  const double n = table.n;
  double index = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) index += pairs(c.data()[i]);
  double sum_a = 0.0, sum_b = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) sum_a += pairs(c.row(i).sum());
  for (Eigen::Index j = 0; j < c.cols(); ++j) sum_b += pairs(c.col(j).sum());
  const double expected = sum_a * sum_b / pairs(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double ami(const ContingencyTable& table) {
  require_pairs(table);
  const Eigen::MatrixXd c = compact(table.counts);
  const double n = table.n;
  if (c.rows() == 1 && c.cols() == 1) return 1.0;
  const double h_true = entropy(c.rowwise().sum(), n);
  const double h_pred = entropy(c.colwise().sum().transpose(), n);
  const double mi = mutual_information(c, n);
  const double emi = expected_mutual_information(c, n);
  double denominator = std::max(h_true, h_pred) - emi;
  // Keep the sign but avoid a zero division, as the reference does.
  const double tiny = std::numeric_limits<double>::epsilon();
  if (std::abs(denominator) < tiny) denominator = denominator < 0.0 ? -tiny : tiny;
  return (mi - emi) / denominator;
}

std::pair<double, double> homogeneity_completeness(const ContingencyTable& table) {
  if (table.n < 1.0) throw InputError("metric needs at least one labelled object");
  const Eigen::MatrixXd c = compact(table.counts);
  const double n = table.n;
  const double h_true = entropy(c.rowwise().sum(), n);
  const double h_pred = entropy(c.colwise().sum().transpose(), n);
  const double mi = mutual_information(c, n);
  const double homogeneity = h_true > 0.0 ? std::clamp(mi / h_true, 0.0, 1.0) : 1.0;
  const double completeness = h_pred > 0.0 ? std::clamp(mi / h_pred, 0.0, 1.0) : 1.0;
  return {homogeneity, completeness};
}

}  // namespace d2
