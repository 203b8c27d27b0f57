#pragma once

#include "d2/distribution.hpp"
#include "d2/lp.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace d2test {

inline Eigen::VectorXd random_weights(std::mt19937_64& rng, int m) {
  std::gamma_distribution<double> g(1.0, 1.0);
  Eigen::VectorXd w(m);
  for (int i = 0; i < m; ++i) w[i] = g(rng) + 1e-3;
  return w / w.sum();
}

inline d2::DiscreteDistribution random_dist(std::mt19937_64& rng, int m, int d,
                                            double shift = 0.0, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd x(d, m);
  for (int j = 0; j < m; ++j)
    for (int r = 0; r < d; ++r) x(r, j) = shift + n(rng);
  return d2::DiscreteDistribution::from_points(random_weights(rng, m), x);
}

inline d2::DiscreteDistribution line(std::vector<double> xs, std::vector<double> ws) {
  Eigen::MatrixXd x(1, static_cast<Eigen::Index>(xs.size()));
  Eigen::VectorXd w(static_cast<Eigen::Index>(ws.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = xs[i];
  for (std::size_t i = 0; i < ws.size(); ++i) w[static_cast<Eigen::Index>(i)] = ws[i];
  return d2::DiscreteDistribution::from_points(w, x);
}

/// Transport cost from the generic tableau LP: variables pi_ij (column-major).
inline double lp_transport_cost(const Eigen::MatrixXd& c, const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b) {
  const Eigen::Index ma = c.rows(), mb = c.cols();
  Eigen::MatrixXd eq = Eigen::MatrixXd::Zero(ma + mb, ma * mb);
  Eigen::VectorXd rhs(ma + mb);
  for (Eigen::Index i = 0; i < ma; ++i) {
    for (Eigen::Index j = 0; j < mb; ++j) eq(i, j * ma + i) = 1.0;
    rhs[i] = a[i];
  }
  for (Eigen::Index j = 0; j < mb; ++j) {
    for (Eigen::Index i = 0; i < ma; ++i) eq(ma + j, j * ma + i) = 1.0;
    rhs[ma + j] = b[j];
  }
  const auto res = d2::lp::solve_standard_form(eq, rhs, c.reshaped());
  if (res.status != d2::lp::Status::optimal) return std::nan("");
  return res.objective;
}

/// Exact 2x2 transport cost: the polytope is a segment pi_11 in [lo, hi].
inline double two_by_two_cost(const Eigen::Matrix2d& c, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
  const double lo = std::max(0.0, a[0] - b[1]);
  const double hi = std::min(a[0], b[0]);
  auto cost = [&](double t) {
    return c(0, 0) * t + c(0, 1) * (a[0] - t) + c(1, 0) * (b[0] - t) +
           c(1, 1) * (a[1] - b[0] + t);
  };
  return std::min(cost(lo), cost(hi));
}

/// Lloyd's K-means on distribution means, the reference for one-point
/// centroids: W2^2(delta_c, P) = ||c - mean(P)||^2 + var(P). Mirrors the
/// clustering loop's stopping rule and empty-cluster repair.
inline std::vector<int> kmeans_on_means(const std::vector<d2::DiscreteDistribution>& data,
                                        std::vector<Eigen::VectorXd> centers, int max_outer = 30) {
  const std::size_t n = data.size();
  const std::size_t k = centers.size();
  std::vector<Eigen::VectorXd> mu(n);
  std::vector<double> var(n);
  for (std::size_t i = 0; i < n; ++i) {
    mu[i] = data[i].support * data[i].weights;
    double v = 0.0;
    for (int j = 0; j < data[i].size(); ++j)
      v += data[i].weights[j] * (data[i].support.col(j) - mu[i]).squaredNorm();
    var[i] = v;
  }
  const int threshold = std::max(1, static_cast<int>(n / 1000));
  std::vector<int> labels(n, -1);
  for (int round = 0;; ++round) {
    int changes = 0;
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = (mu[i] - centers[0]).squaredNorm();
      for (std::size_t c = 1; c < k; ++c) {
        const double d = (mu[i] - centers[c]).squaredNorm();
        if (d < bd) {
          bd = d;
          best = static_cast<int>(c);
        }
      }
      changes += labels[i] != best;
      labels[i] = best;
      dist[i] = std::sqrt(bd + var[i]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<int> count(k, 0);
      for (int l : labels) ++count[static_cast<std::size_t>(l)];
      if (count[c] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (count[static_cast<std::size_t>(labels[i])] < 2) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      centers[c] = mu[far];
      labels[far] = static_cast<int>(c);
      dist[far] = std::sqrt(var[far]);
      ++changes;
    }
    if ((round > 0 && changes < threshold) || round >= max_outer) break;
    std::vector<Eigen::VectorXd> sum(k, Eigen::VectorXd::Zero(mu[0].size()));
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[static_cast<std::size_t>(labels[i])] += mu[i];
      ++count[static_cast<std::size_t>(labels[i])];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (count[c] > 0) centers[c] = sum[c] / count[c];
  }
  return labels;
}

inline bool close(double a, double b, double rel, double abs = 1e-12) {
  return std::abs(a - b) <= abs + rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace d2test
