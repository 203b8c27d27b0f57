#include "d2/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace d2 {

Eigen::VectorXd project_to_scaled_simplex(const Eigen::VectorXd& v, double mass) {
  const Eigen::Index n = v.size();
  if (n == 0) return v;
  if (mass <= 0.0) return Eigen::VectorXd::Zero(n);
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[k];
    const double t = (cumulative - mass) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0);
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  return project_to_scaled_simplex(v, 1.0);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& s) {
  const double top = s.maxCoeff();
  Eigen::VectorXd e = (s.array() - top).exp();
  return e / e.sum();
}

bool on_simplex(const Eigen::VectorXd& w, double tol) {
  if (w.size() == 0) return false;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (!std::isfinite(w[i]) || w[i] < -tol) return false;
  return std::abs(w.sum() - 1.0) <= tol;
}

}  // namespace d2
