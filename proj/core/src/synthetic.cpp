#include "d2/dataio.hpp"

#include "d2/errors.hpp"

#include <random>

namespace d2 {

SyntheticData generate_synthetic(const SynthSpec& spec) {
  if (spec.n < 1 || spec.d < 1 || spec.m < 1 || spec.clusters < 1)
    throw InputError("synthetic counts must be positive");
  if (!(spec.separation >= 0.0) || !(spec.dirichlet_alpha > 0.0) || !(spec.t_dof > 0.0))
    throw InputError("synthetic separation must be non-negative, alpha and dof positive");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::student_t_distribution<double> heavy(spec.t_dof);
  std::gamma_distribution<double> gamma(spec.dirichlet_alpha, 1.0);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);

  Eigen::MatrixXd means(spec.d, spec.clusters);
  for (int c = 0; c < spec.clusters; ++c)
    for (int r = 0; r < spec.d; ++r) means(r, c) = spec.separation * normal(rng);

  SyntheticData out;
  out.data.reserve(static_cast<std::size_t>(spec.n));
  out.labels.reserve(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    const int group = i % spec.clusters;
    Eigen::VectorXd center = means.col(group);
    for (int r = 0; r < spec.d; ++r) center[r] += normal(rng);

    Eigen::MatrixXd support(spec.d, spec.m);
    for (int j = 0; j < spec.m; ++j)
      for (int r = 0; r < spec.d; ++r) support(r, j) = center[r] + heavy(rng);

    Eigen::VectorXd w(spec.m);
    for (int j = 0; j < spec.m; ++j) w[j] = gamma(rng);
    if (!(w.sum() > 0.0)) w.setOnes();
    w /= w.sum();
    for (int j = 0; j < spec.m; ++j) w[j] *= 1.0 + jitter(rng);
    w /= w.sum();

    out.data.push_back(DiscreteDistribution::from_points(std::move(w), std::move(support)));
    out.labels.push_back(group);
  }
  return out;
}

}  // namespace d2
