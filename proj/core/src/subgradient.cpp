#include "d2/subgradient.hpp"

#include "d2/errors.hpp"
#include "d2/simplex.hpp"
#include "d2/transport.hpp"

#include <algorithm>
#include <cmath>

namespace d2 {

Eigen::VectorXd projected_subgradient(const Eigen::VectorXd& row_duals) {
  return row_duals.array() - row_duals.sum();
}

Eigen::VectorXd softmax_gradient(const Eigen::VectorXd& w, const Eigen::VectorXd& grad_w) {
  if (w.size() != grad_w.size()) throw InputError("weight and gradient lengths differ");
  return w.array() * (grad_w.array() - w.dot(grad_w));
}

double subgradient_step(const Eigen::VectorXd& grad_s, double alpha, double zeta) {
  const double norm = grad_s.norm();
  if (!(norm > 0.0)) return 0.0;
  return std::min(alpha / norm, zeta);
}

SubgradResult subgrad_centroid(const MemberList& members, const DiscreteDistribution& init,
                               const SubgradParams& params, const RunControl& control) {
  if (!(params.alpha > 0.0) || !(params.zeta >= 0.0) || params.tau < 1 || params.iters < 1)
    throw InputError("subgradient parameters must be positive (zeta may be zero)");
  detail::require_compatible(init, members);

  const std::size_t n = members.size();
  const bool relocate = params.relocate_support && !init.symbolic();
  WorkerPool* pool = control.pool;

  SubgradResult result;
  DiscreteDistribution centroid = init;
  Eigen::VectorXd s = centroid.weights.array().max(1e-300).log();
  s.array() -= s.mean();

  std::vector<TransportPlan> plans(n);
  std::vector<Eigen::MatrixXd> couplings(n);
  for (int it = 0; it < params.iters; ++it) {
    for_each_index(pool, n, [&](std::size_t k) {
      plans[k] = solve_transport(cost_matrix(centroid, *members[k]), centroid.weights,
                                 members[k]->weights);
    });
    Eigen::VectorXd g = Eigen::VectorXd::Zero(centroid.size());
    for (std::size_t k = 0; k < n; ++k) g += projected_subgradient(plans[k].row_duals);
    g /= static_cast<double>(n);

    if (relocate && it % params.tau == 0) {
      for (std::size_t k = 0; k < n; ++k) couplings[k] = std::move(plans[k].pi);
      centroid = update_support(centroid, members, couplings);
    }

    const Eigen::VectorXd grad_s = softmax_gradient(centroid.weights, g);
    s -= subgradient_step(grad_s, params.alpha, params.zeta) * grad_s;
    s.array() -= s.mean();
    centroid.weights = softmax(s);
    result.info.iterations = it + 1;

    if (detail::expired(control)) {
      if (it == 0) {
        result.info.budget_skipped = true;
        result.centroid.distribution = init;
        return result;
      }
      break;
    }
  }

  result.centroid.distribution = std::move(centroid);
  if (control.compute_objective)
    result.centroid.objective = centroid_objective(result.centroid.distribution, members, pool);
  return result;
}

}  // namespace d2
