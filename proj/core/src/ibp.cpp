#include "d2/ibp.hpp"

#include "d2/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace d2 {

namespace {

bool finite_positive(const Eigen::VectorXd& v) {
  return v.allFinite() && (v.array() > 0.0).all();
}

[[noreturn]] void overflow(const std::string& what, int iteration) {
  throw NumericOverflow(what + " at iteration " + std::to_string(iteration), iteration);
}

std::vector<Eigen::MatrixXd> gibbs_kernels(const std::vector<Eigen::MatrixXd>& costs, double eps,
                                           int iteration) {
  std::vector<Eigen::MatrixXd> kernels(costs.size());
  for (std::size_t k = 0; k < costs.size(); ++k) {
    // Underflow is detected in the log domain: a vectorized exp clamps tiny
    // results instead of returning zero.
    const Eigen::ArrayXXd log_kernel = -costs[k].array() / eps;
    const double floor = std::log(std::numeric_limits<double>::min());
    if (!log_kernel.allFinite() || (log_kernel.colwise().maxCoeff() < floor).any() ||
        (log_kernel.rowwise().maxCoeff() < floor).any())
      overflow("Gibbs kernel underflow", iteration);
    kernels[k] = log_kernel.unaryExpr([](double x) { return std::exp(x); }).matrix();
  }
  return kernels;
}

}  // namespace

IbpResult ibp_centroid(const MemberList& members, const DiscreteDistribution& init,
                       const IbpParams& params, const RunControl& control) {
  if (!(params.epsilon0 > 0.0) || params.iters < 1 || params.tau < 1)
    throw InputError("IBP parameters must be positive");
  detail::require_compatible(init, members);

  const std::size_t n = members.size();
  const Eigen::Index m = init.size();
  const bool relocate = params.variant != IbpVariant::fixed_support && !init.symbolic();
  WorkerPool* pool = control.pool;

  IbpResult result;
  DiscreteDistribution centroid = init;
  std::vector<Eigen::MatrixXd> costs = member_costs(centroid, members, pool);
  double total = 0.0, entries = 0.0;
  for (const auto& c : costs) {
    total += c.sum();
    entries += static_cast<double>(c.size());
  }
  const double mean_cost = entries > 0.0 ? total / entries : 0.0;
  const double eps = params.epsilon0 * (mean_cost > 0.0 ? mean_cost : 1.0);
  result.epsilon = eps;

  std::vector<Eigen::MatrixXd> kernels = gibbs_kernels(costs, eps, 0);
  std::vector<Eigen::VectorXd> u(n, Eigen::VectorXd::Ones(m));
  std::vector<Eigen::VectorXd> v(n);
  std::vector<Eigen::VectorXd> q(n);
  Eigen::VectorXd p = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));

  for (int it = 0; it < params.iters; ++it) {
    if (relocate && it > 0 && it % params.tau == 0) {
      std::vector<Eigen::MatrixXd> plans(n);
      for (std::size_t k = 0; k < n; ++k)
        plans[k] = u[k].asDiagonal() * kernels[k] * v[k].asDiagonal();
      DiscreteDistribution scaled = centroid;
      scaled.weights = p;
      centroid.support = update_support(scaled, members, plans).support;
      costs = member_costs(centroid, members, pool);
      kernels = gibbs_kernels(costs, eps, it);
      if (params.variant == IbpVariant::relocate_restart)
        for (auto& uk : u) uk.setOnes();
    }

    for (std::size_t k = 0; k < n; ++k) {
      const Eigen::VectorXd ktu = kernels[k].transpose() * u[k];
      if (!finite_positive(ktu)) overflow("scaling vector degenerated", it);
      v[k] = members[k]->weights.cwiseQuotient(ktu);
      q[k] = u[k].cwiseProduct(kernels[k] * v[k]);
      if (!finite_positive(q[k])) overflow("marginal degenerated", it);
    }
    Eigen::ArrayXd logp = Eigen::ArrayXd::Zero(m);
    for (const auto& qk : q) logp += qk.array().log();
    p = (logp / static_cast<double>(n)).exp().matrix();
    if (!finite_positive(p)) overflow("barycenter weights degenerated", it);
    for (std::size_t k = 0; k < n; ++k) {
      u[k] = u[k].cwiseProduct(p).cwiseQuotient(q[k]);
      if (!u[k].allFinite()) overflow("scaling vector overflow", it);
    }
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

  centroid.weights = p / p.sum();
  result.centroid.distribution = std::move(centroid);
  if (control.compute_objective)
    result.centroid.objective = centroid_objective(result.centroid.distribution, members, pool);
  return result;
}

}  // namespace d2
