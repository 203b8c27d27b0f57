#include "d2/admm.hpp"

#include "d2/errors.hpp"
#include "d2/simplex.hpp"

#include <atomic>
#include <cmath>

namespace d2 {

namespace {

void project_columns(Eigen::MatrixXd& pi, const Eigen::VectorXd& member_weights) {
  for (Eigen::Index j = 0; j < pi.cols(); ++j)
    pi.col(j) = project_to_scaled_simplex(pi.col(j), member_weights[j]);
}

Eigen::MatrixXd qp_gradient(const Eigen::MatrixXd& cost, const Eigen::MatrixXd& pi,
                            const Eigen::VectorXd& shift, double rho) {
  const Eigen::VectorXd r = rho * (pi.rowwise().sum() + shift);
  return cost + r.replicate(1, pi.cols());
}

}  // namespace

QpResult admm_qp_subproblem(const Eigen::MatrixXd& cost, const Eigen::VectorXd& member_weights,
                            const Eigen::VectorXd& w, const Eigen::VectorXd& lambda, double rho,
                            const Eigen::MatrixXd& start, const QpOptions& options) {
  if (!(rho > 0.0)) throw InputError("QP penalty rho must be positive");
  if (start.rows() != cost.rows() || start.cols() != cost.cols() ||
      member_weights.size() != cost.cols() || w.size() != cost.rows() ||
      lambda.size() != cost.rows())
    throw InputError("QP subproblem shapes disagree");

  const Eigen::VectorXd shift = lambda - w;
  const double step = 1.0 / (rho * static_cast<double>(cost.cols()));

  QpResult out;
  Eigen::MatrixXd x = start;
  project_columns(x, member_weights);
  Eigen::MatrixXd y = x;
  double t = 1.0;
  for (int it = 1; it <= options.max_iters; ++it) {
    const Eigen::MatrixXd g = qp_gradient(cost, y, shift, rho);
    Eigen::MatrixXd next = y - step * g;
    project_columns(next, member_weights);
    const Eigen::MatrixXd delta = next - x;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // Restart momentum when it points uphill.
    if ((g.array() * delta.array()).sum() > 0.0) {
      y = next;
      t = 1.0;
    } else {
      y = next + ((t - 1.0) / t_next) * delta;
      t = t_next;
    }
    x = std::move(next);
    out.iterations = it;
    if (it % 10 == 0 || it == options.max_iters) {
      Eigen::MatrixXd probe = x - step * qp_gradient(cost, x, shift, rho);
      project_columns(probe, member_weights);
      const double gap = (probe - x).cwiseAbs().maxCoeff();
      if (!std::isfinite(gap)) throw SolverError("QP subproblem diverged");
      if (gap <= options.tolerance) {
        out.converged = true;
        break;
      }
    }
  }
  out.pi = std::move(x);
  return out;
}

Eigen::VectorXd admm_w_update(const std::vector<Eigen::VectorXd>& tilde_w) {
  if (tilde_w.empty()) throw InputError("weight update needs at least one vector");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(tilde_w.front().size());
  for (const auto& t : tilde_w) {
    if (t.size() != mean.size()) throw InputError("weight update inputs differ in length");
    mean += t;
  }
  mean /= static_cast<double>(tilde_w.size());
  return project_to_simplex(mean);
}

AdmmResult admm_centroid(const MemberList& members, const DiscreteDistribution& init,
                         const std::vector<Eigen::MatrixXd>* warm, const AdmmParams& params,
                         const RunControl& control) {
  if (!(params.rho0 > 0.0) || params.t_admm < 1 || params.outer_iters < 1)
    throw InputError("ADMM parameters must be positive");
  detail::require_compatible(init, members);
  if (warm && warm->size() != members.size())
    throw InputError("warm start needs one coupling per member");

  const std::size_t n = members.size();
  const Eigen::Index m = init.size();
  WorkerPool* pool = control.pool;
  const bool relocate = params.relocate_support && !init.symbolic();

  AdmmResult result;
  DiscreteDistribution centroid = init;
  auto& pi = result.couplings;
  pi.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    pi[k] = warm ? (*warm)[k] : product_coupling(centroid.weights, members[k]->weights);

  std::vector<Eigen::VectorXd> tilde(n);
  std::vector<int> unconverged(n, 0);
  Eigen::VectorXd w = centroid.weights;

  for (int outer = 0; outer < params.outer_iters; ++outer) {
    if (relocate && outer > 0) centroid = update_support(centroid, members, pi);
    const std::vector<Eigen::MatrixXd> costs = member_costs(centroid, members, pool);
    double rho = rho_from_costs(costs, params.rho0);
    if (!(rho > 0.0)) rho = params.rho0;
    Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(n));

    for (int sweep = 0; sweep < params.t_admm; ++sweep) {
      for_each_index(pool, n, [&](std::size_t k) {
        const auto col = static_cast<Eigen::Index>(k);
        QpResult qp = admm_qp_subproblem(costs[k], members[k]->weights, w, lambda.col(col), rho,
                                         pi[k]);
        if (!qp.converged) ++unconverged[k];
        pi[k] = std::move(qp.pi);
        tilde[k] = pi[k].rowwise().sum() + lambda.col(col);
      });
      w = admm_w_update(tilde);
      for (std::size_t k = 0; k < n; ++k)
        lambda.col(static_cast<Eigen::Index>(k)) += pi[k].rowwise().sum() - w;

      if (outer == 0 && detail::expired(control)) {
        result.info.budget_skipped = true;
        result.centroid.distribution = init;
        return result;
      }
    }
    centroid.weights = w;
    result.info.iterations = outer + 1;
    if (detail::expired(control)) break;
  }

  for (int u : unconverged) result.unconverged_qps += u;
  result.centroid.distribution = std::move(centroid);
  if (control.compute_objective)
    result.centroid.objective = centroid_objective(result.centroid.distribution, members, pool);
  return result;
}

}  // namespace d2
