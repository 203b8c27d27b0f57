#include "d2/badmm.hpp"

#include "d2/errors.hpp"
#include "d2/simplex.hpp"

#include <cmath>
#include <sstream>

namespace d2 {

void pi1_update(const Eigen::MatrixXd& cost, const Eigen::VectorXd& member_weights, double rho,
                double eps, MemberSplit& split) {
  Eigen::ArrayXXd t =
      split.pi2.array() * (-(cost.array() + split.lambda.array()) / rho).exp() + eps;
  if (!t.allFinite())
    throw SolverError("non-finite exponent in the pi1 update; rho is too small for the costs");
  const Eigen::ArrayXd col = t.colwise().sum().transpose();
  split.pi1 = (t.rowwise() * (member_weights.array() / col).transpose()).matrix();
}

Eigen::MatrixXd tilde_pi1(const MemberSplit& split, double rho, double eps) {
  Eigen::MatrixXd t = (split.pi1.array() * (split.lambda.array() / rho).exp() + eps).matrix();
  if (!t.allFinite())
    throw SolverError("non-finite exponent in the pi2 update; rho is too small for the duals");
  return t;
}

Eigen::VectorXd normalized_row_mass(const Eigen::MatrixXd& tilde) {
  Eigen::VectorXd rows = tilde.rowwise().sum();
  return rows / rows.sum();
}

void pi2_from_tilde(const Eigen::MatrixXd& tilde, const Eigen::VectorXd& w, MemberSplit& split) {
  const Eigen::ArrayXd rows = tilde.rowwise().sum().array();
  split.pi2 = (tilde.array().colwise() * (w.array() / rows)).matrix();
}

void badmm_pi1_update(BadmmState& state, const std::vector<Eigen::MatrixXd>& costs,
                      const MemberList& members, double eps) {
  if (costs.size() != state.members.size() || members.size() != state.members.size())
    throw InputError("state, costs and members disagree in size");
  for (std::size_t k = 0; k < members.size(); ++k)
    pi1_update(costs[k], members[k]->weights, state.rho, eps, state.members[k]);
}

void badmm_pi2_update(BadmmState& state, const Eigen::VectorXd& w, double eps) {
  for (auto& split : state.members) pi2_from_tilde(tilde_pi1(split, state.rho, eps), w, split);
}

Eigen::VectorXd consensus_weights(const std::vector<Eigen::VectorXd>& tilde_w,
                                  ConsensusRule rule) {
  if (tilde_w.empty()) throw InputError("consensus needs at least one vector");
  const Eigen::Index m = tilde_w.front().size();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
  for (std::size_t k = 0; k < tilde_w.size(); ++k) {
    const auto& t = tilde_w[k];
    if (t.size() != m || !on_simplex(t, 1e-6)) {
      std::ostringstream msg;
      msg << "consensus input " << k << " is not on the simplex";
      throw InputError(msg.str());
    }
    if (rule == ConsensusRule::r1)
      acc += t;
    else
      acc += t.cwiseMax(0.0).cwiseSqrt();
  }
  acc /= static_cast<double>(tilde_w.size());
  if (rule == ConsensusRule::r2) acc = acc.cwiseAbs2();
  return acc / acc.sum();
}

void dual_update(MemberSplit& split, double rho) { split.lambda += rho * (split.pi1 - split.pi2); }

void dual_update(BadmmState& state) {
  for (auto& split : state.members) dual_update(split, state.rho);
}

namespace {

void check_params(const BadmmParams& p) {
  if (!(p.rho0 > 0.0) || p.tau < 1 || p.inner_iters < 1 || !(p.float_floor > 0.0))
    throw InputError("B-ADMM parameters must be positive");
}

}  // namespace

BadmmResult badmm_centroid(const MemberList& members, const DiscreteDistribution& init,
                           const std::vector<Eigen::MatrixXd>* warm, const BadmmParams& params,
                           const RunControl& control) {
  check_params(params);
  detail::require_compatible(init, members);
  if ((init.weights.array() <= 0.0).any())
    throw InputError("initial centroid weights must be strictly positive");
  if (warm && warm->size() != members.size())
    throw InputError("warm start needs one coupling per member");

  const std::size_t n = members.size();
  const double eps = params.float_floor;
  const bool relocate = params.relocate_support && !init.symbolic();
  WorkerPool* pool = control.pool;

  BadmmResult result;
  DiscreteDistribution centroid = init;
  std::vector<Eigen::MatrixXd> costs = member_costs(centroid, members, pool);
  double rho = rho_from_costs(costs, params.rho0);
  if (!(rho > 0.0)) {
    if (!relocate) throw SolverError("rho is zero: every transport cost vanishes");
    rho = params.rho0;
  }

  auto& state = result.state;
  state.rho = rho;
  state.members.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& s = state.members[k];
    const Eigen::Index mk = members[k]->size();
    if (warm) {
      const auto& pw = (*warm)[k];
      if (pw.rows() != centroid.size() || pw.cols() != mk || (pw.array() < 0.0).any())
        throw InputError("warm-start coupling has the wrong shape or negative entries");
      s.pi2 = pw;
    } else {
      s.pi2 = product_coupling(centroid.weights, members[k]->weights);
    }
    s.pi1 = Eigen::MatrixXd::Zero(centroid.size(), mk);
    s.lambda = Eigen::MatrixXd::Zero(centroid.size(), mk);
  }

  auto& trace = result.trace;
  if (params.track_exact_objective)
    trace.exact_objective.emplace_back(0, centroid_objective(centroid, members, pool));

  std::vector<Eigen::MatrixXd> tilde(n);
  std::vector<Eigen::VectorXd> row_mass(n);
  std::vector<double> primal(n), dual(n);

  for (int it = 0; it < params.inner_iters; ++it) {
    if (relocate && it > 0 && it % params.tau == 0) {
      if (params.track_exact_objective)
        trace.exact_objective.emplace_back(it, centroid_objective(centroid, members, pool));
      std::vector<Eigen::MatrixXd> plans(n);
      for (std::size_t k = 0; k < n; ++k) plans[k] = state.members[k].pi2;
      centroid = update_support(centroid, members, plans);
      costs = member_costs(centroid, members, pool);
      const double r = rho_from_costs(costs, params.rho0);
      if (r > 0.0) state.rho = r;
      if (params.track_exact_objective)
        trace.exact_objective.emplace_back(it, centroid_objective(centroid, members, pool));
    }
    const double rho_now = state.rho;

    for_each_index(pool, n, [&](std::size_t k) {
      auto& s = state.members[k];
      pi1_update(costs[k], members[k]->weights, rho_now, eps, s);
      tilde[k] = tilde_pi1(s, rho_now, eps);
      row_mass[k] = normalized_row_mass(tilde[k]);
    });

    const Eigen::VectorXd w = consensus_weights(row_mass, params.rule);

    for_each_index(pool, n, [&](std::size_t k) {
      auto& s = state.members[k];
      const Eigen::MatrixXd previous = s.pi2;
      pi2_from_tilde(tilde[k], w, s);
      dual[k] = (s.pi2 - previous).cwiseAbs().sum();
      dual_update(s, rho_now);
      primal[k] = (s.pi1 - s.pi2).cwiseAbs().sum();
    });

    centroid.weights = w;
    double pr = 0.0, du = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      pr += primal[k];
      du += dual[k];
    }
    pr /= static_cast<double>(n);
    du /= static_cast<double>(n);
    if (!std::isfinite(pr) || !std::isfinite(du))
      throw SolverError("B-ADMM produced a non-finite coupling");
    trace.primal.push_back(pr);
    trace.dual.push_back(du);
    result.info.iterations = it + 1;

    if (detail::expired(control)) {
      if (it == 0) {
        result.info.budget_skipped = true;
        result.centroid.distribution = init;
        return result;
      }
      break;
    }
    if (std::max(pr, du) < params.tolerance) break;
  }

  if (relocate && result.info.iterations > 0) {
    if (params.track_exact_objective)
      trace.exact_objective.emplace_back(result.info.iterations,
                                         centroid_objective(centroid, members, pool));
    std::vector<Eigen::MatrixXd> plans(n);
    for (std::size_t k = 0; k < n; ++k) plans[k] = state.members[k].pi2;
    centroid = update_support(centroid, members, plans);
  }
  if (params.track_exact_objective)
    trace.exact_objective.emplace_back(result.info.iterations,
                                       centroid_objective(centroid, members, pool));
  result.centroid.distribution = std::move(centroid);
  if (control.compute_objective)
    result.centroid.objective = centroid_objective(result.centroid.distribution, members, pool);
  return result;
}

}  // namespace d2
