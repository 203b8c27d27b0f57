#include "d2/fulllp.hpp"

#include "d2/errors.hpp"
#include "d2/lp.hpp"

#include <cmath>
#include <limits>

namespace d2 {

namespace {

void check_scale(std::size_t n, Eigen::Index m, const MemberList& members) {
  if (n > static_cast<std::size_t>(kFullLpMaxMembers) || m > kFullLpMaxSupport)
    throw InputError("joint LP limited to " + std::to_string(kFullLpMaxMembers) +
                     " members with support size at most " + std::to_string(kFullLpMaxSupport));
  for (const auto* p : members)
    if (p->size() > kFullLpMaxSupport)
      throw InputError("joint LP member support exceeds " + std::to_string(kFullLpMaxSupport));
}

}  // namespace

FullLpWeights solve_joint_lp(const std::vector<Eigen::MatrixXd>& costs, const MemberList& members) {
  detail::require_members(members);
  if (costs.size() != members.size()) throw InputError("one cost matrix per member required");
  const std::size_t n = members.size();
  const Eigen::Index m = costs.front().rows();
  check_scale(n, m, members);

  std::vector<Eigen::Index> offset(n + 1, 0);
  Eigen::Index col_rows = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (costs[k].rows() != m || costs[k].cols() != members[k]->size())
      throw InputError("cost matrix shape does not match member");
    offset[k + 1] = offset[k] + costs[k].size();
    col_rows += costs[k].cols();
  }
  const Eigen::Index w0 = offset[n];
  const Eigen::Index vars = w0 + m;
  const Eigen::Index rows = static_cast<Eigen::Index>(n) * m + col_rows;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, vars);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(vars);
  Eigen::Index r = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Index mk = costs[k].cols();
    for (Eigen::Index i = 0; i < m; ++i, ++r) {
      for (Eigen::Index j = 0; j < mk; ++j) a(r, offset[k] + j * m + i) = 1.0;
      a(r, w0 + i) = -1.0;
    }
    for (Eigen::Index j = 0; j < mk; ++j, ++r) {
      for (Eigen::Index i = 0; i < m; ++i) a(r, offset[k] + j * m + i) = 1.0;
      b[r] = members[k]->weights[j];
    }
    c.segment(offset[k], costs[k].size()) = costs[k].reshaped();
  }

  const lp::Result res = lp::solve_standard_form(a, b, c);
  if (res.status != lp::Status::optimal) throw SolverError("joint LP did not reach optimality");

  FullLpWeights out;
  out.w = res.x.segment(w0, m).cwiseMax(0.0);
  const double total = out.w.sum();
  if (!(total > 0.0)) throw SolverError("joint LP returned zero weights");
  out.w /= total;
  out.couplings.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    out.couplings[k] =
        res.x.segment(offset[k], costs[k].size()).reshaped(m, costs[k].cols()).cwiseMax(0.0);
  out.cost = res.objective;
  return out;
}

FullLpResult fulllp_centroid(const MemberList& members, const DiscreteDistribution& init,
                             const FullLpParams& params, const RunControl& control) {
  if (params.outer_iters < 1) throw InputError("joint LP needs at least one outer iteration");
  detail::require_compatible(init, members);
  check_scale(members.size(), init.size(), members);

  const bool relocate = params.relocate_support && !init.symbolic();
  FullLpResult result;
  DiscreteDistribution centroid = init;
  // The support moves first, starting from the exact couplings of the init.
  std::vector<Eigen::MatrixXd> couplings;
  if (relocate) couplings = optimal_couplings(centroid, members, control.pool);
  double previous = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < params.outer_iters; ++outer) {
    if (relocate) centroid = update_support(centroid, members, couplings);
    FullLpWeights step = solve_joint_lp(member_costs(centroid, members, control.pool), members);
    centroid.weights = step.w;
    couplings = std::move(step.couplings);
    result.info.iterations = outer + 1;
    const double objective = step.cost / static_cast<double>(members.size());
    if (!relocate) break;
    if (outer > 0 && previous - objective <= params.tolerance * std::max(1.0, std::abs(previous)))
      break;
    previous = objective;
    if (detail::expired(control)) break;
  }

  result.centroid.distribution = std::move(centroid);
  if (control.compute_objective)
    result.centroid.objective =
        centroid_objective(result.centroid.distribution, members, control.pool);
  return result;
}

}  // namespace d2
