#include "d2/barycenter.hpp"

#include "d2/errors.hpp"
#include "d2/transport.hpp"

#include <cmath>

namespace d2 {

namespace detail {

void require_members(const MemberList& members) {
  if (members.empty()) throw InputError("barycenter needs at least one member");
  for (const auto* p : members)
    if (p == nullptr) throw InputError("null member");
}

void require_compatible(const DiscreteDistribution& centroid, const MemberList& members) {
  require_members(members);
  for (const auto* p : members) {
    if (p->symbolic() != centroid.symbolic())
      throw InputError("centroid and members mix symbolic and vector supports");
    if (!centroid.symbolic() && p->dim() != centroid.dim())
      throw InputError("centroid and member dimensions differ");
  }
}

}  // namespace detail

std::vector<Eigen::MatrixXd> member_costs(const DiscreteDistribution& centroid,
                                          const MemberList& members, WorkerPool* pool) {
  std::vector<Eigen::MatrixXd> costs(members.size());
  for_each_index(pool, members.size(),
                 [&](std::size_t k) { costs[k] = cost_matrix(centroid, *members[k], 2); });
  return costs;
}

double rho_from_costs(const std::vector<Eigen::MatrixXd>& costs, double rho0) {
  if (costs.empty()) throw InputError("rho needs at least one member");
  double total = 0.0;
  double entries = 0.0;
  for (const auto& c : costs) {
    total += c.sum();
    entries += static_cast<double>(c.size());
  }
  return rho0 * total / entries;
}

double rho_from_costs(const MemberList& members, const DiscreteDistribution& centroid,
                      double rho0) {
  detail::require_members(members);
  return rho_from_costs(member_costs(centroid, members), rho0);
}

DiscreteDistribution update_support(const DiscreteDistribution& centroid,
                                    const MemberList& members,
                                    const std::vector<Eigen::MatrixXd>& plans) {
  if (centroid.symbolic()) return centroid;
  detail::require_compatible(centroid, members);
  if (plans.size() != members.size()) throw InputError("one coupling per member required");
  const Eigen::Index m = centroid.size();
  Eigen::MatrixXd numer = Eigen::MatrixXd::Zero(centroid.dim(), m);
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (plans[k].rows() != m || plans[k].cols() != members[k]->size())
      throw InputError("coupling shape does not match centroid and member");
    numer.noalias() += members[k]->support * plans[k].transpose();
  }
  const double n = static_cast<double>(members.size());
  DiscreteDistribution out = centroid;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double wi = centroid.weights[i];
    if (wi < 1e-12) continue;
    out.support.col(i) = numer.col(i) / (n * wi);
  }
  return out;
}

Eigen::MatrixXd product_coupling(const Eigen::VectorXd& w, const Eigen::VectorXd& member_w) {
  return w * member_w.transpose();
}

double centroid_objective(const DiscreteDistribution& centroid, const MemberList& members,
                          WorkerPool* pool) {
  detail::require_compatible(centroid, members);
  std::vector<double> d(members.size());
  for_each_index(pool, members.size(),
                 [&](std::size_t k) { d[k] = wasserstein2_squared(centroid, *members[k]); });
  double total = 0.0;
  for (double v : d) total += v;
  return total / static_cast<double>(members.size());
}

std::vector<Eigen::MatrixXd> optimal_couplings(const DiscreteDistribution& centroid,
                                               const MemberList& members, WorkerPool* pool) {
  detail::require_compatible(centroid, members);
  std::vector<Eigen::MatrixXd> plans(members.size());
  for_each_index(pool, members.size(), [&](std::size_t k) {
    plans[k] = solve_transport(cost_matrix(centroid, *members[k]), centroid.weights,
                               members[k]->weights)
                   .pi;
  });
  return plans;
}

}  // namespace d2
