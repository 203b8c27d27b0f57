#include "d2/distribution.hpp"

#include "d2/errors.hpp"

#include <cmath>
#include <sstream>

namespace d2 {

DiscreteDistribution DiscreteDistribution::from_points(Eigen::VectorXd weights,
                                                       Eigen::MatrixXd support) {
  DiscreteDistribution d;
  d.weights = std::move(weights);
  d.support = std::move(support);
  validate(d);
  return d;
}

DiscreteDistribution DiscreteDistribution::from_symbols(Eigen::VectorXd weights,
                                                        std::vector<int> symbols,
                                                        std::shared_ptr<const CostTable> table) {
  DiscreteDistribution d;
  d.weights = std::move(weights);
  d.symbols = std::move(symbols);
  d.table = std::move(table);
  validate(d);
  return d;
}

void validate(const DiscreteDistribution& dist, double tolerance) {
  const int m = dist.size();
  if (m < 1) throw InputError("distribution has no support points");
  for (int i = 0; i < m; ++i) {
    if (!std::isfinite(dist.weights[i]) || dist.weights[i] < 0.0) {
      std::ostringstream msg;
      msg << "weight " << i << " is negative or not finite";
      throw InputError(msg.str());
    }
  }
  const double total = dist.weights.sum();
  if (std::abs(total - 1.0) > tolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights sum to " << total << ", not 1";
    throw InputError(msg.str());
  }
  if (dist.symbolic()) {
    if (static_cast<int>(dist.symbols.size()) != m)
      throw InputError("symbol count does not match weight count");
    if (dist.table->costs.rows() != dist.table->costs.cols())
      throw InputError("cost table '" + dist.table->id + "' is not square");
    for (int s : dist.symbols) {
      if (s < 0 || s >= dist.table->size()) {
        std::ostringstream msg;
        msg << "symbol " << s << " outside cost table '" << dist.table->id << "'";
        throw InputError(msg.str());
      }
    }
  } else {
    if (dist.support.cols() != m) throw InputError("support point count does not match weights");
    if (dist.support.rows() < 1) throw InputError("support dimension must be at least 1");
    if (!dist.support.allFinite()) throw InputError("support contains non-finite values");
  }
}

Eigen::VectorXd mean_point(const DiscreteDistribution& dist) {
  if (dist.symbolic()) throw InputError("mean_point needs vector supports");
  return dist.support * dist.weights;
}

MemberList member_list(std::span<const DiscreteDistribution> data) {
  MemberList out;
  out.reserve(data.size());
  for (const auto& d : data) out.push_back(&d);
  return out;
}

int average_support_size(const MemberList& members) {
  if (members.empty()) return 1;
  double total = 0.0;
  for (const auto* p : members) total += p->size();
  return std::max(1, static_cast<int>(std::lround(total / static_cast<double>(members.size()))));
}

}  // namespace d2
