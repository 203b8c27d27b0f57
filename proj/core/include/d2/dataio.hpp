#pragma once

#include "d2/distribution.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace d2 {

/// Symbolic cost tables available to the reader, keyed by table id.
using TableRegistry = std::map<std::string, std::shared_ptr<const CostTable>>;

/// Parses the D2S text format. Each block is
///   d            (or "S <table-id>" for symbolic supports)
///   m
///   w_1 ... w_m
///   m lines of d reals (or one symbol index each)
/// Weights within 1e-6 of summing to one are renormalized; anything further
/// off is rejected with the block index and line number.
std::vector<DiscreteDistribution> read_dataset(std::istream& in, const TableRegistry& tables = {});
std::vector<DiscreteDistribution> read_dataset_file(const std::string& path,
                                                    const TableRegistry& tables = {});

/// Writes blocks with 17 significant digits and LF line endings.
void write_dataset(std::ostream& out, const std::vector<DiscreteDistribution>& data);
void write_dataset_file(const std::string& path, const std::vector<DiscreteDistribution>& data);

/// Cost-table file: "S k" followed by k lines of k reals.
std::shared_ptr<const CostTable> read_cost_table(std::istream& in, std::string id);
std::shared_ptr<const CostTable> read_cost_table_file(const std::string& path, std::string id);
void write_cost_table(std::ostream& out, const CostTable& table);

/// One integer label per line.
std::vector<int> read_labels(std::istream& in);
std::vector<int> read_labels_file(const std::string& path);
void write_labels(std::ostream& out, const std::vector<int>& labels);

struct SynthSpec {
  int n = 100;
  int d = 2;
  int m = 4;
  int clusters = 2;
  /// Scale of the planted group means relative to the unit within-group noise.
  double separation = 10.0;
  double dirichlet_alpha = 1.0;
  double t_dof = 5.0;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  std::vector<DiscreteDistribution> data;
  std::vector<int> labels;
};

/// Planted-group generator: support points are group mean + N(0, I) +
/// Student-t noise; weights are symmetric Dirichlet draws perturbed by up to
/// +-10% and renormalized. Deterministic for a given seed.
SyntheticData generate_synthetic(const SynthSpec& spec);

}  // namespace d2
