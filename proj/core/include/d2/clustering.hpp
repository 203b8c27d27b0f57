#pragma once

#include "d2/admm.hpp"
#include "d2/badmm.hpp"
#include "d2/barycenter.hpp"
#include "d2/subgradient.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace d2 {

enum class CentroidSolver { badmm, admm, subgrad };

enum class SeedStrategy {
  plus_plus,  ///< D^2-weighted sampling under W2
  uniform,    ///< K distinct members uniformly without replacement
};

struct ClusterParams {
  int k = 2;
  /// Centroid support size; 0 means the dataset's average support size.
  int m = 0;
  CentroidSolver solver = CentroidSolver::badmm;
  BadmmParams badmm;
  AdmmParams admm;
  SubgradParams subgrad;
  /// Maximum outer rounds (assignment + update).
  int max_outer = 30;
  /// Stop when fewer labels than this change; 0 means max(1, N/1000).
  int change_threshold = 0;
  bool prune = true;
  std::uint64_t seed = 1;
  int workers = 1;
  SeedStrategy seeding = SeedStrategy::plus_plus;
};

/// Per-object state carried between outer rounds.
struct AssignmentCache {
  std::vector<int> labels;
  std::vector<double> distances;
  /// Last pi2 solved for the object, and the cluster it was solved for.
  std::vector<Eigen::MatrixXd> couplings;
  std::vector<int> coupling_label;
  /// Symmetric K x K W2 distances between the current centroids.
  Eigen::MatrixXd inter_centroid;
};

struct AssignStats {
  long long distance_evals = 0;
};

struct TracePoint {
  int outer_iter = 0;
  double objective = 0.0;
  double elapsed_sec = 0.0;
  int label_changes = 0;
};

struct ClusterModel {
  std::vector<DiscreteDistribution> centroids;
  std::vector<int> labels;
  std::vector<TracePoint> trace;
};

/// Greedy merging down to m points: repeatedly fuses the pair minimizing
/// w_i w_j ||x_i - x_j||^2 / (w_i + w_j) into its weighted mean. A
/// distribution with fewer than m points is padded by splitting its
/// heaviest point.
DiscreteDistribution reduce_support(const DiscreteDistribution& dist, int m);

/// Picks a random member with at least m points (the largest member if
/// none has) and reduces it to exactly m points.
DiscreteDistribution init_centroid(const MemberList& members, int m, std::uint64_t seed);

/// Initial centroids for d2_cluster, reduced to m points each.
std::vector<DiscreteDistribution> seed_centroids(std::span<const DiscreteDistribution> data,
                                                 int k, int m, SeedStrategy strategy,
                                                 std::uint64_t seed, WorkerPool* pool = nullptr);

/// Nearest-centroid labels under W2. With pruning, candidates ruled out by
/// the triangle inequality against inter-centroid distances are skipped;
/// the labels are identical either way. Labels already in the cache are
/// tried first. Ties go to the lowest centroid index.
AssignStats assign_labels(std::span<const DiscreteDistribution> data,
                          const std::vector<DiscreteDistribution>& centroids,
                          AssignmentCache& cache, bool prune, WorkerPool* pool = nullptr);

/// Initial pi2 for each member of `cluster`: the cached coupling when the
/// member was solved for this cluster last round, the product coupling
/// otherwise. `reused`, when given, records which was taken.
std::vector<Eigen::MatrixXd> warm_start_couplings(std::span<const DiscreteDistribution> data,
                                                  const std::vector<int>& member_ids,
                                                  int cluster,
                                                  const DiscreteDistribution& centroid,
                                                  const AssignmentCache& cache,
                                                  std::vector<bool>* reused = nullptr);

/// Alternates assignment and centroid updates until the number of label
/// changes drops below the threshold or max_outer rounds pass.
ClusterModel d2_cluster(std::span<const DiscreteDistribution> data, const ClusterParams& params);

/// Same, starting from the given centroids instead of seeding.
ClusterModel d2_cluster(std::span<const DiscreteDistribution> data, const ClusterParams& params,
                        std::vector<DiscreteDistribution> initial_centroids);

/// Total sum_k W2^2(centroid of k, P_k) for fixed labels.
double clustering_objective(std::span<const DiscreteDistribution> data,
                            const std::vector<DiscreteDistribution>& centroids,
                            const std::vector<int>& labels, WorkerPool* pool = nullptr);

struct ProfileRow {
  int outer_iter = 0;
  double elapsed_sec = 0.0;
  double objective = 0.0;
  int label_changes = 0;
  int skipped = 0;
};

struct ProfileResult {
  ClusterModel model;
  std::vector<ProfileRow> log;
};

/// Time-budgeted clustering: after an assignment step taking T_a seconds,
/// each centroid update gets eta * T_a / K seconds. Runs until t_total
/// seconds have elapsed. Updates that cannot finish one iteration are
/// skipped and counted in the log.
ProfileResult profile_run(std::span<const DiscreteDistribution> data, const ClusterParams& params,
                          double eta, double t_total);

/// CSV with header outer_iter,elapsed_sec,objective,label_changes,skipped.
std::string profile_csv(const std::vector<ProfileRow>& log);

}  // namespace d2
