#include "d2/clustering.hpp"

#include "d2/errors.hpp"
#include "d2/transport.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

namespace d2 {

namespace {

double merge_cost(const DiscreteDistribution& d, Eigen::Index i, Eigen::Index j) {
  const double wi = d.weights[i], wj = d.weights[j];
  const double sum = wi + wj;
  if (!(sum > 0.0)) return 0.0;
  const double sq = d.symbolic() ? d.table->costs(d.symbols[i], d.symbols[j])
                                 : (d.support.col(i) - d.support.col(j)).squaredNorm();
  return wi * wj * sq / sum;
}

void erase_point(DiscreteDistribution& d, Eigen::Index j) {
  const Eigen::Index m = d.size();
  const Eigen::Index tail = m - j - 1;
  d.weights.segment(j, tail) = d.weights.segment(j + 1, tail).eval();
  d.weights.conservativeResize(m - 1);
  if (d.symbolic()) {
    d.symbols.erase(d.symbols.begin() + j);
  } else {
    d.support.middleCols(j, tail) = d.support.middleCols(j + 1, tail).eval();
    d.support.conservativeResize(Eigen::NoChange, m - 1);
  }
}

void duplicate_point(DiscreteDistribution& d, Eigen::Index i) {
  const Eigen::Index m = d.size();
  d.weights[i] *= 0.5;
  d.weights.conservativeResize(m + 1);
  d.weights[m] = d.weights[i];
  if (d.symbolic()) {
    d.symbols.push_back(d.symbols[static_cast<std::size_t>(i)]);
  } else {
    d.support.conservativeResize(Eigen::NoChange, m + 1);
    d.support.col(m) = d.support.col(i);
  }
}

double w2_between(const DiscreteDistribution& a, const DiscreteDistribution& b) {
  return wasserstein2(a, b);
}

int resolve_m(std::span<const DiscreteDistribution> data, int m) {
  if (m > 0) return m;
  return std::max(1, average_support_size(member_list(data)));
}

std::unique_ptr<WorkerPool> make_pool(int workers) {
  if (workers < 1) throw InputError("workers must be positive");
  if (workers == 1) return nullptr;
  return std::make_unique<WorkerPool>(static_cast<std::size_t>(workers));
}

struct Budget {
  double eta = 0.0;
  double t_total = 0.0;
  std::vector<ProfileRow>* log = nullptr;
};

// Returns a new centroid for one cluster and refreshes the coupling cache.
DiscreteDistribution update_centroid(std::span<const DiscreteDistribution> data,
                                     const std::vector<int>& ids, int cluster,
                                     const DiscreteDistribution& current,
                                     const ClusterParams& params, AssignmentCache& cache,
                                     const RunControl& control, bool& skipped) {
  MemberList members;
  members.reserve(ids.size());
  for (int id : ids) members.push_back(&data[static_cast<std::size_t>(id)]);

  auto store = [&](const auto& pick) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const auto id = static_cast<std::size_t>(ids[k]);
      cache.couplings[id] = pick(k);
      cache.coupling_label[id] = cluster;
    }
  };

  switch (params.solver) {
    case CentroidSolver::badmm: {
      const auto warm = warm_start_couplings(data, ids, cluster, current, cache);
      BadmmResult r = badmm_centroid(members, current, &warm, params.badmm, control);
      skipped = r.info.budget_skipped;
      if (!skipped) store([&](std::size_t k) { return std::move(r.state.members[k].pi2); });
      return std::move(r.centroid.distribution);
    }
    case CentroidSolver::admm: {
      const auto warm = warm_start_couplings(data, ids, cluster, current, cache);
      AdmmResult r = admm_centroid(members, current, &warm, params.admm, control);
      skipped = r.info.budget_skipped;
      if (!skipped) store([&](std::size_t k) { return std::move(r.couplings[k]); });
      return std::move(r.centroid.distribution);
    }
    case CentroidSolver::subgrad: {
      SubgradResult r = subgrad_centroid(members, current, params.subgrad, control);
      skipped = r.info.budget_skipped;
      return std::move(r.centroid.distribution);
    }
  }
  throw InputError("unknown centroid solver");
}

int repair_empty_clusters(std::span<const DiscreteDistribution> data,
                          std::vector<DiscreteDistribution>& centroids, AssignmentCache& cache,
                          int m) {
  const std::size_t n = data.size();
  const int k = static_cast<int>(centroids.size());
  int moved = 0;
  for (int c = 0; c < k; ++c) {
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (int l : cache.labels) ++count[static_cast<std::size_t>(l)];
    if (count[static_cast<std::size_t>(c)] > 0) continue;
    std::size_t far = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (count[static_cast<std::size_t>(cache.labels[i])] < 2) continue;
      if (far == n || cache.distances[i] > cache.distances[far]) far = i;
    }
    if (far == n) throw SolverError("cannot repair empty cluster");
    centroids[static_cast<std::size_t>(c)] = reduce_support(data[far], m);
    cache.labels[far] = c;
    cache.distances[far] = w2_between(data[far], centroids[static_cast<std::size_t>(c)]);
    ++moved;
  }
  return moved;
}

ClusterModel run_clusters(std::span<const DiscreteDistribution> data, const ClusterParams& params,
                          std::vector<DiscreteDistribution> centroids, const Budget* budget) {
  const std::size_t n = data.size();
  if (params.k < 1) throw InputError("k must be at least 1");
  if (n < static_cast<std::size_t>(params.k)) throw InputError("fewer objects than clusters");
  if (centroids.size() != static_cast<std::size_t>(params.k))
    throw InputError("initial centroid count differs from k");
  if (params.max_outer < 0) throw InputError("max_outer must be non-negative");
  for (const auto& c : centroids) detail::require_compatible(c, member_list(data));

  const int m = resolve_m(data, params.m);
  const auto pool = make_pool(params.workers);
  const int threshold = params.change_threshold > 0
                            ? params.change_threshold
                            : std::max(1, static_cast<int>(n / 1000));

  AssignmentCache cache;
  cache.labels.assign(n, -1);
  cache.distances.assign(n, 0.0);
  cache.couplings.assign(n, Eigen::MatrixXd());
  cache.coupling_label.assign(n, -1);

  ClusterModel model;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  int skipped = 0;

  for (int round = 0;; ++round) {
    const std::vector<int> previous = cache.labels;
    const auto assign_start = Clock::now();
    assign_labels(data, centroids, cache, params.prune, pool.get());
    const double t_assign = std::chrono::duration<double>(Clock::now() - assign_start).count();
    int changes = 0;
    for (std::size_t i = 0; i < n; ++i) changes += previous[i] != cache.labels[i];
    changes += repair_empty_clusters(data, centroids, cache, m);

    double objective = 0.0;
    for (double d : cache.distances) objective += d * d;
    const double now = elapsed();
    model.trace.push_back({round, objective, now, changes});
    if (budget && budget->log) budget->log->push_back({round, now, objective, changes, skipped});

    if (budget) {
      if (now >= budget->t_total) break;
    } else if ((round > 0 && changes < threshold) || round >= params.max_outer) {
      break;
    }

    std::vector<std::vector<int>> ids(centroids.size());
    for (std::size_t i = 0; i < n; ++i)
      ids[static_cast<std::size_t>(cache.labels[i])].push_back(static_cast<int>(i));
    skipped = 0;
    const double slice =
        budget ? budget->eta * t_assign / static_cast<double>(centroids.size()) : 0.0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      if (ids[c].empty()) continue;
      RunControl control;
      control.pool = pool.get();
      control.compute_objective = false;
      if (budget && slice < 1e6)
        control.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                              std::chrono::duration<double>(slice));
      bool was_skipped = false;
      centroids[c] = update_centroid(data, ids[c], static_cast<int>(c), centroids[c], params,
                                     cache, control, was_skipped);
      skipped += was_skipped;
    }
  }

  model.centroids = std::move(centroids);
  model.labels = std::move(cache.labels);
  return model;
}

}  // namespace

DiscreteDistribution reduce_support(const DiscreteDistribution& dist, int m) {
  if (m < 1) throw InputError("target support size must be positive");
  if (dist.size() < 1) throw InputError("cannot reduce an empty distribution");
  DiscreteDistribution out = dist;
  while (out.size() > m) {
    Eigen::Index bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < out.size(); ++i)
      for (Eigen::Index j = i + 1; j < out.size(); ++j) {
        const double c = merge_cost(out, i, j);
        if (c < best) {
          best = c;
          bi = i;
          bj = j;
        }
      }
    const double wi = out.weights[bi], wj = out.weights[bj];
    const double sum = wi + wj;
    if (out.symbolic()) {
      if (wj > wi) out.symbols[static_cast<std::size_t>(bi)] = out.symbols[static_cast<std::size_t>(bj)];
    } else if (sum > 0.0) {
      out.support.col(bi) = (wi * out.support.col(bi) + wj * out.support.col(bj)) / sum;
    }
    out.weights[bi] = sum;
    erase_point(out, bj);
  }
  while (out.size() < m) {
    Eigen::Index heaviest = 0;
    out.weights.maxCoeff(&heaviest);
    duplicate_point(out, heaviest);
  }
  return out;
}

DiscreteDistribution init_centroid(const MemberList& members, int m, std::uint64_t seed) {
  detail::require_members(members);
  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k < members.size(); ++k)
    if (members[k]->size() >= m) eligible.push_back(k);
  if (eligible.empty()) {
    std::size_t largest = 0;
    for (std::size_t k = 1; k < members.size(); ++k)
      if (members[k]->size() > members[largest]->size()) largest = k;
    return reduce_support(*members[largest], m);
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
  return reduce_support(*members[eligible[pick(rng)]], m);
}

std::vector<DiscreteDistribution> seed_centroids(std::span<const DiscreteDistribution> data,
                                                 int k, int m, SeedStrategy strategy,
                                                 std::uint64_t seed, WorkerPool* pool) {
  const std::size_t n = data.size();
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw InputError("seeding needs 1 <= k <= number of objects");
  m = resolve_m(data, m);
  std::mt19937_64 rng(seed);
  std::vector<DiscreteDistribution> centroids;
  centroids.reserve(static_cast<std::size_t>(k));

  if (strategy == SeedStrategy::uniform) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(order[i], order[pick(rng)]);
      centroids.push_back(reduce_support(data[order[i]], m));
    }
    return centroids;
  }

  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centroids.push_back(reduce_support(data[first(rng)], m));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<bool> taken(n, false);
  while (centroids.size() < static_cast<std::size_t>(k)) {
    const DiscreteDistribution& last = centroids.back();
    for_each_index(pool, n, [&](std::size_t i) {
      const double d = wasserstein2_squared(data[i], last);
      if (d < nearest[i]) nearest[i] = d;
    });
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i]) total += nearest[i];
    std::size_t chosen = n;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || nearest[i] <= 0.0) continue;
        chosen = i;
        r -= nearest[i];
        if (r < 0.0) break;
      }
    }
    if (chosen == n) {
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i)
        if (!taken[i]) free.push_back(i);
      chosen = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    }
    taken[chosen] = true;
    centroids.push_back(reduce_support(data[chosen], m));
  }
  return centroids;
}

AssignStats assign_labels(std::span<const DiscreteDistribution> data,
                          const std::vector<DiscreteDistribution>& centroids,
                          AssignmentCache& cache, bool prune, WorkerPool* pool) {
  const std::size_t n = data.size();
  const int k = static_cast<int>(centroids.size());
  if (k < 1) throw InputError("assignment needs at least one centroid");
  if (cache.labels.size() != n) cache.labels.assign(n, -1);
  if (cache.distances.size() != n) cache.distances.assign(n, 0.0);

  AssignStats stats;
  cache.inter_centroid = Eigen::MatrixXd::Zero(k, k);
  if (prune && k > 1) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
    std::vector<double> dist(pairs.size());
    for_each_index(pool, pairs.size(), [&](std::size_t p) {
      dist[p] = w2_between(centroids[static_cast<std::size_t>(pairs[p].first)],
                           centroids[static_cast<std::size_t>(pairs[p].second)]);
    });
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      cache.inter_centroid(pairs[p].first, pairs[p].second) = dist[p];
      cache.inter_centroid(pairs[p].second, pairs[p].first) = dist[p];
    }
    stats.distance_evals += static_cast<long long>(pairs.size());
  }

  std::vector<long long> evals(n, 0);
  for_each_index(pool, n, [&](std::size_t i) {
    const int cached = cache.labels[i];
    const int first = (cached >= 0 && cached < k) ? cached : 0;
    int best = first;
    double d_best = w2_between(data[i], centroids[static_cast<std::size_t>(best)]);
    long long count = 1;
    for (int c = 0; c < k; ++c) {
      if (c == first) continue;
      // d(x,c) >= D(best,c) - d(x,best) > d(x,best): c cannot win or tie.
      if (prune && cache.inter_centroid(best, c) > 2.0 * d_best * (1.0 + 1e-12) + 1e-14) continue;
      const double d = w2_between(data[i], centroids[static_cast<std::size_t>(c)]);
      ++count;
      if (d < d_best || (d == d_best && c < best)) {
        best = c;
        d_best = d;
      }
    }
    cache.labels[i] = best;
    cache.distances[i] = d_best;
    evals[i] = count;
  });
  for (long long e : evals) stats.distance_evals += e;
  return stats;
}

std::vector<Eigen::MatrixXd> warm_start_couplings(std::span<const DiscreteDistribution> data,
                                                  const std::vector<int>& member_ids,
                                                  int cluster,
                                                  const DiscreteDistribution& centroid,
                                                  const AssignmentCache& cache,
                                                  std::vector<bool>* reused) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(member_ids.size());
  if (reused) reused->assign(member_ids.size(), false);
  for (std::size_t k = 0; k < member_ids.size(); ++k) {
    const auto id = static_cast<std::size_t>(member_ids[k]);
    if (id >= data.size()) throw InputError("member id out of range");
    const DiscreteDistribution& member = data[id];
    const bool hit = id < cache.coupling_label.size() && cache.coupling_label[id] == cluster &&
                     id < cache.couplings.size() &&
                     cache.couplings[id].rows() == centroid.size() &&
                     cache.couplings[id].cols() == member.size();
    if (hit) {
      out.push_back(cache.couplings[id]);
      if (reused) (*reused)[k] = true;
    } else {
      out.push_back(product_coupling(centroid.weights, member.weights));
    }
  }
  return out;
}

ClusterModel d2_cluster(std::span<const DiscreteDistribution> data, const ClusterParams& params) {
  const auto pool = make_pool(params.workers);
  auto centroids = seed_centroids(data, params.k, params.m, params.seeding, params.seed, pool.get());
  return run_clusters(data, params, std::move(centroids), nullptr);
}

ClusterModel d2_cluster(std::span<const DiscreteDistribution> data, const ClusterParams& params,
                        std::vector<DiscreteDistribution> initial_centroids) {
  return run_clusters(data, params, std::move(initial_centroids), nullptr);
}

double clustering_objective(std::span<const DiscreteDistribution> data,
                            const std::vector<DiscreteDistribution>& centroids,
                            const std::vector<int>& labels, WorkerPool* pool) {
  if (labels.size() != data.size()) throw InputError("one label per object required");
  std::vector<double> parts(data.size());
  for_each_index(pool, data.size(), [&](std::size_t i) {
    const int l = labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= centroids.size())
      throw InputError("label out of range");
    parts[i] = wasserstein2_squared(data[i], centroids[static_cast<std::size_t>(l)]);
  });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

ProfileResult profile_run(std::span<const DiscreteDistribution> data, const ClusterParams& params,
                          double eta, double t_total) {
  if (!(eta > 0.0)) throw InputError("eta must be positive");
  if (!(t_total > 0.0)) throw InputError("total time must be positive");
  ProfileResult result;
  Budget budget{eta, t_total, &result.log};
  const auto pool = make_pool(params.workers);
  auto centroids = seed_centroids(data, params.k, params.m, params.seeding, params.seed, pool.get());
  result.model = run_clusters(data, params, std::move(centroids), &budget);
  return result;
}

std::string profile_csv(const std::vector<ProfileRow>& log) {
  std::ostringstream out;
  out << "outer_iter,elapsed_sec,objective,label_changes,skipped\n" << std::setprecision(17);
  for (const auto& r : log)
    out << r.outer_iter << ',' << r.elapsed_sec << ',' << r.objective << ',' << r.label_changes
        << ',' << r.skipped << '\n';
  return out.str();
}

}  // namespace d2
