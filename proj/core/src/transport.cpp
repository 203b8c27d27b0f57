#include "d2/transport.hpp"

#include "d2/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace d2 {

Eigen::MatrixXd cost_matrix(const DiscreteDistribution& a, const DiscreteDistribution& b, int p) {
  if (p < 1) throw InputError("cost order p must be >= 1");
  if (a.symbolic() != b.symbolic())
    throw InputError("cannot mix symbolic and vector supports");
  const int ma = a.size();
  const int mb = b.size();
  Eigen::MatrixXd c(ma, mb);
  if (a.symbolic()) {
    if (a.table != b.table && a.table->id != b.table->id)
      throw InputError("symbolic distributions reference different cost tables");
    const auto& t = a.table->costs;
    for (int j = 0; j < mb; ++j)
      for (int i = 0; i < ma; ++i) c(i, j) = t(a.symbols[i], b.symbols[j]);
    return c;
  }
  if (a.dim() != b.dim()) {
    std::ostringstream msg;
    msg << "dimension mismatch: " << a.dim() << " vs " << b.dim();
    throw InputError(msg.str());
  }
  for (int j = 0; j < mb; ++j) {
    for (int i = 0; i < ma; ++i) {
      if (p == 2) {
        c(i, j) = (a.support.col(i) - b.support.col(j)).squaredNorm();
      } else {
        double s = 0.0;
        for (int r = 0; r < a.dim(); ++r)
          s += std::pow(std::abs(a.support(r, i) - b.support(r, j)), p);
        c(i, j) = s;
      }
    }
  }
  return c;
}

namespace {

struct Cell {
  int i;
  int j;
};

// Basis of the transportation simplex: a spanning tree over ma row nodes and
// mb column nodes (column j is node ma + j), one edge per basic cell.
class TransportSimplex {
 public:
  TransportSimplex(const Eigen::MatrixXd& cost, Eigen::VectorXd supply, Eigen::VectorXd demand)
      : c_(cost),
        ma_(static_cast<int>(cost.rows())),
        mb_(static_cast<int>(cost.cols())),
        flow_(Eigen::MatrixXd::Zero(ma_, mb_)),
        cell_id_(Eigen::MatrixXi::Constant(ma_, mb_, -1)),
        adj_(ma_ + mb_),
        u_(ma_),
        v_(mb_) {
    initial_basis(std::move(supply), std::move(demand));
    const double scale = 1.0 + c_.cwiseAbs().maxCoeff();
    cost_tol_ = 1e-12 * scale;
  }

  void run() {
    const long long cap = 50LL * (ma_ + mb_) * (ma_ + mb_) + 1000;
    int degenerate_run = 0;
    bool bland = false;
    for (long long iter = 0;; ++iter) {
      if (iter > cap) throw SolverError("transport simplex exceeded its pivot limit");
      compute_potentials();
      int ei = -1, ej = -1;
      if (!entering(bland, ei, ej)) return;
      const bool degenerate = pivot(ei, ej);
      degenerate_run = degenerate ? degenerate_run + 1 : 0;
      if (degenerate_run > 2 * (ma_ + mb_)) bland = true;
    }
  }

  TransportPlan plan(const Eigen::VectorXd& w_a, const Eigen::VectorXd& w_b) {
    compute_potentials();
    TransportPlan out;
    out.pi = flow_.cwiseMax(0.0);
    out.cost = (out.pi.array() * c_.array()).sum();
    out.row_duals = u_;
    out.col_duals = v_;
    // Zero-mass rows and columns: pick the tightest dual-feasible value.
    for (int i = 0; i < ma_; ++i) {
      if (w_a[i] != 0.0) continue;
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < mb_; ++j) best = std::min(best, c_(i, j) - out.col_duals[j]);
      out.row_duals[i] = best;
    }
    for (int j = 0; j < mb_; ++j) {
      if (w_b[j] != 0.0) continue;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < ma_; ++i) best = std::min(best, c_(i, j) - out.row_duals[i]);
      out.col_duals[j] = best;
    }
    return out;
  }

 private:
  void add_cell(int i, int j, double x) {
    const int id = static_cast<int>(cells_.size());
    cells_.push_back({i, j});
    cell_id_(i, j) = id;
    flow_(i, j) = x;
    adj_[i].push_back(id);
    adj_[ma_ + j].push_back(id);
  }

  // Least-cost rule; removes exactly one line per allocation so the result is
  // a spanning tree with ma + mb - 1 cells, zero-flow cells included.
  void initial_basis(Eigen::VectorXd supply, Eigen::VectorXd demand) {
    std::vector<char> row_alive(ma_, 1), col_alive(mb_, 1);
    int rows_left = ma_, cols_left = mb_;
    while (rows_left > 0 && cols_left > 0) {
      int bi = -1, bj = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < ma_; ++i) {
        if (!row_alive[i]) continue;
        for (int j = 0; j < mb_; ++j) {
          if (!col_alive[j]) continue;
          if (c_(i, j) < best) {
            best = c_(i, j);
            bi = i;
            bj = j;
          }
        }
      }
      const double x = std::max(0.0, std::min(supply[bi], demand[bj]));
      add_cell(bi, bj, x);
      supply[bi] -= x;
      demand[bj] -= x;
      if (rows_left == 1 && cols_left == 1) break;
      const bool drop_row =
          cols_left == 1 || (rows_left > 1 && supply[bi] <= demand[bj]);
      if (drop_row) {
        row_alive[bi] = 0;
        --rows_left;
        demand[bj] = std::max(0.0, demand[bj]);
      } else {
        col_alive[bj] = 0;
        --cols_left;
        supply[bi] = std::max(0.0, supply[bi]);
      }
    }
  }

  void compute_potentials() {
    std::vector<char> seen(ma_ + mb_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    u_[0] = 0.0;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (int id : adj_[node]) {
        const Cell& e = cells_[id];
        const int other = node < ma_ ? ma_ + e.j : e.i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (node < ma_)
          v_[e.j] = c_(e.i, e.j) - u_[e.i];
        else
          u_[e.i] = c_(e.i, e.j) - v_[e.j];
        stack.push_back(other);
      }
    }
  }

  bool entering(bool bland, int& ei, int& ej) const {
    double most = -cost_tol_;
    for (int i = 0; i < ma_; ++i) {
      for (int j = 0; j < mb_; ++j) {
        if (cell_id_(i, j) >= 0) continue;
        const double r = c_(i, j) - u_[i] - v_[j];
        if (r < most) {
          most = r;
          ei = i;
          ej = j;
          if (bland) return true;
        }
      }
    }
    return ei >= 0;
  }

  // Tree path from column node of ej to row node ei, as a list of cell ids.
  std::vector<int> tree_path(int ei, int ej) const {
    const int src = ma_ + ej;
    const int dst = ei;
    std::vector<int> parent_cell(ma_ + mb_, -1);
    std::vector<char> seen(ma_ + mb_, 0);
    std::vector<int> queue{src};
    seen[src] = 1;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const int node = queue[h];
      if (node == dst) break;
      for (int id : adj_[node]) {
        const Cell& e = cells_[id];
        const int other = node < ma_ ? ma_ + e.j : e.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_cell[other] = id;
        queue.push_back(other);
      }
    }
    std::vector<int> path;
    for (int node = dst; node != src;) {
      const int id = parent_cell[node];
      if (id < 0) throw SolverError("transport basis is not a spanning tree");
      path.push_back(id);
      const Cell& e = cells_[id];
      node = node < ma_ ? ma_ + e.j : e.i;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Returns true when the pivot moved no mass.
  bool pivot(int ei, int ej) {
    const std::vector<int> path = tree_path(ei, ej);
    // path[0] touches column ej and gives up mass; signs alternate from there.
    int leave = -1;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const Cell& e = cells_[path[k]];
      const double f = flow_(e.i, e.j);
      const int key = e.i * mb_ + e.j;
      if (f < theta || (f == theta && key < cells_[leave].i * mb_ + cells_[leave].j)) {
        theta = f;
        leave = path[k];
      }
    }
    theta = std::max(0.0, theta);
    for (std::size_t k = 0; k < path.size(); ++k) {
      const Cell& e = cells_[path[k]];
      flow_(e.i, e.j) += (k % 2 == 0) ? -theta : theta;
    }
    const Cell out = cells_[leave];
    flow_(out.i, out.j) = 0.0;
    cell_id_(out.i, out.j) = -1;
    auto drop = [&](std::vector<int>& list) {
      list.erase(std::find(list.begin(), list.end(), leave));
    };
    drop(adj_[out.i]);
    drop(adj_[ma_ + out.j]);

    cells_[leave] = {ei, ej};
    cell_id_(ei, ej) = leave;
    flow_(ei, ej) = theta;
    adj_[ei].push_back(leave);
    adj_[ma_ + ej].push_back(leave);
    return theta == 0.0;
  }

  const Eigen::MatrixXd& c_;
  int ma_;
  int mb_;
  Eigen::MatrixXd flow_;
  Eigen::MatrixXi cell_id_;
  std::vector<Cell> cells_;
  std::vector<std::vector<int>> adj_;
  Eigen::VectorXd u_;
  Eigen::VectorXd v_;
  double cost_tol_ = 0.0;
};

void check_marginal(const Eigen::VectorXd& w, const char* name) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0)
      throw InputError(std::string(name) + " has a negative or non-finite weight");
  }
}

}  // namespace

TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& w_a,
                              const Eigen::VectorXd& w_b) {
  if (cost.rows() != w_a.size() || cost.cols() != w_b.size())
    throw InputError("cost matrix shape does not match the marginals");
  if (w_a.size() == 0 || w_b.size() == 0) throw InputError("empty marginal");
  if (!cost.allFinite()) throw InputError("cost matrix has non-finite entries");
  check_marginal(w_a, "row marginal");
  check_marginal(w_b, "column marginal");
  const double sa = w_a.sum();
  const double sb = w_b.sum();
  if (std::abs(sa - sb) > 1e-6) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "infeasible marginals: sums " << sa << " and " << sb;
    throw InputError(msg.str());
  }
  Eigen::VectorXd demand = w_b;
  if (sb > 0.0) demand *= sa / sb;
  TransportSimplex simplex(cost, w_a, demand);
  simplex.run();
  return simplex.plan(w_a, w_b);
}

double wasserstein2_squared(const DiscreteDistribution& a, const DiscreteDistribution& b) {
  return std::max(0.0, solve_transport(cost_matrix(a, b, 2), a.weights, b.weights).cost);
}

double wasserstein2(const DiscreteDistribution& a, const DiscreteDistribution& b) {
  return std::sqrt(wasserstein2_squared(a, b));
}

}  // namespace d2
