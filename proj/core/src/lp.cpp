#include "d2/lp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

namespace d2::lp {

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPivotTol = 1e-9;

class DenseSimplex {
 public:
  DenseSimplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
      : rows_(static_cast<int>(a.rows())), cols_(static_cast<int>(a.cols())) {
    // Columns: [original | artificial | rhs]; last row holds reduced costs.
    t_ = Tableau::Zero(rows_ + 1, cols_ + rows_ + 1);
    for (int r = 0; r < rows_; ++r) {
      const double sign = b[r] < 0.0 ? -1.0 : 1.0;
      t_.row(r).head(cols_) = sign * a.row(r);
      t_(r, cols_ + r) = 1.0;
      t_(r, rhs()) = sign * b[r];
    }
    basis_.resize(rows_);
    for (int r = 0; r < rows_; ++r) basis_[r] = cols_ + r;
  }

  int rhs() const { return cols_ + rows_; }

  Status phase_one(int max_pivots) {
    t_.row(rows_).setZero();
    for (int r = 0; r < rows_; ++r) t_.row(rows_) -= t_.row(r);
    for (int r = 0; r < rows_; ++r) t_(rows_, cols_ + r) = 0.0;
    const Status s = iterate(cols_ + rows_, max_pivots);
    if (s != Status::optimal) return s;
    const double scale = 1.0 + t_.col(rhs()).head(rows_).cwiseAbs().maxCoeff();
    if (-t_(rows_, rhs()) > 1e-9 * scale) return Status::infeasible;
    // Drive zero-level artificials out of the basis; rows with no usable
    // pivot are redundant and stay inert.
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < cols_) continue;
      int best = -1;
      double mag = kPivotTol;
      for (int j = 0; j < cols_; ++j) {
        if (std::abs(t_(r, j)) > mag) {
          mag = std::abs(t_(r, j));
          best = j;
        }
      }
      if (best >= 0) pivot(r, best);
    }
    return Status::optimal;
  }

  Status phase_two(const Eigen::VectorXd& c, int max_pivots) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(cols_) = c.transpose();
    for (int r = 0; r < rows_; ++r) {
      const int j = basis_[r];
      if (j < cols_ && c[j] != 0.0) t_.row(rows_) -= c[j] * t_.row(r);
    }
    return iterate(cols_, max_pivots);
  }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cols_);
    for (int r = 0; r < rows_; ++r)
      if (basis_[r] < cols_) x[basis_[r]] = std::max(0.0, t_(r, rhs()));
    return x;
  }

  int pivots() const { return pivots_; }

 private:
  // Enters only columns below `limit`.
  Status iterate(int limit, int max_pivots) {
    const double scale = 1.0 + t_.row(rows_).head(limit).cwiseAbs().maxCoeff();
    const double cost_tol = 1e-10 * scale;
    int degenerate_run = 0;
    bool bland = false;
    while (true) {
      if (pivots_ >= max_pivots) return Status::iteration_limit;
      int enter = -1;
      double most = -cost_tol;
      for (int j = 0; j < limit; ++j) {
        const double r = t_(rows_, j);
        if (r < most) {
          most = r;
          enter = j;
          if (bland) break;
        }
      }
      if (enter < 0) return Status::optimal;

      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        const double a = t_(r, enter);
        if (a <= kPivotTol) continue;
        const double q = std::max(0.0, t_(r, rhs())) / a;
        if (q < ratio - 1e-14 || (q <= ratio + 1e-14 && leave >= 0 && basis_[r] < basis_[leave])) {
          ratio = q;
          leave = r;
        }
      }
      if (leave < 0) return Status::unbounded;
      degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;
      if (degenerate_run > 50) bland = true;
      pivot(leave, enter);
    }
  }

  void pivot(int r, int j) {
    t_.row(r) /= t_(r, j);
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, j);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = j;
    ++pivots_;
  }

  int rows_;
  int cols_;
  Tableau t_;
  std::vector<int> basis_;
  int pivots_ = 0;
};

}  // namespace

Result solve_standard_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c, int max_pivots) {
  DenseSimplex simplex(a, b);
  Result out;
  out.status = simplex.phase_one(max_pivots);
  if (out.status == Status::optimal) out.status = simplex.phase_two(c, max_pivots);
  out.pivots = simplex.pivots();
  out.x = simplex.solution();
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace d2::lp
