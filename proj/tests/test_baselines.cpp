#include "support.hpp"

#include "d2/admm.hpp"
#include "d2/badmm.hpp"
#include "d2/errors.hpp"
#include "d2/fulllp.hpp"
#include "d2/ibp.hpp"
#include "d2/simplex.hpp"
#include "d2/subgradient.hpp"
#include "d2/transport.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

using namespace d2;
using d2test::line;

namespace {

std::vector<DiscreteDistribution> random_members(std::mt19937_64& rng, int n, int d, int lo, int hi) {
  std::uniform_int_distribution<int> size(lo, hi);
  std::vector<DiscreteDistribution> out;
  for (int k = 0; k < n; ++k) out.push_back(d2test::random_dist(rng, size(rng), d));
  return out;
}

double qp_value(const Eigen::MatrixXd& c, const Eigen::MatrixXd& pi, const Eigen::VectorXd& w,
                const Eigen::VectorXd& lambda, double rho) {
  const Eigen::VectorXd r = pi.rowwise().sum() - w + lambda;
  return (c.array() * pi.array()).sum() + 0.5 * rho * r.squaredNorm();
}

/// Active-set enumeration for the 2x2 QP. With t_j = pi_1j the feasible set
/// is the box [0, b_1] x [0, b_2]; each coordinate is at a bound or free.
double two_by_two_qp(const Eigen::Matrix2d& c, const Eigen::Vector2d& b, const Eigen::Vector2d& w,
                     const Eigen::Vector2d& lambda, double rho) {
  auto value = [&](double t1, double t2) {
    Eigen::Matrix2d pi;
    pi << t1, t2, b[0] - t1, b[1] - t2;
    return qp_value(c, pi, w, lambda, rho);
  };
  const double a1 = w[0] - lambda[0];
  const double a2 = 1.0 - w[1] + lambda[1];
  const Eigen::Vector2d g(c(0, 0) - c(1, 0), c(0, 1) - c(1, 1));
  double best = std::numeric_limits<double>::infinity();
  for (double t1 : {0.0, b[0]})
    for (double t2 : {0.0, b[1]}) best = std::min(best, value(t1, t2));
  for (int j = 0; j < 2; ++j) {
    const double s = 0.5 * (a1 + a2) - g[j] / (2.0 * rho);
    const int o = 1 - j;
    for (double fixed : {0.0, b[o]}) {
      const double t = s - fixed;
      if (t < 0.0 || t > b[j]) continue;
      best = std::min(best, j == 0 ? value(t, fixed) : value(fixed, t));
    }
  }
  return best;
}

Eigen::VectorXd sort_projection(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

double fixed_support_objective(const DiscreteDistribution& c, const MemberList& members) {
  double total = 0.0;
  for (const auto* m : members) total += solve_transport(cost_matrix(c, *m), c.weights, m->weights).cost;
  return total / static_cast<double>(members.size());
}

Eigen::VectorXd mean_subgradient(const DiscreteDistribution& c, const MemberList& members) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(c.size());
  for (const auto* m : members)
    g += projected_subgradient(solve_transport(cost_matrix(c, *m), c.weights, m->weights).row_duals);
  return g / static_cast<double>(members.size());
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("ADMM subproblem: a huge penalty pins the row sums to w") {
    std::mt19937_64 rng(1);
    const Eigen::VectorXd w = d2test::random_weights(rng, 3);
    const Eigen::VectorXd b = d2test::random_weights(rng, 4);
    const Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3, 4);
    const auto r = admm_qp_subproblem(c, b, w, Eigen::VectorXd::Zero(3), 1e6,
                                      Eigen::MatrixXd::Constant(3, 4, 1.0 / 12));
    CHECK((r.pi.rowwise().sum() - w).cwiseAbs().maxCoeff() <= 1e-4);
    CHECK((r.pi.colwise().sum().transpose() - b).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(r.pi.minCoeff() >= 0.0);
  }

  TEST_CASE("ADMM subproblem with one centroid point is forced") {
    const Eigen::VectorXd b = (Eigen::VectorXd(3) << 0.2, 0.5, 0.3).finished();
    const Eigen::MatrixXd c = (Eigen::MatrixXd(1, 3) << 1.0, 4.0, 2.0).finished();
    const auto r = admm_qp_subproblem(c, b, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1), 3.0,
                                      Eigen::MatrixXd::Zero(1, 3));
    CHECK((r.pi.row(0).transpose() - b).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("ADMM subproblem matches active-set enumeration on 2x2 instances") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 3.0), l(-0.2, 0.2), r(0.5, 5.0);
    for (int t = 0; t < 200; ++t) {
      Eigen::Matrix2d c;
      c << u(rng), u(rng), u(rng), u(rng);
      const Eigen::Vector2d b = d2test::random_weights(rng, 2);
      const Eigen::Vector2d w = d2test::random_weights(rng, 2);
      const Eigen::Vector2d lambda(l(rng), l(rng));
      const double rho = r(rng);
      const auto res = admm_qp_subproblem(c, b, w, lambda, rho, w * b.transpose());
      CHECK(res.converged);
      const double oracle = two_by_two_qp(c, b, w, lambda, rho);
      CHECK(qp_value(c, res.pi, w, lambda, rho) == doctest::Approx(oracle).epsilon(1e-9));
    }
  }

  TEST_CASE("ADMM weight update examples") {
    const Eigen::VectorXd same = (Eigen::VectorXd(3) << 0.2, 0.3, 0.5).finished();
    CHECK((admm_w_update({same, same, same}) - same).cwiseAbs().maxCoeff() <= 1e-15);
    const auto half = admm_w_update({Eigen::Vector2d(0.6, 0.6)});
    CHECK(half[0] == doctest::Approx(0.5));
    CHECK(half[1] == doctest::Approx(0.5));
    const auto corner = admm_w_update({Eigen::Vector2d(2.0, -1.0), Eigen::Vector2d(1.0, 0.0)});
    CHECK(corner[0] == doctest::Approx(1.0));
    CHECK(corner[1] == 0.0);
  }

  TEST_CASE("ADMM weight update is the sort-based projection of the mean") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.3, 1.0);
    for (int t = 0; t < 200; ++t) {
      std::vector<Eigen::VectorXd> tilde(4, Eigen::VectorXd(5));
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(5);
      for (auto& v : tilde) {
        for (int i = 0; i < 5; ++i) v[i] = n(rng);
        mean += v / 4.0;
      }
      CHECK((admm_w_update(tilde) - sort_projection(mean)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("ADMM barycenter examples") {
    const auto member = line({0.0, 1.0, 3.0}, {0.2, 0.5, 0.3});
    const auto one = admm_centroid(member_list(std::vector{member}), member, nullptr, {});
    CHECK(one.centroid.objective <= 1e-6);

    const std::vector<DiscreteDistribution> masses{line({0.0}, {1.0}), line({2.0}, {1.0})};
    const auto mid = admm_centroid(member_list(masses), line({5.0}, {1.0}), nullptr, {});
    CHECK(mid.centroid.distribution.support(0, 0) == doctest::Approx(1.0));
    CHECK(mid.centroid.objective == doctest::Approx(1.0));
  }

  TEST_CASE("ADMM lands within 10% of the joint LP on random 1-D suites") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 5; ++t) {
      const auto data = random_members(rng, 10, 1, 3, 6);
      const auto members = member_list(data);
      const auto init = d2test::random_dist(rng, 4, 1);
      AdmmParams ap;
      ap.outer_iters = 20;
      ap.t_admm = 100;
      const double a = admm_centroid(members, init, nullptr, ap).centroid.objective;
      const double lp = fulllp_centroid(members, init).centroid.objective;
      CHECK(std::abs(a - lp) <= 0.10 * lp);
    }
  }

  TEST_CASE("subgradient primitives") {
    const auto g = projected_subgradient(Eigen::Vector3d(1.0, 2.0, 3.0));
    CHECK((g - Eigen::Vector3d(-5.0, -4.0, -3.0)).norm() <= 1e-15);
    const auto gs = softmax_gradient(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1.0, 0.0));
    CHECK(gs[0] == doctest::Approx(0.25));
    CHECK(gs[1] == doctest::Approx(-0.25));
    CHECK(subgradient_step(Eigen::Vector2d::Zero(), 0.5, 10.0) == 0.0);
    CHECK(subgradient_step(Eigen::Vector2d(3.0, 4.0), 0.5, 10.0) == doctest::Approx(0.1));
    CHECK(subgradient_step(Eigen::Vector2d(3e-3, 4e-3), 0.5, 10.0) == doctest::Approx(10.0));
  }

  TEST_CASE("LP-dual subgradient matches central finite differences") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      const auto data = random_members(rng, 4, 2, 3, 5);
      const auto members = member_list(data);
      const auto c = d2test::random_dist(rng, 4, 2);
      Eigen::VectorXd v(4);
      for (int i = 0; i < 4; ++i) v[i] = n(rng);
      v.array() -= v.mean();
      v /= v.norm();
      const double h = 1e-7;
      auto shifted = c;
      shifted.weights = c.weights + h * v;
      const double up = fixed_support_objective(shifted, members);
      shifted.weights = c.weights - h * v;
      const double down = fixed_support_objective(shifted, members);
      const double fd = (up - down) / (2.0 * h);
      CHECK(std::abs(fd - mean_subgradient(c, members).dot(v)) <= 1e-4);
    }
  }

  TEST_CASE("a subgradient step cannot improve on the fixed-support LP optimum") {
    std::mt19937_64 rng(6);
    int checked = 0;
    for (int t = 0; t < 200 && checked < 10; ++t) {
      const auto data = random_members(rng, 5, 2, 3, 5);
      const auto members = member_list(data);
      FullLpParams fp;
      fp.relocate_support = false;
      const auto opt = fulllp_centroid(members, d2test::random_dist(rng, 3, 2), fp).centroid;
      if (opt.distribution.weights.minCoeff() <= 1e-6) continue;
      ++checked;
      SubgradParams sp;
      sp.iters = 1;
      sp.relocate_support = false;
      const auto step = subgrad_centroid(members, opt.distribution, sp);
      CHECK(step.centroid.objective >= opt.objective - 1e-6);
    }
    CHECK(checked == 10);
  }

  TEST_CASE("subgradient descent degenerate parameters") {
    std::mt19937_64 rng(7);
    const auto data = random_members(rng, 6, 2, 2, 5);
    const auto members = member_list(data);
    const auto init = d2test::random_dist(rng, 3, 2);
    SubgradParams frozen;
    frozen.zeta = 0.0;
    frozen.iters = 5;
    const auto f = subgrad_centroid(members, init, frozen);
    CHECK((f.centroid.distribution.weights - init.weights).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((f.centroid.distribution.support - init.support).norm() > 1e-6);

    const std::vector<DiscreteDistribution> masses{line({0.0}, {1.0}), line({2.0}, {1.0})};
    const auto mid = subgrad_centroid(member_list(masses), line({5.0}, {1.0}), {});
    CHECK(mid.centroid.distribution.weights[0] == 1.0);
    CHECK(mid.centroid.distribution.support(0, 0) == doctest::Approx(1.0));
    CHECK(mid.centroid.objective == doctest::Approx(1.0));
  }

  TEST_CASE("IBP recovers a single well-separated member") {
    const auto member = line({0.0, 10.0, 25.0}, {0.2, 0.5, 0.3});
    IbpParams p;
    p.epsilon0 = 0.01;
    const auto r = ibp_centroid(member_list(std::vector{member}), member, p);
    CHECK((r.centroid.distribution.weights - member.weights).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(r.centroid.objective <= 1e-6);
  }

  TEST_CASE("IBP with a very large regularization is worse than B-ADMM") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 5; ++t) {
      const auto data = random_members(rng, 8, 2, 3, 6);
      const auto members = member_list(data);
      const auto init = d2test::random_dist(rng, 4, 2);
      IbpParams p;
      p.epsilon0 = 1e3;
      const auto ibp = ibp_centroid(members, init, p);
      CHECK((ibp.centroid.distribution.weights.array() - 0.25).abs().maxCoeff() <= 0.01);
      BadmmParams b;
      b.relocate_support = false;
      b.inner_iters = 500;
      const double badmm = badmm_centroid(members, init, nullptr, b).centroid.objective;
      CHECK(ibp.centroid.objective > badmm);
    }
  }

  TEST_CASE("IBP variants relocate the support") {
    std::mt19937_64 rng(9);
    const auto data = random_members(rng, 6, 2, 3, 6);
    const auto members = member_list(data);
    const auto init = d2test::random_dist(rng, 3, 2);
    for (auto v : {IbpVariant::relocate_keep, IbpVariant::relocate_restart}) {
      IbpParams p;
      p.variant = v;
      p.iters = 400;
      const auto r = ibp_centroid(members, init, p);
      CHECK(on_simplex(r.centroid.distribution.weights, 1e-9));
      CHECK((r.centroid.distribution.support - init.support).norm() > 1e-3);
      CHECK(r.centroid.objective < centroid_objective(init, members));
    }
    IbpParams fixed;
    fixed.iters = 400;
    const auto r = ibp_centroid(members, init, fixed);
    CHECK(r.centroid.distribution.support == init.support);
  }

  TEST_CASE("IBP reports kernel underflow as a typed overflow") {
    std::mt19937_64 rng(10);
    auto data = random_members(rng, 5, 2, 3, 6);
    data.push_back(d2test::random_dist(rng, 4, 2, 100.0));
    const auto members = member_list(data);
    const auto init = d2test::random_dist(rng, 3, 2);
    IbpParams p;
    p.iters = 200;
    p.epsilon0 = 0.5;
    CHECK_NOTHROW(ibp_centroid(members, init, p));
    p.epsilon0 = 1e-3;
    try {
      (void)ibp_centroid(members, init, p);
      FAIL("expected NumericOverflow");
    } catch (const NumericOverflow& e) {
      CHECK(e.iteration() >= 0);
      CHECK(e.kind() == "numeric_overflow");
    }
    p.epsilon0 = 0.0;
    CHECK_THROWS_AS(ibp_centroid(members, init, p), InputError);
  }

  TEST_CASE("joint LP examples") {
    const auto member = line({0.0, 1.0, 3.0}, {0.2, 0.5, 0.3});
    const auto one = fulllp_centroid(member_list(std::vector{member}), line({4.0, 5.0, 6.0}, {0.3, 0.3, 0.4}));
    CHECK(one.centroid.objective <= 1e-12);

    const std::vector<DiscreteDistribution> masses{line({0.0}, {1.0}), line({2.0}, {1.0})};
    const auto mid = fulllp_centroid(member_list(masses), line({5.0}, {1.0}));
    CHECK(mid.centroid.distribution.support(0, 0) == doctest::Approx(1.0));
    CHECK(mid.centroid.objective == doctest::Approx(1.0));
  }

  TEST_CASE("joint LP enforces its scale guard") {
    std::mt19937_64 rng(11);
    const auto many = random_members(rng, kFullLpMaxMembers + 1, 1, 2, 3);
    CHECK_THROWS_AS(fulllp_centroid(member_list(many), d2test::random_dist(rng, 2, 1)), InputError);
    const auto few = random_members(rng, 3, 1, 2, 3);
    CHECK_THROWS_AS(fulllp_centroid(member_list(few), d2test::random_dist(rng, kFullLpMaxSupport + 1, 1)),
                    InputError);
    const auto wide = random_members(rng, 3, 1, kFullLpMaxSupport + 1, kFullLpMaxSupport + 1);
    CHECK_THROWS_AS(fulllp_centroid(member_list(wide), d2test::random_dist(rng, 2, 1)), InputError);
    FullLpParams zero;
    zero.outer_iters = 0;
    CHECK_THROWS_AS(fulllp_centroid(member_list(few), d2test::random_dist(rng, 2, 1), zero), InputError);
  }

  TEST_CASE("joint LP dominates B-ADMM at fixed support") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 20; ++t) {
      const auto data = random_members(rng, 8, 2, 3, 6);
      const auto members = member_list(data);
      const auto init = d2test::random_dist(rng, 4, 2);
      FullLpParams fp;
      fp.relocate_support = false;
      BadmmParams bp;
      bp.relocate_support = false;
      const double lp = fulllp_centroid(members, init, fp).centroid.objective;
      const double b = badmm_centroid(members, init, nullptr, bp).centroid.objective;
      CHECK(lp <= b + 1e-9);
    }
  }

  TEST_CASE("joint LP weights match a generic LP over the same support") {
    std::mt19937_64 rng(13);
    const auto data = random_members(rng, 3, 2, 2, 3);
    const auto members = member_list(data);
    const auto init = d2test::random_dist(rng, 2, 2);
    const auto step = solve_joint_lp(member_costs(init, members), members);
    CHECK(on_simplex(step.w, 1e-9));
    double sum = 0.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      CHECK((step.couplings[k].rowwise().sum() - step.w).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((step.couplings[k].colwise().sum().transpose() - members[k]->weights).cwiseAbs().maxCoeff() <= 1e-9);
      sum += d2test::lp_transport_cost(cost_matrix(init, *members[k]), step.w, members[k]->weights);
    }
    CHECK(step.cost == doctest::Approx(sum).epsilon(1e-9));
    auto c = init;
    c.weights = step.w;
    for (double a = 0.0; a <= 1.0; a += 0.05) {
      c.weights = Eigen::Vector2d(a, 1.0 - a);
      CHECK(fixed_support_objective(c, members) * 3.0 >= step.cost - 1e-9);
    }
  }
}
