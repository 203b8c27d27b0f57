#include "support.hpp"

#include "d2/badmm.hpp"
#include "d2/errors.hpp"
#include "d2/fulllp.hpp"
#include "d2/simplex.hpp"
#include "d2/transport.hpp"

#include <doctest.h>

#include <cmath>

using namespace d2;
using d2test::line;

namespace {

std::vector<DiscreteDistribution> random_members(std::mt19937_64& rng, int n, int d, int lo, int hi) {
  std::uniform_int_distribution<int> size(lo, hi);
  std::vector<DiscreteDistribution> out;
  for (int k = 0; k < n; ++k) out.push_back(d2test::random_dist(rng, size(rng), d));
  return out;
}

}  // namespace

TEST_SUITE("badmm") {
  TEST_CASE("rho scales the average transport cost") {
    std::vector<Eigen::MatrixXd> zero{Eigen::MatrixXd::Zero(2, 3)};
    CHECK(rho_from_costs(zero, 2.0) == 0.0);
    std::vector<Eigen::MatrixXd> single{Eigen::MatrixXd::Constant(1, 1, 4.0)};
    CHECK(rho_from_costs(single, 2.0) == doctest::Approx(8.0));
    std::vector<Eigen::MatrixXd> ones{Eigen::MatrixXd::Ones(3, 2), Eigen::MatrixXd::Ones(3, 5)};
    CHECK(rho_from_costs(ones, 1.7) == doctest::Approx(1.7));
    CHECK_THROWS_AS(rho_from_costs(std::vector<Eigen::MatrixXd>{}, 2.0), InputError);
  }

  TEST_CASE("rho from distributions agrees with a direct summation") {
    std::mt19937_64 rng(3);
    const auto data = random_members(rng, 4, 2, 2, 5);
    const auto centroid = d2test::random_dist(rng, 3, 2);
    double sum = 0.0, entries = 0.0;
    for (const auto& p : data)
      for (int i = 0; i < centroid.size(); ++i)
        for (int j = 0; j < p.size(); ++j) {
          sum += (centroid.support.col(i) - p.support.col(j)).squaredNorm();
          entries += 1.0;
        }
    CHECK(rho_from_costs(member_list(data), centroid, 2.0) == doctest::Approx(2.0 * sum / entries));
  }

  TEST_CASE("support update examples") {
    std::mt19937_64 rng(5);
    const auto p = d2test::random_dist(rng, 4, 3);
    const std::vector<DiscreteDistribution> one{p};
    const auto same = update_support(p, member_list(one), {Eigen::MatrixXd(p.weights.asDiagonal())});
    CHECK((same.support - p.support).cwiseAbs().maxCoeff() < 1e-14);

    const auto data = random_members(rng, 3, 2, 2, 4);
    const auto members = member_list(data);
    DiscreteDistribution c = line({0.0}, {1.0});
    c.support = Eigen::MatrixXd::Zero(2, 1);
    std::vector<Eigen::MatrixXd> plans;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& q : data) {
      plans.push_back(q.weights.transpose());
      mean += q.support * q.weights;
    }
    const auto moved = update_support(c, members, plans);
    CHECK((moved.support.col(0) - mean / 3.0).norm() < 1e-12);
  }

  TEST_CASE("support update matches an explicit summation with hand-built couplings") {
    const auto a = line({0.0, 4.0}, {0.5, 0.5});
    const auto b = line({1.0, 3.0}, {0.25, 0.75});
    const std::vector<DiscreteDistribution> data{a, b};
    const auto c = line({0.0, 0.0}, {0.4, 0.6});
    Eigen::MatrixXd pa(2, 2), pb(2, 2);
    pa << 0.3, 0.1, 0.2, 0.4;
    pb << 0.25, 0.15, 0.0, 0.6;
    const auto moved = update_support(c, member_list(data), {pa, pb});
    const double x0 = (0.3 * 0 + 0.1 * 4 + 0.25 * 1 + 0.15 * 3) / (2 * 0.4);
    const double x1 = (0.2 * 0 + 0.4 * 4 + 0.0 * 1 + 0.6 * 3) / (2 * 0.6);
    CHECK(moved.support(0, 0) == doctest::Approx(x0));
    CHECK(moved.support(0, 1) == doctest::Approx(x1));
    CHECK(moved.weights == c.weights);
  }

  TEST_CASE("support update leaves zero-weight points and symbolic centroids alone") {
    const auto a = line({1.0, 3.0}, {0.5, 0.5});
    const std::vector<DiscreteDistribution> data{a};
    const auto c = line({7.0, 0.0}, {0.0, 1.0});
    Eigen::MatrixXd p(2, 2);
    p << 0.0, 0.0, 0.5, 0.5;
    const auto moved = update_support(c, member_list(data), {p});
    CHECK(moved.support(0, 0) == 7.0);
    CHECK(moved.support(0, 1) == doctest::Approx(2.0));

    auto table = std::make_shared<CostTable>(CostTable{"t", Eigen::MatrixXd::Ones(2, 2)});
    const auto s = DiscreteDistribution::from_symbols(Eigen::Vector2d(0.5, 0.5), {0, 1}, table);
    const std::vector<DiscreteDistribution> sym{s};
    CHECK(update_support(s, member_list(sym), {Eigen::MatrixXd(s.weights.asDiagonal())}).symbols ==
          s.symbols);
  }

  TEST_CASE("pi1 update examples") {
    const Eigen::Vector2d wk(0.4, 0.6);
    MemberSplit s;
    s.pi2 = (Eigen::MatrixXd(2, 2) << 0.1, 0.3, 0.2, 0.4).finished();
    s.lambda = Eigen::MatrixXd::Zero(2, 2);
    pi1_update(Eigen::MatrixXd::Zero(2, 2), wk, 1.0, 0.0, s);
    CHECK(s.pi1(0, 0) == doctest::Approx(0.4 * 0.1 / 0.3));
    CHECK(s.pi1(1, 1) == doctest::Approx(0.6 * 0.4 / 0.7));

    MemberSplit row;
    row.pi2 = (Eigen::MatrixXd(1, 3) << 0.2, 0.5, 0.3).finished();
    row.lambda = Eigen::MatrixXd::Constant(1, 3, 0.7);
    const Eigen::Vector3d w3(0.1, 0.2, 0.7);
    pi1_update(Eigen::MatrixXd::Constant(1, 3, 5.0), w3, 0.5, 1e-16, row);
    CHECK((row.pi1.row(0).transpose() - w3).cwiseAbs().maxCoeff() < 1e-15);

    MemberSplit e;
    e.pi2 = Eigen::MatrixXd::Constant(2, 2, 0.25);
    e.lambda = Eigen::MatrixXd::Zero(2, 2);
    const Eigen::MatrixXd c = (Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished();
    pi1_update(c, wk, 1.0, 0.0, e);
    const double q = std::exp(-1.0);
    CHECK(e.pi1(0, 0) == doctest::Approx(0.4 / (1 + q)));
    CHECK(e.pi1(1, 0) == doctest::Approx(0.4 * q / (1 + q)));
    CHECK(e.pi1(0, 1) == doctest::Approx(0.6 * q / (1 + q)));
    CHECK(e.pi1(1, 1) == doctest::Approx(0.6 / (1 + q)));
  }

  TEST_CASE("pi2 update examples") {
    const Eigen::Vector2d w(0.3, 0.7);
    MemberSplit s;
    s.pi1 = (Eigen::MatrixXd(2, 2) << 0.1, 0.3, 0.2, 0.4).finished();
    s.lambda = Eigen::MatrixXd::Zero(2, 2);
    pi2_from_tilde(tilde_pi1(s, 1.0, 0.0), w, s);
    CHECK(s.pi2(0, 0) == doctest::Approx(0.3 * 0.1 / 0.4));
    CHECK(s.pi2(1, 1) == doctest::Approx(0.7 * 0.4 / 0.6));

    MemberSplit col;
    col.pi1 = (Eigen::MatrixXd(2, 1) << 0.9, 0.1).finished();
    col.lambda = Eigen::MatrixXd::Constant(2, 1, -0.3);
    pi2_from_tilde(tilde_pi1(col, 2.0, 1e-16), w, col);
    CHECK((col.pi2.col(0) - w).cwiseAbs().maxCoeff() < 1e-15);

    const double rho = 1.5;
    MemberSplit d;
    d.pi1 = (Eigen::MatrixXd(2, 2) << 0.2, 0.2, 0.3, 0.3).finished();
    d.lambda = Eigen::MatrixXd::Zero(2, 2);
    d.lambda(0, 0) = rho * std::log(2.0);
    pi2_from_tilde(tilde_pi1(d, rho, 0.0), w, d);
    CHECK(d.pi2(0, 0) == doctest::Approx(0.3 * 0.4 / 0.6));
    CHECK(d.pi2(0, 1) == doctest::Approx(0.3 * 0.2 / 0.6));
  }

  TEST_CASE("consensus rules") {
    const Eigen::Vector3d t(0.2, 0.5, 0.3);
    for (auto rule : {ConsensusRule::r1, ConsensusRule::r2}) {
      CHECK((consensus_weights({t}, rule) - t).cwiseAbs().maxCoeff() < 1e-15);
      CHECK((consensus_weights({t, t, t}, rule) - t).cwiseAbs().maxCoeff() < 1e-15);
      const Eigen::VectorXd h = consensus_weights({Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)}, rule);
      CHECK(h[0] == doctest::Approx(0.5));
      CHECK(h[1] == doctest::Approx(0.5));
      CHECK_THROWS_AS(consensus_weights({Eigen::Vector2d(0.5, 0.6)}, rule), InputError);
    }
    const Eigen::VectorXd r2 =
        consensus_weights({Eigen::Vector2d(0.64, 0.36), Eigen::Vector2d(0.04, 0.96)}, ConsensusRule::r2);
    const double b = 0.5 * (0.6 + std::sqrt(0.96));
    CHECK(r2[0] == doctest::Approx(0.25 / (0.25 + b * b)));
  }

  TEST_CASE("dual update accumulates the split residual") {
    MemberSplit s;
    s.pi1 = Eigen::MatrixXd::Constant(2, 3, 0.2);
    s.pi2 = s.pi1;
    s.lambda = Eigen::MatrixXd::Constant(2, 3, 0.4);
    dual_update(s, 3.0);
    CHECK((s.lambda.array() == 0.4).all());
    s.pi1.array() += 1.0;
    dual_update(s, 1.0);
    CHECK((s.lambda.array() - 1.4).abs().maxCoeff() < 1e-15);
    dual_update(s, 2.0);
    CHECK((s.lambda.array() - 3.4).abs().maxCoeff() < 1e-14);
  }

  TEST_CASE("barycenter of one distribution is itself") {
    std::mt19937_64 rng(8);
    const std::vector<DiscreteDistribution> data{d2test::random_dist(rng, 4, 2)};
    BadmmParams p;
    p.inner_iters = 500;
    const auto r = badmm_centroid(member_list(data), data[0], nullptr, p);
    CHECK(r.centroid.objective < 1e-6);
  }

  TEST_CASE("one-point barycenter of two point masses is their midpoint") {
    const std::vector<DiscreteDistribution> data{line({0.0}, {1.0}), line({2.0}, {1.0})};
    const auto r = badmm_centroid(member_list(data), line({5.0}, {1.0}), nullptr, {});
    CHECK(r.centroid.distribution.support(0, 0) == doctest::Approx(1.0));
    CHECK(r.centroid.objective == doctest::Approx(1.0));
  }

  TEST_CASE("random 1-D suites land within 5% of the joint LP") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 5; ++t) {
      const auto data = random_members(rng, 10, 1, 3, 6);
      const auto members = member_list(data);
      const auto init = d2test::random_dist(rng, 4, 1);
      BadmmParams p;
      p.inner_iters = 2000;
      const double b = badmm_centroid(members, init, nullptr, p).centroid.objective;
      const double lp = fulllp_centroid(members, init).centroid.objective;
      CHECK(b <= 1.05 * lp);
    }
  }

  TEST_CASE("marginals and positivity hold after a run") {
    std::mt19937_64 rng(17);
    const auto data = random_members(rng, 6, 3, 2, 7);
    const auto init = d2test::random_dist(rng, 5, 3);
    BadmmParams p;
    p.inner_iters = 37;
    const auto r = badmm_centroid(member_list(data), init, nullptr, p);
    const Eigen::VectorXd& w = r.centroid.distribution.weights;
    CHECK(on_simplex(w, 1e-12));
    for (std::size_t k = 0; k < data.size(); ++k) {
      const auto& s = r.state.members[k];
      CHECK((s.pi1.colwise().sum().transpose() - data[k].weights).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((s.pi2.rowwise().sum() - w).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(s.pi1.minCoeff() > 0.0);
      CHECK(s.pi2.minCoeff() > 0.0);
    }
    CHECK(r.trace.primal.size() == 37);
    CHECK(r.trace.dual.size() == 37);
  }

  TEST_CASE("support relocation rarely increases the exact objective") {
    std::mt19937_64 rng(19);
    int monotone = 0;
    const int trials = 30;
    for (int t = 0; t < trials; ++t) {
      const auto data = random_members(rng, 8, 2, 3, 6);
      BadmmParams p;
      p.track_exact_objective = true;
      const auto r = badmm_centroid(member_list(data), d2test::random_dist(rng, 4, 2), nullptr, p);
      const auto& e = r.trace.exact_objective;
      bool ok = true;
      int relocations = 0;
      for (std::size_t i = 1; i < e.size(); ++i) {
        if (e[i].first != e[i - 1].first) continue;
        ++relocations;
        ok = ok && e[i].second <= e[i - 1].second * (1.0 + 1e-12) + 1e-12;
      }
      CHECK(relocations == 10);
      monotone += ok;
    }
    CHECK(monotone >= (9 * trials + 9) / 10);
  }

  TEST_CASE("results do not depend on the worker count") {
    std::mt19937_64 rng(23);
    const auto data = random_members(rng, 11, 2, 2, 6);
    const auto init = d2test::random_dist(rng, 4, 2);
    WorkerPool pool(3);
    RunControl control;
    control.pool = &pool;
    const auto a = badmm_centroid(member_list(data), init, nullptr, {});
    const auto b = badmm_centroid(member_list(data), init, nullptr, {}, control);
    CHECK(a.centroid.distribution.weights == b.centroid.distribution.weights);
    CHECK(a.centroid.distribution.support == b.centroid.distribution.support);
    CHECK(a.centroid.objective == b.centroid.objective);
  }

  TEST_CASE("invalid starts and vanishing rho are rejected") {
    const std::vector<DiscreteDistribution> data{line({1.0}, {1.0}), line({1.0}, {1.0})};
    CHECK_THROWS_AS(badmm_centroid(member_list(data), line({0.0, 1.0}, {1.0, 0.0}), nullptr, {}),
                    InputError);
    BadmmParams fixed;
    fixed.relocate_support = false;
    CHECK_THROWS_AS(badmm_centroid(member_list(data), line({1.0}, {1.0}), nullptr, fixed),
                    SolverError);
    CHECK_THROWS_AS(badmm_centroid({}, line({1.0}, {1.0}), nullptr, {}), InputError);
  }

  TEST_CASE("an expired deadline returns the initial centroid") {
    std::mt19937_64 rng(29);
    const auto data = random_members(rng, 4, 2, 2, 4);
    const auto init = d2test::random_dist(rng, 3, 2);
    RunControl control;
    control.deadline = Clock::now();
    const auto r = badmm_centroid(member_list(data), init, nullptr, {}, control);
    CHECK(r.info.budget_skipped);
    CHECK(r.centroid.distribution.weights == init.weights);
  }
}
