#include "setprice/markets.hpp"

#include <doctest.h>

#include <random>

using namespace setprice;

namespace {

Market stock_market() {
  FrictionlessMarket f;
  f.S0 = Eigen::Vector2d(4, 6);
  f.ST.resize(4, 2);
  f.ST << 10, 8, 10, 4, 2, 8, 2, 4;
  f.traded = {0};
  return Market::frictionless(f, 4);
}

ConicalMarket two_currency_tree() {
  ConicalMarket c;
  c.d = 2;
  c.nodes.resize(3);
  c.nodes[0].cone_generators = {Eigen::Vector2d(1, -0.9), Eigen::Vector2d(-0.9, 1)};
  c.nodes[0].children = {1, 2};
  c.nodes[1].cone_generators = {Eigen::Vector2d(2, -1), Eigen::Vector2d(-1.9, 1)};
  c.nodes[1].outcome = 0;
  c.nodes[2].cone_generators = {Eigen::Vector2d(1, -2), Eigen::Vector2d(-1, 2.1)};
  c.nodes[2].outcome = 1;
  return c;
}

Eigen::MatrixXd constant_table(int outcomes, const Eigen::VectorXd& r) {
  return Eigen::VectorXd::Ones(outcomes) * r.transpose();
}

}  // namespace

TEST_SUITE("markets") {
  TEST_CASE("frictionless wealth table") {
    const Market m = stock_market();
    CHECK(m.dim() == 1);
    CHECK(m.initial_cone().is_orthant());
    const WealthBlock b = m.feasible_block(Eigen::VectorXd::Constant(1, 10.0));
    CHECK(b.decisions() == 1 + 4);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(5);
    z[0] = 2.0;  // two units of the stock
    z[3] = 0.5;  // throw away 0.5 in the third outcome
    const Eigen::MatrixXd w = b.wealth(z);
    CHECK(w(0, 0) == doctest::Approx(10 + 2 * 6));
    CHECK(w(2, 0) == doctest::Approx(10 - 2 * 2 - 0.5));
  }

  TEST_CASE("frictionless membership residual") {
    const Market m = stock_market();
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 10.0);
    Eigen::MatrixXd hedged(4, 1);
    hedged << 10 + 6 * 1.5, 10 + 6 * 1.5, 10 - 2 * 1.5, 10 - 2 * 1.5 - 1;
    CHECK(membership_residual(m, x, hedged) <= 1e-8);
    CHECK(membership_residual(m, x, constant_table(4, Eigen::VectorXd::Constant(1, 9.0))) <= 1e-8);
    // one unit of sure profit: min over a of max(1 - 6a, 1 + 2a) = 1
    CHECK(membership_residual(m, x, constant_table(4, Eigen::VectorXd::Constant(1, 11.0))) ==
          doctest::Approx(1.0).epsilon(1e-7));
    CHECK_THROWS_AS(membership_residual(m, x, Eigen::MatrixXd::Zero(3, 1)), DimensionError);
  }

  TEST_CASE("frictionless validation") {
    FrictionlessMarket f;
    f.S0 = Eigen::Vector2d(4, 6);
    f.ST = Eigen::MatrixXd::Ones(4, 2);
    f.traded = {2};
    CHECK_THROWS(Market::frictionless(f, 4));
    f.traded = {0};
    CHECK_THROWS(Market::frictionless(f, 3));
  }

  TEST_CASE("tree structure") {
    const ConicalMarket c = two_currency_tree();
    CHECK_NOTHROW(c.validate(2));
    CHECK(c.horizon() == 1);
    const auto paths = c.paths(2);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0] == std::vector<int>{0, 1});
    CHECK(paths[1] == std::vector<int>{0, 2});
    CHECK(c.solvency_cone(0).contains(Eigen::Vector2d(1, -0.9)));
    CHECK_FALSE(c.solvency_cone(0).contains(Eigen::Vector2d(1, -1)));
  }

  TEST_CASE("tree validation") {
    SUBCASE("leaf without outcome") {
      ConicalMarket c = two_currency_tree();
      c.nodes[2].outcome = -1;
      CHECK_THROWS(c.validate(2));
    }
    SUBCASE("child out of range") {
      ConicalMarket c = two_currency_tree();
      c.nodes[0].children = {1, 5};
      CHECK_THROWS(c.validate(2));
    }
    SUBCASE("cone missing a positive direction") {
      ConicalMarket c = two_currency_tree();
      c.nodes[1].cone_generators = {Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1)};
      CHECK_THROWS(c.validate(2));
    }
    SUBCASE("outcome covered twice") {
      ConicalMarket c = two_currency_tree();
      c.nodes[2].outcome = 0;
      CHECK_THROWS(c.validate(2));
    }
  }

  TEST_CASE("conical membership") {
    const Market m = Market::conical(two_currency_tree(), 2);
    CHECK(m.dim() == 2);
    const Eigen::Vector2d x(0.3, -0.1);
    // exchange 1 of currency 0 into 0.9 of currency 1 at time zero
    const Eigen::Vector2d traded = x - Eigen::Vector2d(1, -0.9);
    CHECK(membership_residual(m, x, constant_table(2, traded)) <= 1e-8);
    CHECK(membership_residual(m, x, constant_table(2, x)) <= 1e-8);
    CHECK(membership_residual(m, x, constant_table(2, x + Eigen::Vector2d(0.01, 0.01))) > 1e-4);
    const WealthBlock b = m.feasible_block(x);
    CHECK(b.decisions() == 6);
    CHECK((b.lower.array() == 0.0).all());
  }

  TEST_CASE("A(x) grows with the endowment") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Market m = Market::conical(two_currency_tree(), 2);
    for (int i = 0; i < 10; ++i) {
      const Eigen::Vector2d x(u(rng) - 0.5, u(rng) - 0.5);
      const WealthBlock b = m.feasible_block(x);
      Eigen::VectorXd z(b.decisions());
      for (int j = 0; j < z.size(); ++j) z[j] = u(rng);
      const Eigen::MatrixXd v = b.wealth(z);
      CHECK(membership_residual(m, x, v) <= 1e-8);
      CHECK(membership_residual(m, x + Eigen::Vector2d(u(rng), u(rng)), v) <= 1e-8);
      // translation: A(x + r) = A(x) + r
      const Eigen::Vector2d r(u(rng) - 0.5, u(rng) - 0.5);
      CHECK(membership_residual(m, x + r, v + constant_table(2, r)) <= 1e-8);
    }
  }

  TEST_CASE("assumption probes pass on both market kinds") {
    const AssumptionReport a = assumption_probe(stock_market(), 5);
    const AssumptionReport b = assumption_probe(Market::conical(two_currency_tree(), 2), 5);
    CHECK(a.passed());
    CHECK(b.passed());
    CHECK_FALSE(b.items.empty());
  }
}
