#include "setprice/polytope.hpp"
#include "setprice/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace setprice;

namespace {

ConvexProgram nonneg(int n) {
  ConvexProgram p(n);
  p.lower = Eigen::VectorXd::Zero(n);
  return p;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("small linear program") {
    ConvexProgram p = nonneg(2);
    p.cost = Eigen::Vector2d(1, 1);
    p.add_inequality(Eigen::Vector2d(1, 2), 2.0);
    const SolveReport r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.kkt_residual() <= 1e-8);
  }

  TEST_CASE("random linear programs agree with vertex enumeration") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 15; ++t) {
      const int n = 2 + t % 2;
      ConvexProgram p(n);
      p.lower = Eigen::VectorXd::Constant(n, -3.0);
      p.upper = Eigen::VectorXd::Constant(n, 3.0);
      std::vector<Halfspace> hs;
      for (int j = 0; j < n; ++j) {
        hs.push_back({Eigen::VectorXd::Unit(n, j), -3.0});
        hs.push_back({-Eigen::VectorXd::Unit(n, j), -3.0});
      }
      for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd a(n);
        for (int j = 0; j < n; ++j) a[j] = u(rng);
        const double b = -0.5 - std::abs(u(rng));  // origin stays feasible
        p.add_inequality(a, b);
        hs.push_back({a, b});
      }
      p.cost = Eigen::VectorXd(n);
      for (int j = 0; j < n; ++j) p.cost[j] = u(rng);

      const Polyhedron feasible = dd_convert(Polyhedron::from_halfspaces(n, hs));
      double best = INFINITY;
      for (const auto& v : feasible.vertices()) best = std::min(best, p.cost.dot(v));

      const SolveReport r = solve(p);
      REQUIRE(r.status == SolveStatus::optimal);
      CHECK(r.objective == doctest::Approx(best).epsilon(1e-7).scale(1.0));
      CHECK(r.kkt_residual() <= 1e-8);
    }
  }

  TEST_CASE("equality constraints") {
    ConvexProgram p = nonneg(2);
    p.cost = Eigen::Vector2d(1, 1);
    p.add_equality(Eigen::Vector2d(1, -1), 1.0);
    const SolveReport r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(r.x[1] == doctest::Approx(0.0).scale(1e-6));
  }

  TEST_CASE("disc constraint") {
    // max x0 on the unit disc
    ConvexProgram p(2);
    p.cost = Eigen::Vector2d(-1, 0);
    QuadraticConstraint q;
    q.linear = Eigen::Vector2d::Zero();
    q.constant = 1.0;
    q.D = Eigen::Matrix2d::Identity();
    q.e = Eigen::Vector2d::Zero();
    p.add_quadratic(q);
    const SolveReport r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(std::abs(r.x[1]) < 1e-5);
  }

  TEST_CASE("utility constraint") {
    // min x subject to log(1 + x) >= 1
    ConvexProgram p(1);
    p.cost = Eigen::VectorXd::Constant(1, 1.0);
    UtilityExpr e = UtilityExpr::affine(Eigen::VectorXd::Zero(1), -1.0);
    e.terms.push_back({1.0, UtilityFunction::univariate(ScalarUtility::shifted_log(1.0)),
                       Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)});
    p.add_concave(e);
    const SolveReport r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x[0] == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-8));
    CHECK(r.kkt_residual() <= 1e-8);

    SUBCASE("a start guess does not change the answer") {
      p.start = Eigen::VectorXd::Constant(1, 50.0);
      const SolveReport s = solve(p);
      REQUIRE(s.status == SolveStatus::optimal);
      CHECK(s.x[0] == doctest::Approx(r.x[0]).epsilon(1e-8));
    }
  }

  TEST_CASE("exponential utility objective") {
    // max 1 - e^{-x} - 0.5 x over x >= 0: x = log 2
    ConvexProgram p = nonneg(2);
    p.cost = Eigen::Vector2d(0.5, -1.0);
    UtilityExpr e = UtilityExpr::affine(Eigen::Vector2d(0, -1), 0.0);
    Eigen::MatrixXd A(1, 2);
    A << 1, 0;
    e.terms.push_back({1.0, UtilityFunction::univariate(ScalarUtility::exponential(1.0)), A, Eigen::VectorXd::Zero(1)});
    p.add_concave(e);
    p.lower[1] = -10;
    const SolveReport r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x[0] == doctest::Approx(std::log(2.0)).epsilon(1e-7));
    CHECK(r.x[1] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(r.objective == doctest::Approx(0.5 * std::log(2.0) - 0.5).epsilon(1e-8));
  }

  TEST_CASE("expression values and derivatives") {
    UtilityExpr e = UtilityExpr::affine(Eigen::Vector2d(1, 0), 0.5);
    Eigen::MatrixXd A(1, 2);
    A << 1, 1;
    e.terms.push_back({2.0, UtilityFunction::univariate(ScalarUtility::shifted_log(1.0)), A, Eigen::VectorXd::Zero(1)});
    const Eigen::Vector2d z(0.3, 0.4);
    CHECK(e.value(z) == doctest::Approx(0.3 + 0.5 + 2 * std::log(1.7)));
    CHECK(std::isnan(e.value(Eigen::Vector2d(-2, 0))));
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    e.derivatives(z, g, h);
    CHECK(g[0] == doctest::Approx(1 + 2 / 1.7));
    CHECK(g[1] == doctest::Approx(2 / 1.7));
    CHECK(h(0, 1) == doctest::Approx(-2 / (1.7 * 1.7)));
    CHECK(e.scaled(-1).value(z) == doctest::Approx(-e.value(z)));
  }

  TEST_CASE("infeasible and unbounded programs") {
    ConvexProgram p = nonneg(1);
    p.cost = Eigen::VectorXd::Constant(1, 1.0);
    p.add_inequality(Eigen::VectorXd::Constant(1, -1.0), 1.0);  // x <= -1
    CHECK(solve(p).status == SolveStatus::infeasible);

    ConvexProgram q = nonneg(1);
    q.cost = Eigen::VectorXd::Constant(1, -1.0);
    CHECK(solve(q).status == SolveStatus::unbounded);
  }

  TEST_CASE("validation") {
    ConvexProgram p(2);
    p.cost = Eigen::Vector3d(1, 1, 1);
    CHECK_THROWS(p.validate());
    ConvexProgram q(2);
    q.cost = Eigen::Vector2d(1, 1);
    q.lower = Eigen::Vector2d(1, 0);
    q.upper = Eigen::Vector2d(0, 1);
    CHECK_THROWS(solve(q));
    CHECK(std::string(to_string(SolveStatus::optimal)) == "optimal");
  }

  TEST_CASE("extend appends free variables") {
    ConvexProgram p = nonneg(1);
    p.cost = Eigen::VectorXd::Constant(1, 1.0);
    p.add_inequality(Eigen::VectorXd::Constant(1, 1.0), 2.0);
    p.extend(1);
    CHECK(p.n() == 2);
    p.cost[1] = 1.0;
    p.lower[1] = 3.0;
    const SolveReport r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.objective == doctest::Approx(5.0).epsilon(1e-8));
  }
}
