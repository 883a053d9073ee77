#include "setprice/core.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace setprice;

TEST_SUITE("core") {
  TEST_CASE("probability space validates its weights") {
    CHECK_NOTHROW(ProbabilitySpace({"a", "b"}, Eigen::Vector2d(0.3, 0.7)));
    CHECK_THROWS(ProbabilitySpace({"a", "b"}, Eigen::Vector2d(0.3, 0.6)));
    CHECK_THROWS(ProbabilitySpace({"a", "b"}, Eigen::Vector2d(1.2, -0.2)));
    CHECK_THROWS(ProbabilitySpace({"a"}, Eigen::Vector2d(0.5, 0.5)));
    const auto u = ProbabilitySpace::uniform(4);
    CHECK(u.size() == 4);
    CHECK(u.probs().sum() == doctest::Approx(1.0));
    CHECK(u.index_of(u.labels()[2]) == 2);
  }

  TEST_CASE("priors may put zero weight on outcomes") {
    CHECK_NOTHROW(validate_prior(Eigen::Vector3d(0.0, 0.5, 0.5), 3));
    CHECK_THROWS(validate_prior(Eigen::Vector3d(0.0, 0.5, 0.6), 3));
    CHECK_THROWS_AS(validate_prior(Eigen::Vector2d(0.5, 0.5), 3), DimensionError);
  }

  TEST_CASE("scalar utilities against their formulas") {
    const double x = 0.7;
    CHECK(ScalarUtility::exponential(2.0).value(x).value() == doctest::Approx(1 - std::exp(-1.4)));
    CHECK(ScalarUtility::shifted_log(3.0).value(x).value() == doctest::Approx(std::log((x + 3) / 3)));
    CHECK(ScalarUtility::linear().value(x).value() == doctest::Approx(x));
    CHECK(ScalarUtility::power(0.5, 1.0).value(x).value() == doctest::Approx((std::sqrt(1.7) - 1) / 0.5));
  }

  TEST_CASE("values outside the domain are minus infinity") {
    CHECK_FALSE(ScalarUtility::shifted_log(1.0).value(-1.0).is_finite());
    CHECK_FALSE(ScalarUtility::exponential(1.0, 0.0).value(-0.1).is_finite());
    CHECK(ScalarUtility::exponential(1.0, 0.0).value(0.0).is_finite());
    CHECK(ScalarUtility::shifted_log(1.0).value(-2.0).value() == -INFINITY);
  }

  TEST_CASE("inverse undoes the utility on its range") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> xs(-0.5, 5.0);
    const std::vector<ScalarUtility> us = {ScalarUtility::exponential(0.6), ScalarUtility::shifted_log(2.0),
                                           ScalarUtility::linear(), ScalarUtility::power(0.3, 1.0)};
    for (const auto& u : us)
      for (int i = 0; i < 20; ++i) {
        const double x = xs(rng);
        const auto back = u.inverse(u.value(x).value());
        REQUIRE(back.has_value());
        CHECK(*back == doctest::Approx(x).epsilon(1e-10));
      }
    CHECK_FALSE(ScalarUtility::exponential(1.0).inverse(1.0).has_value());
  }

  TEST_CASE("offset plus shifted value is the value") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> xs(0.1, 30.0);
    const auto add = UtilityFunction::additive({ScalarUtility::exponential(1.0), ScalarUtility::shifted_log(1.0)},
                                               {0.4, 0.6});
    for (int i = 0; i < 20; ++i) {
      const Eigen::Vector2d x(xs(rng), xs(rng));
      CHECK(add.offset() + add.shifted_value(x).value() == doctest::Approx(add.value(x).value()).epsilon(1e-14));
    }
  }

  TEST_CASE("compositions") {
    const auto g = ScalarUtility::exponential(1.0);
    const auto comp = UtilityFunction::component(3, 2, g);
    CHECK(comp.dim() == 3);
    CHECK(comp.value(Eigen::Vector3d(9, 9, 0.5)).value() == doctest::Approx(g.value(0.5).value()));
    const auto add = UtilityFunction::additive({g, ScalarUtility::linear()}, {0.25, 0.75});
    CHECK(add.value(Eigen::Vector2d(1, 2)).value() == doctest::Approx(0.25 * g.value(1).value() + 1.5));
    CHECK_THROWS(UtilityFunction::additive({g}, {0.5, 0.5}));
    CHECK_THROWS(UtilityFunction::component(2, 2, g));
  }

  TEST_CASE("analytic derivatives match central differences") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> xs(0.2, 3.0);
    const auto u = UtilityFunction::additive(
        {ScalarUtility::exponential(0.9), ScalarUtility::shifted_log(0.5), ScalarUtility::power(0.4, 0.2)},
        {0.2, 0.5, 0.3});
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Vector3d x(xs(rng), xs(rng), xs(rng));
      const GradHess gh = utility_grad_hess(u, x);
      for (int i = 0; i < 3; ++i) {
        const double h = 1e-5;
        Eigen::Vector3d up = x, dn = x;
        up[i] += h;
        dn[i] -= h;
        const double fd = (u.value(up).value() - u.value(dn).value()) / (2 * h);
        CHECK(fd == doctest::Approx(gh.gradient[i]).epsilon(1e-7));
        const Eigen::VectorXd fdh = (utility_grad_hess(u, up).gradient - utility_grad_hess(u, dn).gradient) / (2 * h);
        for (int j = 0; j < 3; ++j) CHECK(fdh[j] == doctest::Approx(gh.hessian(j, i)).epsilon(1e-6).scale(1e-3));
      }
    }
    CHECK_THROWS(utility_grad_hess(UtilityFunction::univariate(ScalarUtility::shifted_log(1.0)),
                                   Eigen::VectorXd::Constant(1, -1.0)));
  }

  TEST_CASE("expected utility and the vector functional") {
    const Eigen::Vector2d p(0.25, 0.75);
    const Eigen::MatrixXd vals = (Eigen::MatrixXd(2, 1) << 1.0, 3.0).finished();
    const RandomVector z(vals);
    const auto u = UtilityFunction::univariate(ScalarUtility::linear());
    CHECK(expected_utility(u, p, z).value() == doctest::Approx(2.5));

    const auto lg = UtilityFunction::univariate(ScalarUtility::shifted_log(1.0));
    const PreferenceRepresentation pref({u, lg}, {p, Eigen::Vector2d(1.0, 0.0)});
    CHECK(pref.q() == 4);
    const Eigen::VectorXd v = vector_utility(pref, z);
    // prior-major: (Q1 u1, Q1 u2, Q2 u1, Q2 u2)
    CHECK(v[0] == doctest::Approx(2.5));
    CHECK(v[1] == doctest::Approx(0.25 * std::log(2.0) + 0.75 * std::log(4.0)));
    CHECK(v[2] == doctest::Approx(1.0));
    CHECK(v[3] == doctest::Approx(std::log(2.0)));
    CHECK(pref.component(1, 0) == 2);

    const RandomVector bad((Eigen::MatrixXd(2, 1) << -2.0, 3.0).finished());
    CHECK_FALSE(expected_utility(lg, p, bad).is_finite());
  }

  TEST_CASE("preference comparisons") {
    const Eigen::Vector2d p(0.5, 0.5);
    const PreferenceRepresentation pref({UtilityFunction::univariate(ScalarUtility::linear()),
                                         UtilityFunction::univariate(ScalarUtility::exponential(1.0))},
                                        {p});
    const RandomVector a((Eigen::MatrixXd(2, 1) << 1.0, 1.0).finished());
    const RandomVector b((Eigen::MatrixXd(2, 1) << 2.0, 2.0).finished());
    const RandomVector risky((Eigen::MatrixXd(2, 1) << -0.9, 3.0).finished());
    CHECK(prefers(pref, b, a) == Preference::y_preferred);
    CHECK(prefers(pref, a, b) == Preference::z_preferred);
    CHECK(prefers(pref, a, a) == Preference::indifferent);
    // higher mean, lower exponential utility
    CHECK(prefers(pref, risky, a) == Preference::incomparable);
  }

  TEST_CASE("random vectors") {
    const RandomVector c = RandomVector::constant(3, Eigen::Vector2d(1, 2));
    CHECK(c.outcomes() == 3);
    CHECK(c.dim() == 2);
    CHECK((c + 1.0).at(2)[1] == doctest::Approx(3.0));
    CHECK((-c).at(0)[0] == doctest::Approx(-1.0));
    CHECK_THROWS_AS(c + RandomVector::constant(2, Eigen::Vector2d(1, 2)), DimensionError);
  }
}
