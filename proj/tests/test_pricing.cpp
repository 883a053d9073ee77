#include "setprice/pricing.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace setprice;

namespace {

const Eigen::VectorXd kOne = Eigen::VectorXd::Constant(1, 1.0);

Market binomial() {
  FrictionlessMarket f;
  f.S0 = Eigen::VectorXd::Ones(1);
  f.ST = Eigen::Vector2d(1.5, 0.7);
  f.traded = {0};
  return Market::frictionless(f, 2);
}
constexpr double kQup = 0.375;  // (1 - 0.7) / (1.5 - 0.7)

Market four_state() {
  FrictionlessMarket f;
  f.S0 = Eigen::Vector2d(4, 6);
  f.ST.resize(4, 2);
  f.ST << 10, 8, 10, 4, 2, 8, 2, 4;
  f.traded = {0};
  return Market::frictionless(f, 4);
}

PreferenceRepresentation exp_agent(double lambda, const Eigen::VectorXd& prior) {
  return PreferenceRepresentation({UtilityFunction::univariate(ScalarUtility::exponential(lambda))}, {prior});
}

RandomVector scalar_claim(std::initializer_list<double> v) {
  Eigen::VectorXd c(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) c[i++] = x;
  return RandomVector(Eigen::MatrixXd(c));
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

}  // namespace

TEST_SUITE("pricing") {
  TEST_CASE("scalar certainty equivalents") {
    const Eigen::Vector2d p(0.3, 0.7);
    const RandomVector z = scalar_claim({1.0, 4.0});
    const PreferenceRepresentation pref(
        {UtilityFunction::univariate(ScalarUtility::exponential(1.0)),
         UtilityFunction::univariate(ScalarUtility::shifted_log(2.0))},
        {p});
    const double ce_exp = -std::log(0.3 * std::exp(-1.0) + 0.7 * std::exp(-4.0));
    const double ce_log = std::exp(0.3 * std::log(3.0) + 0.7 * std::log(6.0)) - 2.0;

    const CeResult r = ce_regions(pref, z);
    REQUIRE(r.weak);
    REQUIRE(r.strong);
    CHECK(*r.weak == doctest::Approx(std::max(ce_exp, ce_log)).epsilon(1e-10));
    CHECK(*r.strong == doctest::Approx(std::min(ce_exp, ce_log)).epsilon(1e-10));

    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(1, *r.weak + 1e-6);
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(1, *r.strong - 1e-6);
    CHECK(ce_membership(pref, hi, z, CeRegion::upper));
    CHECK_FALSE(ce_membership(pref, lo, z, CeRegion::upper));
    CHECK(ce_membership(pref, lo, z, CeRegion::lower));
    CHECK_FALSE(ce_membership(pref, hi, z, CeRegion::lower));

    const auto up = ce_levels(pref, z, CeRegion::upper);
    REQUIRE(up.size() == 2);
    CHECK(up[0] == doctest::Approx(1 - std::exp(-ce_exp)));
  }

  TEST_CASE("reservation utility in a complete market") {
    // sup E[1 - e^{-V}] over E_Q V = x is 1 - exp(-x - H(Q|P))
    const Eigen::Vector2d p(0.5, 0.5);
    const double entropy = kQup * std::log(kQup / 0.5) + (1 - kQup) * std::log((1 - kQup) / 0.5);
    for (double x : {0.0, 0.7, 2.0}) {
      const double v = reservation_utility(exp_agent(1.0, p), binomial(), Eigen::VectorXd::Constant(1, x));
      CHECK(v == doctest::Approx(1 - std::exp(-x - entropy)).epsilon(1e-9));
    }
  }

  TEST_CASE("hedging intervals match martingale bounds") {
    // Q(up) = 1/4 on the traded stock; the split inside each group is free
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-5.0, 20.0);
    const Market m = four_state();
    for (int t = 0; t < 10; ++t) {
      const double c[4] = {u(rng), u(rng), u(rng), u(rng)};
      const RandomVector claim = scalar_claim({c[0], c[1], c[2], c[3]});
      const double sup = 0.25 * std::max(c[0], c[1]) + 0.75 * std::max(c[2], c[3]);
      const double inf = 0.25 * std::min(c[0], c[1]) + 0.75 * std::min(c[2], c[3]);
      const PriceSet shp = superhedging(m, claim);
      const PriceSet sub = subhedging(m, claim);
      REQUIRE(shp.endpoint);
      REQUIRE(sub.endpoint);
      CHECK(*shp.endpoint == doctest::Approx(sup).epsilon(1e-9));
      CHECK(*sub.endpoint == doctest::Approx(inf).epsilon(1e-9));
    }
  }

  TEST_CASE("indifference price is the replication cost") {
    const RandomVector claim = scalar_claim({3.0, 1.0});
    const double cost = kQup * 3.0 + (1 - kQup) * 1.0;
    const Eigen::Vector2d p(0.4, 0.6);
    for (double lambda : {0.5, 2.0}) {
      CHECK(scalar_price(exp_agent(lambda, p), binomial(), kOne, claim, 0, Side::buy) ==
            doctest::Approx(cost).epsilon(1e-7));
      CHECK(scalar_price(exp_agent(lambda, p), binomial(), kOne, claim, 0, Side::sell) ==
            doctest::Approx(cost).epsilon(1e-7));
    }
  }

  TEST_CASE("membership classification") {
    const PreferenceRepresentation pref = exp_agent(1.0, Eigen::Vector2d(0.5, 0.5));
    const RandomVector claim = scalar_claim({3.0, 1.0});
    PricingOptions o;
    o.epsilon = 1e-5;
    const auto umax =
        utility_maximization(pref, binomial(), kOne, RandomVector::constant(2, Eigen::VectorXd::Zero(1)), o);
    REQUIRE(umax.solution.ok());
    auto status = [&](double price, Side side) {
      return price_membership(pref, binomial(), kOne, claim, Eigen::VectorXd::Constant(1, price), side,
                              umax.solution)
          .status;
    };
    CHECK(status(1.6, Side::buy) == Membership::in_subset);
    CHECK(status(1.9, Side::buy) == Membership::outside);
    CHECK(status(1.9, Side::sell) == Membership::in_subset);
    CHECK(status(1.6, Side::sell) == Membership::outside);
    CHECK(std::string(to_string(Membership::in_superset_only)) == "in_superset_only");
  }

  TEST_CASE("weight levels drop duplicates") {
    EpsilonSolution s;
    SolutionPoint a;
    a.weight = Eigen::Vector2d(0.5, 0.5);
    a.value = 1.0;
    a.image = Eigen::Vector2d(1, 1);
    SolutionPoint b = a;
    b.weight = Eigen::Vector2d(0.5 + 1e-12, 0.5);
    SolutionPoint c = a;
    c.weight = Eigen::Vector2d(0.2, 0.8);
    c.value = 2.0;
    s.points = {a, b, c};
    std::vector<Eigen::VectorXd> w;
    std::vector<double> v;
    weight_levels(s, w, v);
    CHECK(w.size() == 2);
    CHECK(v.size() == 2);
  }

  TEST_CASE("exchange budget from the initial cone") {
    const Cone k0 = Cone::from_generators({Eigen::Vector2d(1, -0.9), Eigen::Vector2d(-0.9, 1)});
    // largest a with x - a e_j in K0; K0 = {0.9 y0 + y1 >= 0, y0 + 0.9 y1 >= 0}
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 20; ++t) {
      const Eigen::Vector2d x(u(rng), u(rng));
      const double a0 = std::min(x[0] + x[1] / 0.9, x[0] + 0.9 * x[1]);
      const double a1 = std::min(0.9 * x[0] + x[1], x[0] / 0.9 + x[1]);
      CHECK(exchange_budget(k0, x, 0) == doctest::Approx(a0).epsilon(1e-9));
      CHECK(exchange_budget(k0, x, 1) == doctest::Approx(a1).epsilon(1e-9));
    }
    CHECK(exchange_budget(k0, Eigen::Vector2d(0.2, 0.45), 0) == doctest::Approx(0.605));
  }

  TEST_CASE("agents in a complete market always agree on a trade") {
    const RandomVector claim = scalar_claim({3.0, 1.0});
    const Agent buyer{exp_agent(0.5, Eigen::Vector2d(0.5, 0.5)), kOne};
    const Agent seller{exp_agent(2.0, Eigen::Vector2d(0.2, 0.8)), kOne};
    const TradeMatch t = trade_match(buyer, seller, binomial(), claim);
    REQUIRE(t.solved);
    CHECK(t.overlap());
    CHECK(t.buy_price[0] == doctest::Approx(1.75).epsilon(1e-5));
  }

  TEST_CASE("identical agents with transaction costs do not trade") {
    const Market m = Market::conical(two_currency_tree(), 2);
    const PreferenceRepresentation pref(
        {UtilityFunction::additive({ScalarUtility::exponential(1.0), ScalarUtility::exponential(1.0)}, {0.5, 0.5})},
        {Eigen::Vector2d(0.5, 0.5)});
    const RandomVector claim(Eigen::MatrixXd::Identity(2, 2));
    const Agent a{pref, Eigen::Vector2d::Zero()};
    const TradeMatch t = trade_match(a, a, m, claim);
    REQUIRE(t.solved);
    CHECK_FALSE(t.overlap());
    CHECK(t.distance > 1e-3);
    // the buy price is dominated by the sell price
    CHECK(Cone::from_generators({Eigen::Vector2d(1, -0.9), Eigen::Vector2d(-0.9, 1)})
              .contains(t.sell_price - t.buy_price, 1e-6));
  }

  TEST_CASE("set-valued price bounds bracket the exact price set") {
    const Market m = Market::conical(two_currency_tree(), 2);
    const PreferenceRepresentation pref(
        {UtilityFunction::additive({ScalarUtility::exponential(1.0), ScalarUtility::exponential(1.0)}, {0.5, 0.5})},
        {Eigen::Vector2d(0.5, 0.5)});
    const RandomVector claim(Eigen::MatrixXd::Identity(2, 2));
    const Eigen::Vector2d x0 = Eigen::Vector2d::Zero();
    PricingOptions o;
    o.epsilon = 1e-3;
    const auto umax = utility_maximization(pref, m, x0, RandomVector::constant(2, Eigen::VectorXd::Zero(2)), o);
    REQUIRE(umax.solution.ok());
    for (Side side : {Side::buy, Side::sell}) {
      const PriceBounds b = price_bounds(pref, m, x0, claim, side, umax.solution, o);
      const PriceSet exact = price_exact_single_utility(pref, m, x0, claim, side, o);
      REQUIRE(b.superset.status == CvopStatus::solved);
      REQUIRE(exact.status == CvopStatus::solved);
      CHECK(contains_poly(b.superset.outer, exact.inner, 1e-7));
      if (!b.subset.empty()) CHECK(contains_poly(exact.outer, b.subset.inner, 1e-7));
      for (const auto& h : b.superset.hedges)
        for (const auto& w : h.wealth) CHECK(w.allFinite());
    }
  }
}
