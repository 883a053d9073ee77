#include "setprice/pricing.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace setprice;

namespace {

// Four-state market with one traded stock and two utilities.
struct FourState {
  PreferenceRepresentation pref;
  Market market;
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 10.0);
  RandomVector claim;

  FourState()
      : pref({UtilityFunction::univariate(ScalarUtility::exponential(1.0)),
              UtilityFunction::univariate(ScalarUtility::shifted_log(10.0))},
             {Eigen::VectorXd::Constant(4, 0.25)}),
        market(make_market()),
        claim(Eigen::MatrixXd(Eigen::Vector4d(18, 14, 10, 6))) {}

  static Market make_market() {
    FrictionlessMarket f;
    f.S0 = Eigen::Vector2d(4, 6);
    f.ST.resize(4, 2);
    f.ST << 10, 8, 10, 4, 2, 8, 2, 4;
    f.traded = {0};
    return Market::frictionless(f, 4);
  }
};

PricingOptions options(benchmark::State& state) {
  PricingOptions o;
  o.epsilon = std::pow(10.0, -static_cast<double>(state.range(0)));
  o.benson.execution = state.range(1) ? Execution::parallel : Execution::serial;
  return o;
}

void BM_UtilityMax(benchmark::State& state) {
  const FourState fs;
  const PricingOptions o = options(state);
  const RandomVector none = RandomVector::constant(4, Eigen::VectorXd::Zero(1));
  for (auto _ : state) {
    auto r = utility_maximization(fs.pref, fs.market, fs.x0, none, o);
    benchmark::DoNotOptimize(r.solution.points.size());
    state.counters["points"] = static_cast<double>(r.solution.points.size());
  }
}

void BM_BuySuperset(benchmark::State& state) {
  const FourState fs;
  const PricingOptions o = options(state);
  const RandomVector none = RandomVector::constant(4, Eigen::VectorXd::Zero(1));
  const auto umax = utility_maximization(fs.pref, fs.market, fs.x0, none, o);
  for (auto _ : state) {
    auto s = price_superset(fs.pref, fs.market, fs.x0, fs.claim, Side::buy, umax.solution, o);
    benchmark::DoNotOptimize(s.endpoint);
  }
}

}  // namespace

// args: -log10(epsilon), parallel flag
BENCHMARK(BM_UtilityMax)->ArgsProduct({{4, 6}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuySuperset)->ArgsProduct({{4, 6}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
