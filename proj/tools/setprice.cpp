// Command-line front end: reads a problem file, runs one computation and
// writes JSON, CSV or SVG.
//
// Exit codes: 0 success, 2 invalid input, 3 solver failure.

#include "setprice/io.hpp"
#include "setprice/plot.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace setprice;
namespace fs = std::filesystem;

namespace {

constexpr int kExitSchema = 2;
constexpr int kExitSolver = 3;

struct SolverFailure : std::runtime_error {
  Json payload;
  SolverFailure(const std::string& what, Json p) : std::runtime_error(what), payload(std::move(p)) {}
};

struct Settings {
  std::string problem;
  std::optional<double> epsilon;
  std::string k;
  std::string cone;
  std::string out;
  std::string format = "json";
  std::string side = "buy";
  int currency = 0;
  bool with_claim = false;
  std::string target = "prices";
};

Eigen::VectorXd parse_csv_vector(const std::string& text, const std::string& flag) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw SchemaError(flag, "expected comma-separated numbers, got '" + text + "'");
    }
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Problem load(const Settings& s) {
  Problem p = load_problem(s.problem);
  if (s.epsilon) {
    if (!(*s.epsilon > 0.0)) throw SchemaError("--epsilon", "must be positive");
    p.epsilon = *s.epsilon;
  }
  if (!s.k.empty()) {
    p.direction = parse_csv_vector(s.k, "--k");
    if (p.direction.size() != p.pref.q())
      throw SchemaError("--k", "expected " + std::to_string(p.pref.q()) + " entries");
    if ((p.direction.array() <= 0.0).any()) throw SchemaError("--k", "entries must be positive");
  }
  if (s.cone == "orthant") p.ordering = OrderingChoice::orthant;
  if (s.cone == "K0") p.ordering = OrderingChoice::k0;
  return p;
}

Side parse_side(const std::string& s) { return s == "sell" ? Side::sell : Side::buy; }

RandomVector zero_claim(const Problem& p) {
  return RandomVector::constant(p.space.size(), Eigen::VectorXd::Zero(p.market.dim()));
}

void emit(const Settings& s, const std::string& name, const std::string& ext, const std::string& body) {
  if (s.out.empty()) {
    std::cout << body;
    if (!body.empty() && body.back() != '\n') std::cout << '\n';
    return;
  }
  fs::create_directories(s.out);
  const fs::path path = fs::path(s.out) / (name + "." + ext);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << body;
  if (!body.empty() && body.back() != '\n') f << '\n';
}

void emit_json(const Settings& s, const std::string& name, const Json& j) { emit(s, name, "json", j.dump(2)); }

bool failed(CvopStatus st) { return st == CvopStatus::failed || st == CvopStatus::unbounded; }

void check(bool ok, const std::string& what, const Json& payload) {
  if (!ok) throw SolverFailure(what, payload);
}

UtilityMaxResult run_umax(const Problem& p, bool with_claim) {
  return utility_maximization(p.pref, p.market, p.x0, with_claim ? p.claim : zero_claim(p), p.options());
}

struct Pricing {
  UtilityMaxResult umax;
  PriceBounds bounds;
  std::optional<PriceSet> exact;
};

Pricing run_prices(const Problem& p, Side side) {
  Pricing out;
  out.umax = run_umax(p, false);
  check(out.umax.solution.ok(), "utility maximization did not solve", to_json(out.umax.solution));
  out.bounds = price_bounds(p.pref, p.market, p.x0, p.claim, side, out.umax.solution, p.options());
  if (p.pref.q() == 1 && p.market.dim() > 1)
    out.exact = price_exact_single_utility(p.pref, p.market, p.x0, p.claim, side, p.options());
  return out;
}

int cmd_ce(const Settings& s) {
  const Problem p = load(s);
  const CeResult ce = ce_regions(p.pref, p.claim, p.options());
  const Json j = to_json(ce);
  check(!failed(ce.upper.status), "certainty equivalent approximation failed", j);
  if (s.format == "csv") {
    emit(s, "ce_upper_inner", "csv", polyhedron_csv(ce.upper.inner));
  } else {
    emit_json(s, "ce", j);
  }
  return 0;
}

int cmd_umax(const Settings& s) {
  const Problem p = load(s);
  const UtilityMaxResult u = run_umax(p, s.with_claim);
  const Json j = to_json(u);
  check(u.solution.ok(), "utility maximization did not solve", j);
  if (s.format == "csv") {
    emit(s, "umax_frontier", "csv", frontier_csv(u.solution));
  } else {
    emit_json(s, "umax", j);
    if (!s.out.empty()) emit(s, "umax_frontier", "csv", frontier_csv(u.solution));
  }
  return 0;
}

int cmd_price(const Settings& s, Side side) {
  const Problem p = load(s);
  const Pricing r = run_prices(p, side);
  Json j{{"side", to_string(side)}, {"epsilon", p.epsilon}, {"bounds", to_json(r.bounds)}};
  if (r.exact) j["exact"] = to_json(*r.exact);
  check(!failed(r.bounds.superset.status) && r.bounds.subset.status != CvopStatus::failed &&
            !(r.exact && failed(r.exact->status)),
        "price set computation failed", j);
  const std::string name = to_string(side);
  if (s.format == "csv") {
    emit(s, name + "_superset_outer", "csv", polyhedron_csv(r.bounds.superset.outer));
    if (!s.out.empty()) emit(s, name + "_subset_inner", "csv", polyhedron_csv(r.bounds.subset.inner));
  } else {
    emit_json(s, name, j);
  }
  return 0;
}

int cmd_scalar_price(const Settings& s) {
  const Problem p = load(s);
  if (s.currency < 0 || s.currency >= p.market.dim())
    throw SchemaError("--currency", "out of range for a market with " + std::to_string(p.market.dim()) +
                                        " currencies");
  const Side side = parse_side(s.side);
  double price = 0.0;
  try {
    price = scalar_price(p.pref, p.market, p.x0, p.claim, s.currency, side, p.options());
  } catch (const std::runtime_error& e) {
    throw SolverFailure(e.what(), Json{{"status", "failed"}, {"message", e.what()}});
  }
  emit_json(s, "scalar_price", Json{{"side", to_string(side)}, {"currency", s.currency}, {"price", price}});
  return 0;
}

int cmd_hedging(const Settings& s, bool super) {
  const Problem p = load(s);
  const PriceSet h = super ? superhedging(p.market, p.claim, p.options()) : subhedging(p.market, p.claim, p.options());
  const Json j = to_json(h);
  check(!failed(h.status), "hedging set computation failed", j);
  const std::string name = super ? "shp" : "subhp";
  if (s.format == "csv") {
    emit(s, name, "csv", polyhedron_csv(h.inner));
  } else {
    emit_json(s, name, j);
  }
  return 0;
}

int cmd_trade_match(const Settings& s) {
  const Problem p = load(s);
  if (!p.counterparty) throw SchemaError("$.counterparty", "trade-match needs a counterparty");
  Agent self{p.pref, p.x0};
  Agent other{p.counterparty->pref, p.counterparty->x0};
  const bool self_buys = parse_side(s.side) == Side::buy;
  const TradeMatch t =
      self_buys ? trade_match(self, other, p.market, p.claim) : trade_match(other, self, p.market, p.claim);
  Json j = to_json(t);
  j["buyer"] = self_buys ? "self" : "counterparty";
  check(t.solved, "trade matching failed", j);
  emit_json(s, "trade_match", j);
  return 0;
}

int cmd_plot(const Settings& s) {
  const Problem p = load(s);
  std::string svg;
  if (s.target == "frontier") {
    const UtilityMaxResult u = run_umax(p, s.with_claim);
    check(u.solution.ok(), "utility maximization did not solve", to_json(u.solution));
    if (p.pref.q() != 2) throw SchemaError("$.preferences", "frontier plots need exactly two objectives");
    PlotOptions o;
    o.x_label = "E u0";
    o.y_label = "E u1";
    svg = frontier_svg(u.solution, o);
  } else {
    if (p.market.dim() != 2) throw SchemaError("$.market", "region plots need two currencies");
    std::vector<PlotRegion> regions;
    if (s.target == "ce") {
      const CeResult ce = ce_regions(p.pref, p.claim, p.options());
      check(!failed(ce.upper.status), "certainty equivalent approximation failed", to_json(ce));
      regions.push_back({ce.upper.outer, "upper (outer)", "#d9822b", 0.25});
      regions.push_back({ce.upper.inner, "upper (inner)", "#4a7ab5", 0.4});
    } else {
      const Side side = parse_side(s.side);
      const Pricing r = run_prices(p, side);
      const PriceSet& set = r.exact ? *r.exact : r.bounds.superset;
      check(!failed(set.status), "price set computation failed", to_json(set));
      const PriceSet hedge = side == Side::buy ? subhedging(p.market, p.claim, p.options())
                                               : superhedging(p.market, p.claim, p.options());
      regions.push_back({set.outer, std::string(to_string(side)) + " prices", "#4a7ab5", 0.35});
      if (!failed(hedge.status))
        regions.push_back({hedge.inner, side == Side::buy ? "subhedging" : "superhedging", "#b54a4a", 0.3});
    }
    PlotOptions o;
    o.x_label = "currency 0";
    o.y_label = "currency 1";
    svg = regions_svg(regions, {}, o);
  }
  emit(s, "plot_" + s.target, "svg", svg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Set-valued utility indifference prices"};
  app.require_subcommand(1);
  Settings s;

  auto common = [&](CLI::App* sub) {
    sub->add_option("problem", s.problem, "Problem file (JSON)")->required();
    sub->add_option("--epsilon", s.epsilon, "Approximation tolerance");
    sub->add_option("--k", s.k, "Direction in utility space, comma separated");
    sub->add_option("--cone", s.cone, "Ordering cone of prices")->check(CLI::IsMember({"orthant", "K0"}));
    sub->add_option("--out", s.out, "Write files to this directory instead of stdout");
    sub->add_option("--format", s.format, "Output format")->check(CLI::IsMember({"json", "csv", "svg"}));
  };

  auto* ce = app.add_subcommand("ce", "Certainty equivalent regions");
  auto* umax = app.add_subcommand("umax", "Vector utility maximization");
  umax->add_flag("--with-claim", s.with_claim, "Include the claim in the terminal wealth");
  auto* buy = app.add_subcommand("buy", "Buyer price set bounds");
  auto* sell = app.add_subcommand("sell", "Seller price set bounds");
  auto* sp = app.add_subcommand("scalar-price", "Indifference price in one currency");
  sp->add_option("--currency", s.currency, "Currency index (0-based)");
  sp->add_option("--side", s.side, "buy or sell")->check(CLI::IsMember({"buy", "sell"}));
  auto* shp = app.add_subcommand("shp", "Superhedging price set");
  auto* subhp = app.add_subcommand("subhp", "Subhedging price set");
  auto* tm = app.add_subcommand("trade-match", "Closest buy and sell prices of two agents");
  tm->add_option("--side", s.side, "Role of the main agent: buy or sell")->check(CLI::IsMember({"buy", "sell"}));
  auto* plot = app.add_subcommand("plot", "SVG of price regions or a utility frontier");
  plot->add_option("--side", s.side, "buy or sell")->check(CLI::IsMember({"buy", "sell"}));
  plot->add_option("--target", s.target, "What to draw")->check(CLI::IsMember({"prices", "ce", "frontier"}));
  plot->add_flag("--with-claim", s.with_claim, "Frontier of U(V_T + C) instead of U(V_T)");
  for (auto* sub : {ce, umax, buy, sell, sp, shp, subhp, tm, plot}) common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitSchema;
  }

  try {
    if (*ce) return cmd_ce(s);
    if (*umax) return cmd_umax(s);
    if (*buy) return cmd_price(s, Side::buy);
    if (*sell) return cmd_price(s, Side::sell);
    if (*sp) return cmd_scalar_price(s);
    if (*shp) return cmd_hedging(s, true);
    if (*subhp) return cmd_hedging(s, false);
    if (*tm) return cmd_trade_match(s);
    if (*plot) return cmd_plot(s);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    std::cout << Json{{"error", e.what()}, {"status", e.payload}}.dump(2) << '\n';
    return kExitSolver;
  } catch (const DimensionError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    std::cout << Json{{"error", e.what()}, {"status", "failed"}}.dump(2) << '\n';
    return kExitSolver;
  }
  return 0;
}
