#include "setprice/io.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace setprice;

namespace {

std::string data(const std::string& name) { return std::string(SETPRICE_DATA_DIR) + "/" + name; }

Json read_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return Json::parse(in);
}

Json golden(const std::string& name) { return read_json(std::string(SETPRICE_GOLDEN_DIR) + "/" + name); }

// Applies `edit` to a copy of the problem file and returns the schema path it is rejected at.
template <class Edit>
std::string rejected_at(const std::string& file, Edit edit) {
  Json doc = read_json(data(file));
  edit(doc);
  try {
    parse_problem(doc);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<accepted>";
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("example files parse") {
    const Problem a = load_problem(data("ex51.json"));
    CHECK(a.space.size() == 4);
    CHECK(a.pref.q() == 2);
    CHECK(a.market.kind() == Market::Kind::frictionless);
    CHECK(a.claim.at(0)[0] == doctest::Approx(18.0));
    CHECK(a.epsilon == doctest::Approx(1e-6));

    const Problem b = load_problem(data("ex52.json"));
    CHECK(b.market.dim() == 2);
    CHECK(b.market.conical_data().horizon() == 1);
    REQUIRE(b.counterparty);
    CHECK(b.counterparty->x0.size() == 2);
    CHECK_FALSE(b.options().price_cone->is_orthant());

    const Problem c = load_problem(data("ex53.json"));
    CHECK(c.pref.utilities().size() == 2);
  }

  TEST_CASE("schema errors carry a path") {
    CHECK(rejected_at("ex51.json", [](Json& d) { d["probability_space"]["probs"][1] = "x"; }) ==
          "$.probability_space.probs[1]");
    CHECK(rejected_at("ex51.json", [](Json& d) { d.erase("market"); }) == "$.market");
    CHECK(rejected_at("ex51.json", [](Json& d) { d["surprise"] = 1; }) == "$.surprise");
    CHECK(rejected_at("ex51.json", [](Json& d) { d["preferences"]["utilities"][0]["family"] = "cubic"; })
              .rfind("$.preferences.utilities[0]", 0) == 0);
    CHECK(rejected_at("ex51.json", [](Json& d) { d["claim"] = Json::array({1, 2}); }) == "$.claim");
    CHECK(rejected_at("ex51.json", [](Json& d) { d["market"]["ST"][2][1] = nullptr; }) == "$.market.ST[2][1]");
    CHECK(rejected_at("ex52.json", [](Json& d) { d["market"]["tree"]["nodes"][1]["cone_generators"][0] = Json::array({1}); })
              .rfind("$.market.tree.nodes[1].cone_generators[0]", 0) == 0);
    CHECK(rejected_at("ex52.json", [](Json& d) { d["market"]["T"] = 2; }) == "$.market.T");
    CHECK(rejected_at("ex52.json", [](Json& d) { d["direction_k"] = Json::array({1, -1}); }) == "$.direction_k");
    CHECK(rejected_at("ex52.json", [](Json& d) { d["epsilon"] = -1; }) == "$.epsilon");
    CHECK_THROWS_AS(load_problem(data("missing.json")), SchemaError);
  }

  TEST_CASE("polyhedra survive a JSON round trip") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
      const int dim = 2 + t % 2;
      std::vector<Eigen::VectorXd> pts;
      for (int i = 0; i < 7; ++i) pts.push_back(Eigen::VectorXd::NullaryExpr(dim, [&] { return g(rng); }));
      std::vector<Eigen::VectorXd> rays;
      if (t % 3 == 0) rays.push_back(Eigen::VectorXd::Ones(dim));
      const Polyhedron p = dd_convert(Polyhedron::from_generators(dim, pts, rays));
      const Json j = Json::parse(to_json(p).dump());
      const Polyhedron back = polyhedron_from_json(j);
      CHECK(same_set(p, back, 1e-9));
      REQUIRE(back.halfspaces().size() == p.halfspaces().size());
      for (std::size_t i = 0; i < p.halfspaces().size(); ++i) {
        CHECK((back.halfspaces()[i].a - p.halfspaces()[i].a).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(std::abs(back.halfspaces()[i].b - p.halfspaces()[i].b) <= 1e-12);
      }
      // a second trip reproduces the inequalities text exactly
      CHECK(to_json(back)["halfspaces"].dump() == j["halfspaces"].dump());
    }
  }

  TEST_CASE("empty and non-finite values") {
    const Polyhedron empty = dd_convert(Polyhedron::from_halfspaces(
        1, {{Eigen::VectorXd::Constant(1, 1.0), 1.0}, {Eigen::VectorXd::Constant(1, -1.0), 0.0}}));
    const Json j = to_json(empty);
    CHECK(j["empty"].get<bool>());
    CHECK(polyhedron_from_json(j).is_empty());
    CHECK(to_json(Eigen::VectorXd(Eigen::Vector2d(1.0, INFINITY)))[1].is_null());
  }

  TEST_CASE("csv writers") {
    const Polyhedron q = Polyhedron::from_generators(2, {Eigen::Vector2d(1, 2)}, {Eigen::Vector2d(1, 0)});
    std::istringstream csv(polyhedron_csv(dd_convert(q)));
    std::string line;
    int vertices = 0, rays = 0;
    while (std::getline(csv, line)) {
      if (line.rfind("vertex,", 0) == 0) ++vertices;
      if (line.rfind("ray,", 0) == 0) ++rays;
    }
    CHECK(vertices == 1);
    CHECK(rays == 1);
  }

  TEST_CASE("golden: four-state certainty equivalents and hedging prices") {
    const Problem p = load_problem(data("ex51.json"));
    const CeResult ce = ce_regions(p.pref, p.claim, p.options());
    const Json g = golden("ex51_ce.json");
    REQUIRE(ce.strong);
    REQUIRE(ce.weak);
    CHECK(std::abs(*ce.strong - g["strong"].get<double>()) <= 1e-9);
    CHECK(std::abs(*ce.weak - g["weak"].get<double>()) <= 1e-9);
    CHECK(std::abs(*ce.strong - 7.3678) <= 1e-3);

    const PriceSet shp = superhedging(p.market, p.claim, p.options());
    const PriceSet sub = subhedging(p.market, p.claim, p.options());
    CHECK(same_set(shp.outer, polyhedron_from_json(golden("ex51_shp.json")["outer"]), 1e-9));
    CHECK(same_set(sub.outer, polyhedron_from_json(golden("ex51_subhp.json")["outer"]), 1e-9));
    CHECK(std::abs(*shp.endpoint - 12.0) <= 1e-9);
    CHECK(std::abs(*sub.endpoint - 8.0) <= 1e-9);
  }

  TEST_CASE("golden: four-state indifference prices") {
    const Problem p = load_problem(data("ex51.json"));
    const Json g = golden("ex51_prices.json");
    PricingOptions o = p.options();
    o.epsilon = g["epsilon"].get<double>();
    const RandomVector none = RandomVector::constant(p.claim.outcomes(), Eigen::VectorXd::Zero(1));
    const auto umax = utility_maximization(p.pref, p.market, p.x0, none, o);
    REQUIRE(umax.solution.ok());
    for (const auto& [name, side] : {std::pair{"buy", Side::buy}, std::pair{"sell", Side::sell}}) {
      const PriceBounds b = price_bounds(p.pref, p.market, p.x0, p.claim, side, umax.solution, o);
      REQUIRE(b.superset.endpoint);
      REQUIRE(b.subset.endpoint);
      CHECK(std::abs(*b.superset.endpoint - g[name]["superset_endpoint"].get<double>()) <= 5e-3);
      CHECK(std::abs(*b.subset.endpoint - g[name]["subset_endpoint"].get<double>()) <= 5e-3);
      CHECK(std::abs(*b.superset.endpoint - *b.subset.endpoint) <= 1e-3);
    }
  }

  TEST_CASE("golden: two-currency prices and hedging sets") {
    const Problem p = load_problem(data("ex52.json"));
    for (int currency : {0, 1})
      for (const auto& [name, side] : {std::pair{"buy", Side::buy}, std::pair{"sell", Side::sell}}) {
        const Json g = golden("ex52_scalar_" + std::string(name) + "_" + std::to_string(currency) + ".json");
        const double price = scalar_price(p.pref, p.market, p.x0, p.claim, currency, side, p.options());
        CHECK(std::abs(price - g["price"].get<double>()) <= 5e-3);
      }
    const PriceSet shp = superhedging(p.market, p.claim, p.options());
    const PriceSet sub = subhedging(p.market, p.claim, p.options());
    CHECK(same_set(shp.outer, polyhedron_from_json(golden("ex52_shp.json")["outer"]), 1e-9));
    CHECK(same_set(sub.outer, polyhedron_from_json(golden("ex52_subhp.json")["outer"]), 1e-9));
  }

  TEST_CASE("golden: component utilities meet in one point") {
    const Problem p = load_problem(data("ex53.json"));
    const CeResult ce = ce_regions(p.pref, p.claim, p.options());
    const Json g = golden("ex53_ce.json");
    REQUIRE(ce.point);
    REQUIRE(g["point"].is_array());
    for (int j = 0; j < 2; ++j) CHECK(std::abs((*ce.point)[j] - g["point"][j].get<double>()) <= 1e-9);
  }
}
