#include "setprice/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace setprice {

namespace {

std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }
std::string at_key(const std::string& path, const std::string& key) { return path + "." + key; }

const Json& require(const Json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(at_key(path, key), "missing required entry");
  return *it;
}

const Json* optional_entry(const Json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw SchemaError(at_key(path, it.key()), "unknown entry");
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "expected a finite number");
  return v;
}

int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<int>();
}

std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

Eigen::VectorXd vector(const Json& j, const std::string& path, int expected = -1) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of numbers");
  if (expected >= 0 && static_cast<int>(j.size()) != expected)
    throw SchemaError(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = number(j[i], at_index(path, i));
  return v;
}

Eigen::MatrixXd matrix(const Json& j, const std::string& path, int rows, int cols) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of rows");
  if (static_cast<int>(j.size()) != rows)
    throw SchemaError(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const std::string rp = at_index(path, r);
    // single-column tables may list plain numbers
    if (cols == 1 && j[r].is_number()) {
      m(r, 0) = number(j[r], rp);
      continue;
    }
    m.row(r) = vector(j[r], rp, cols).transpose();
  }
  return m;
}

template <class F>
auto guarded(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(path, e.what());
  }
}

ProbabilitySpace parse_space(const Json& j, const std::string& path) {
  check_keys(j, path, {"outcomes", "probs"});
  const Json& outcomes = require(j, path, "outcomes");
  std::vector<std::string> labels;
  if (outcomes.is_number_integer()) {
    const int n = outcomes.get<int>();
    if (n < 1) throw SchemaError(at_key(path, "outcomes"), "need at least one outcome");
    for (int i = 0; i < n; ++i) labels.push_back("w" + std::to_string(i + 1));
  } else if (outcomes.is_array()) {
    for (std::size_t i = 0; i < outcomes.size(); ++i)
      labels.push_back(text(outcomes[i], at_index(at_key(path, "outcomes"), i)));
    if (labels.empty()) throw SchemaError(at_key(path, "outcomes"), "need at least one outcome");
  } else {
    throw SchemaError(at_key(path, "outcomes"), "expected a count or a list of labels");
  }
  const int n = static_cast<int>(labels.size());
  Eigen::VectorXd probs = Eigen::VectorXd::Constant(n, 1.0 / n);
  if (const Json* p = optional_entry(j, "probs")) probs = vector(*p, at_key(path, "probs"), n);
  return guarded(at_key(path, "probs"), [&] { return ProbabilitySpace(labels, probs); });
}

ScalarUtility parse_scalar(const Json& j, const std::string& path) {
  const std::string family = text(require(j, path, "family"), at_key(path, "family"));
  const Json empty = Json::object();
  const Json* params = optional_entry(j, "params");
  const Json& pr = params ? *params : empty;
  const std::string pp = at_key(path, "params");
  if (!pr.is_object()) throw SchemaError(pp, "expected an object");
  auto param = [&](const char* key, std::optional<double> fallback) {
    if (const Json* v = optional_entry(pr, key)) return number(*v, at_key(pp, key));
    if (!fallback) throw SchemaError(at_key(pp, key), "missing required parameter");
    return *fallback;
  };
  return guarded(path, [&] {
    if (family == "exponential") {
      check_keys(pr, pp, {"lambda", "lower"});
      return ScalarUtility::exponential(param("lambda", 1.0), param("lower", -std::numeric_limits<double>::infinity()));
    }
    if (family == "shifted_log") {
      check_keys(pr, pp, {"a"});
      return ScalarUtility::shifted_log(param("a", std::nullopt));
    }
    if (family == "linear") {
      check_keys(pr, pp, {});
      return ScalarUtility::linear();
    }
    if (family == "power") {
      check_keys(pr, pp, {"gamma", "a"});
      return ScalarUtility::power(param("gamma", std::nullopt), param("a", 0.0));
    }
    throw SchemaError(at_key(path, "family"), "unknown utility family '" + family + "'");
  });
}

UtilityFunction parse_utility(const Json& j, const std::string& path, int dim) {
  std::string comp = "univariate";
  if (const Json* c = optional_entry(j, "composition")) comp = text(*c, at_key(path, "composition"));
  if (comp == "univariate") {
    check_keys(j, path, {"family", "params", "composition"});
    if (dim != 1) throw SchemaError(path, "univariate utility needs a one-dimensional market");
    return UtilityFunction::univariate(parse_scalar(j, path));
  }
  if (comp == "component") {
    check_keys(j, path, {"family", "params", "composition", "index"});
    const int index = integer(require(j, path, "index"), at_key(path, "index"));
    if (index < 0 || index >= dim) throw SchemaError(at_key(path, "index"), "index out of range");
    return UtilityFunction::component(dim, index, parse_scalar(j, path));
  }
  if (comp == "additive") {
    check_keys(j, path, {"composition", "parts", "weights"});
    const Json& parts = require(j, path, "parts");
    const std::string partp = at_key(path, "parts");
    if (!parts.is_array() || static_cast<int>(parts.size()) != dim)
      throw SchemaError(partp, "expected one part per currency (" + std::to_string(dim) + ")");
    std::vector<ScalarUtility> gs;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      check_keys(parts[i], at_index(partp, i), {"family", "params"});
      gs.push_back(parse_scalar(parts[i], at_index(partp, i)));
    }
    Eigen::VectorXd w = Eigen::VectorXd::Ones(dim);
    if (const Json* wj = optional_entry(j, "weights")) w = vector(*wj, at_key(path, "weights"), dim);
    return guarded(path, [&] {
      return UtilityFunction::additive(std::move(gs), std::vector<double>(w.data(), w.data() + w.size()));
    });
  }
  throw SchemaError(at_key(path, "composition"), "unknown composition '" + comp + "'");
}

PreferenceRepresentation parse_preferences(const Json& j, const std::string& path, const ProbabilitySpace& space,
                                           int dim) {
  check_keys(j, path, {"utilities", "priors"});
  const Json& us = require(j, path, "utilities");
  const std::string up = at_key(path, "utilities");
  if (!us.is_array() || us.empty()) throw SchemaError(up, "expected a non-empty array");
  std::vector<UtilityFunction> utilities;
  for (std::size_t i = 0; i < us.size(); ++i) utilities.push_back(parse_utility(us[i], at_index(up, i), dim));
  std::vector<Eigen::VectorXd> priors;
  if (const Json* ps = optional_entry(j, "priors")) {
    const std::string pp = at_key(path, "priors");
    if (!ps->is_array() || ps->empty()) throw SchemaError(pp, "expected a non-empty array");
    for (std::size_t i = 0; i < ps->size(); ++i) {
      Eigen::VectorXd p = vector((*ps)[i], at_index(pp, i), space.size());
      guarded(at_index(pp, i), [&] {
        validate_prior(p, space.size());
        return 0;
      });
      priors.push_back(std::move(p));
    }
  } else {
    priors.push_back(space.probs());
  }
  return guarded(path, [&] { return PreferenceRepresentation(std::move(utilities), std::move(priors)); });
}

int market_dim(const Json& j, const std::string& path) {
  const std::string type = text(require(j, path, "type"), at_key(path, "type"));
  if (type == "frictionless") return 1;
  if (type != "conical") throw SchemaError(at_key(path, "type"), "expected 'frictionless' or 'conical'");
  if (const Json* d = optional_entry(j, "d")) {
    const int v = integer(*d, at_key(path, "d"));
    if (v < 1) throw SchemaError(at_key(path, "d"), "need at least one currency");
    return v;
  }
  // infer from the first generator
  const std::string tp = at_key(at_key(path, "tree"), "nodes");
  const Json& nodes = require(require(j, path, "tree"), at_key(path, "tree"), "nodes");
  if (!nodes.is_array() || nodes.empty()) throw SchemaError(tp, "expected a non-empty array");
  const Json& gens = require(nodes[0], at_index(tp, 0), "cone_generators");
  if (!gens.is_array() || gens.empty() || !gens[0].is_array())
    throw SchemaError(at_key(at_index(tp, 0), "cone_generators"), "expected an array of vectors");
  return static_cast<int>(gens[0].size());
}

Market parse_market(const Json& j, const std::string& path, int outcomes, int dim) {
  const std::string type = text(require(j, path, "type"), at_key(path, "type"));
  if (type == "frictionless") {
    check_keys(j, path, {"type", "S0", "ST", "traded_indices"});
    FrictionlessMarket m;
    m.S0 = vector(require(j, path, "S0"), at_key(path, "S0"));
    const int n = static_cast<int>(m.S0.size());
    m.ST = matrix(require(j, path, "ST"), at_key(path, "ST"), outcomes, n);
    const Json& tr = require(j, path, "traded_indices");
    const std::string tp = at_key(path, "traded_indices");
    if (!tr.is_array()) throw SchemaError(tp, "expected an array of asset indices");
    for (std::size_t i = 0; i < tr.size(); ++i) m.traded.push_back(integer(tr[i], at_index(tp, i)));
    return guarded(path, [&] { return Market::frictionless(std::move(m), outcomes); });
  }
  check_keys(j, path, {"type", "d", "T", "tree"});
  ConicalMarket m;
  m.d = dim;
  const std::string treep = at_key(path, "tree");
  const Json& tree = require(j, path, "tree");
  check_keys(tree, treep, {"nodes"});
  const std::string np = at_key(treep, "nodes");
  const Json& nodes = require(tree, treep, "nodes");
  if (!nodes.is_array() || nodes.empty()) throw SchemaError(np, "expected a non-empty array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = at_index(np, i);
    check_keys(nodes[i], p, {"cone_generators", "children", "outcome"});
    TreeNode node;
    const Json& gens = require(nodes[i], p, "cone_generators");
    const std::string gp = at_key(p, "cone_generators");
    if (!gens.is_array() || gens.empty()) throw SchemaError(gp, "expected a non-empty array of vectors");
    for (std::size_t g = 0; g < gens.size(); ++g) node.cone_generators.push_back(vector(gens[g], at_index(gp, g), dim));
    if (const Json* ch = optional_entry(nodes[i], "children")) {
      if (!ch->is_array()) throw SchemaError(at_key(p, "children"), "expected an array of node indices");
      for (std::size_t c = 0; c < ch->size(); ++c)
        node.children.push_back(integer((*ch)[c], at_index(at_key(p, "children"), c)));
    }
    if (const Json* o = optional_entry(nodes[i], "outcome")) node.outcome = integer(*o, at_key(p, "outcome"));
    m.nodes.push_back(std::move(node));
  }
  Market out = guarded(treep, [&] { return Market::conical(m, outcomes); });
  if (const Json* t = optional_entry(j, "T")) {
    const int horizon = integer(*t, at_key(path, "T"));
    if (horizon != m.horizon())
      throw SchemaError(at_key(path, "T"), "tree depth is " + std::to_string(m.horizon()));
  }
  return out;
}

Eigen::VectorXd parse_position(const Json& j, const std::string& path, int dim) {
  if (dim == 1 && j.is_number()) return Eigen::VectorXd::Constant(1, number(j, path));
  return vector(j, path, dim);
}

}  // namespace

PricingOptions Problem::options() const {
  PricingOptions o;
  o.epsilon = epsilon;
  o.direction = direction;
  if (ordering == OrderingChoice::orthant) o.price_cone = Cone::orthant(market.dim());
  if (ordering == OrderingChoice::k0) o.price_cone = market.initial_cone();
  return o;
}

Problem parse_problem(const Json& doc) {
  const std::string root = "$";
  check_keys(doc, root,
             {"probability_space", "preferences", "market", "claim", "x0", "epsilon", "direction_k", "ordering_cone",
              "counterparty", "description"});
  const ProbabilitySpace space = parse_space(require(doc, root, "probability_space"), "$.probability_space");
  const int n = space.size();
  const Json& mj = require(doc, root, "market");
  const int dim = market_dim(mj, "$.market");
  Market market = parse_market(mj, "$.market", n, dim);
  PreferenceRepresentation pref = parse_preferences(require(doc, root, "preferences"), "$.preferences", space, dim);
  RandomVector claim(matrix(require(doc, root, "claim"), "$.claim", n, dim));
  Eigen::VectorXd x0 = parse_position(require(doc, root, "x0"), "$.x0", dim);

  double epsilon = 1e-6;
  if (const Json* e = optional_entry(doc, "epsilon")) {
    epsilon = number(*e, "$.epsilon");
    if (!(epsilon > 0.0)) throw SchemaError("$.epsilon", "must be positive");
  }
  Eigen::VectorXd direction;
  if (const Json* k = optional_entry(doc, "direction_k")) {
    direction = vector(*k, "$.direction_k", pref.q());
    if ((direction.array() <= 0.0).any()) throw SchemaError("$.direction_k", "entries must be positive");
  }
  OrderingChoice ordering = OrderingChoice::automatic;
  if (const Json* c = optional_entry(doc, "ordering_cone")) {
    const std::string s = text(*c, "$.ordering_cone");
    if (s == "orthant") {
      ordering = OrderingChoice::orthant;
    } else if (s == "K0") {
      ordering = OrderingChoice::k0;
    } else {
      throw SchemaError("$.ordering_cone", "expected 'orthant' or 'K0'");
    }
  }
  std::optional<Counterparty> other;
  if (const Json* cp = optional_entry(doc, "counterparty")) {
    check_keys(*cp, "$.counterparty", {"preferences", "x0"});
    other = Counterparty{parse_preferences(require(*cp, "$.counterparty", "preferences"), "$.counterparty.preferences",
                                           space, dim),
                         parse_position(require(*cp, "$.counterparty", "x0"), "$.counterparty.x0", dim)};
  }
  return Problem{space, std::move(pref), std::move(market), std::move(claim), std::move(x0), epsilon,
                 std::move(direction), ordering, std::move(other)};
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("$", "cannot open '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse_problem(doc);
}

// ---------------------------------------------------------------------------
// Writers

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json opt(const std::optional<Eigen::VectorXd>& v) { return v ? to_json(*v) : Json(nullptr); }

Json list(const std::vector<Eigen::VectorXd>& vs) {
  Json a = Json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

Json region(const RegionApprox& r) {
  return {{"status", to_string(r.status)}, {"message", r.message}, {"inner", to_json(r.inner)},
          {"outer", to_json(r.outer)}};
}

}  // namespace

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(std::isfinite(v[i]) ? Json(v[i]) : Json(nullptr));
  return a;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (int r = 0; r < m.rows(); ++r) a.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return a;
}

Json to_json(const Polyhedron& p) {
  if (p.dim() == 0) return nullptr;  // never computed
  Json j{{"dim", p.dim()}, {"empty", p.is_empty()}};
  if (p.is_empty()) {
    j["vertices"] = Json::array();
    j["rays"] = Json::array();
    j["halfspaces"] = Json::array();
    return j;
  }
  const Polyhedron full = p.has_hrep() && p.has_vrep() ? p : dd_convert(p);
  j["vertices"] = list(full.vertices());
  j["rays"] = list(full.rays());
  Json hs = Json::array();
  for (const auto& h : full.halfspaces()) hs.push_back({{"a", to_json(h.a)}, {"b", h.b}});
  j["halfspaces"] = hs;
  return j;
}

Polyhedron polyhedron_from_json(const Json& j) {
  const std::string path = "$";
  if (j.is_null()) return Polyhedron();
  const int dim = integer(require(j, path, "dim"), "$.dim");
  if (const Json* e = optional_entry(j, "empty"); e && e->is_boolean() && e->get<bool>()) return Polyhedron::empty_set(dim);
  auto vectors = [&](const char* key) {
    std::vector<Eigen::VectorXd> out;
    if (const Json* a = optional_entry(j, key)) {
      if (!a->is_array()) throw SchemaError(at_key(path, key), "expected an array");
      for (std::size_t i = 0; i < a->size(); ++i) out.push_back(vector((*a)[i], at_index(at_key(path, key), i), dim));
    }
    return out;
  };
  if (const Json* hs = optional_entry(j, "halfspaces"); hs && hs->is_array() && !hs->empty()) {
    std::vector<Halfspace> list;
    for (std::size_t i = 0; i < hs->size(); ++i) {
      const std::string p = at_index("$.halfspaces", i);
      list.push_back({vector(require((*hs)[i], p, "a"), at_key(p, "a"), dim), number(require((*hs)[i], p, "b"), at_key(p, "b"))});
    }
    return Polyhedron::from_halfspaces(dim, std::move(list));
  }
  auto vs = vectors("vertices");
  if (vs.empty()) return Polyhedron::whole_space(dim);
  return Polyhedron::from_generators(dim, std::move(vs), vectors("rays"));
}

Json to_json(const EpsilonSolution& s) {
  Json pts = Json::array();
  for (const auto& p : s.points) {
    Json d = Json::array();
    for (const auto& x : p.decisions) d.push_back(to_json(x));
    pts.push_back({{"image", to_json(p.image)}, {"weight", to_json(p.weight)}, {"value", p.value}, {"decisions", d}});
  }
  return {{"status", to_string(s.status)},
          {"message", s.message},
          {"sense", to_string(s.sense)},
          {"epsilon", s.epsilon},
          {"direction", to_json(s.direction)},
          {"cone_generators", list(s.cone_generators)},
          {"iterations", s.iterations},
          {"subproblems", s.subproblems},
          {"max_kkt_residual", s.max_kkt_residual},
          {"points", pts},
          {"inner", to_json(s.inner)},
          {"outer", to_json(s.outer)}};
}

Json to_json(const CeResult& c) {
  Json lc = Json::array();
  for (const auto& r : c.lower_complement) lc.push_back(region(r));
  return {{"method", c.method},
          {"weak", opt(c.weak)},
          {"strong", opt(c.strong)},
          {"weak_point", opt(c.weak_point)},
          {"strong_point", opt(c.strong_point)},
          {"point", opt(c.point)},
          {"upper", region(c.upper)},
          {"lower_complement", lc}};
}

Json to_json(const UtilityMaxResult& u) {
  Json hs = Json::array();
  for (const auto& h : u.hedges) hs.push_back(to_json(h));
  Json j = to_json(u.solution);
  j["terminal_wealth"] = hs;
  return j;
}

Json to_json(const PriceSet& p) {
  Json hs = Json::array();
  for (const auto& h : p.hedges) {
    Json w = Json::array();
    for (const auto& m : h.wealth) w.push_back(to_json(m));
    hs.push_back({{"price", to_json(h.price)}, {"terminal_wealth", w}});
  }
  return {{"status", to_string(p.status)},
          {"message", p.message},
          {"side", to_string(p.side)},
          {"cone_generators", list(p.cone.generators())},
          {"blocks", p.blocks},
          {"endpoint", opt(p.endpoint)},
          {"max_kkt_residual", p.max_kkt_residual},
          {"inner", to_json(p.inner)},
          {"outer", to_json(p.outer)},
          {"hedges", hs}};
}

Json to_json(const PriceBounds& b) {
  Json levels = Json::array();
  for (double v : b.levels) levels.push_back(v);
  return {{"side", to_string(b.side)},   {"epsilon", b.epsilon},         {"superset", to_json(b.superset)},
          {"subset", to_json(b.subset)}, {"weights", list(b.weights)}, {"levels", levels}};
}

Json to_json(const TradeMatch& t) {
  return {{"solved", t.solved},
          {"message", t.message},
          {"distance", t.distance},
          {"overlap", t.overlap()},
          {"buy_price", to_json(t.buy_price)},
          {"sell_price", to_json(t.sell_price)},
          {"buyer_wealth", to_json(t.buyer_wealth)},
          {"seller_wealth", to_json(t.seller_wealth)}};
}

namespace {

void csv_row(std::ostringstream& out, const char* kind, const Eigen::VectorXd& v) {
  out << kind;
  for (int i = 0; i < v.size(); ++i) out << ',' << v[i];
  out << '\n';
}

}  // namespace

std::string polyhedron_csv(const Polyhedron& p) {
  std::ostringstream out;
  out.precision(17);
  out << "kind";
  for (int i = 0; i < p.dim(); ++i) out << ",y" << i;
  out << '\n';
  if (p.is_empty()) return out.str();
  const Polyhedron full = p.has_vrep() ? p : dd_convert(p);
  for (const auto& v : full.vertices()) csv_row(out, "vertex", v);
  for (const auto& r : full.rays()) csv_row(out, "ray", r);
  return out.str();
}

std::string frontier_csv(const EpsilonSolution& s) {
  std::ostringstream out;
  out.precision(17);
  const int q = s.points.empty() ? 0 : static_cast<int>(s.points.front().image.size());
  for (int i = 0; i < q; ++i) out << "y" << i << ',';
  for (int i = 0; i < q; ++i) out << "w" << i << ',';
  out << "value\n";
  for (const auto& p : s.points) {
    for (int i = 0; i < q; ++i) out << p.image[i] << ',';
    for (int i = 0; i < q; ++i) out << p.weight[i] << ',';
    out << p.value << '\n';
  }
  return out.str();
}

}  // namespace setprice
