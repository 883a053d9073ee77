#include "setprice/markets.hpp"

#include "setprice/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

namespace setprice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Eigen::MatrixXd WealthBlock::wealth(const Eigen::VectorXd& z) const {
  if (z.size() != decisions()) throw DimensionError("decision vector has the wrong length");
  const Eigen::VectorXd flat = coeff * z;
  Eigen::MatrixXd V(outcomes, dim);
  for (int w = 0; w < outcomes; ++w)
    for (int j = 0; j < dim; ++j) V(w, j) = endowment[j] + flat[row(w, j)];
  return V;
}

void FrictionlessMarket::validate(int outcomes) const {
  const int n = static_cast<int>(S0.size());
  if (n == 0) throw std::invalid_argument("market has no assets");
  if (ST.rows() != outcomes || ST.cols() != n)
    throw DimensionError("terminal price table must be outcomes x assets");
  if (traded.empty() || static_cast<int>(traded.size()) > n)
    throw std::invalid_argument("number of traded assets must be between 1 and the number of assets");
  std::set<int> seen;
  for (int i : traded) {
    if (i < 0 || i >= n) throw std::invalid_argument("traded asset index out of range");
    if (!seen.insert(i).second) throw std::invalid_argument("traded asset listed twice");
  }
  if ((S0.array() <= 0.0).any() || (ST.array() <= 0.0).any())
    throw std::invalid_argument("asset prices must be positive");
}

void ConicalMarket::validate(int outcomes) const {
  if (d < 1) throw std::invalid_argument("conical market needs at least one currency");
  if (nodes.empty()) throw std::invalid_argument("event tree has no nodes");
  const int n = static_cast<int>(nodes.size());
  std::vector<int> parent(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int c : nodes[i].children) {
      if (c <= 0 || c >= n) throw std::invalid_argument("tree node " + std::to_string(i) + ": child index out of range");
      if (parent[c] != -1) throw std::invalid_argument("tree node " + std::to_string(c) + " has two parents");
      parent[c] = i;
    }
  }
  for (int i = 1; i < n; ++i)
    if (parent[i] == -1) throw std::invalid_argument("tree node " + std::to_string(i) + " is not reachable from the root");
  std::vector<int> covered(outcomes, 0);
  int leaf_depth = -1;
  for (int i = 0; i < n; ++i) {
    const auto& node = nodes[i];
    const std::string where = "tree node " + std::to_string(i);
    if (node.cone_generators.empty()) throw std::invalid_argument(where + ": no cone generators");
    for (const auto& g : node.cone_generators)
      if (g.size() != d) throw DimensionError(where + ": cone generator has the wrong length");
    const Cone k = solvency_cone(i);
    if (!k.contains_orthant()) throw std::invalid_argument(where + ": solvency cone must contain the positive orthant");
    if (k.normals().empty()) throw std::invalid_argument(where + ": solvency cone is the whole space");
    if (node.children.empty()) {
      if (node.outcome < 0 || node.outcome >= outcomes)
        throw std::invalid_argument(where + ": leaf must name an outcome");
      ++covered[node.outcome];
      int depth = 0;
      for (int j = i; parent[j] != -1; j = parent[j]) ++depth;
      if (leaf_depth == -1) leaf_depth = depth;
      if (depth != leaf_depth) throw std::invalid_argument(where + ": leaves at different depths");
    } else if (node.outcome != -1) {
      throw std::invalid_argument(where + ": only leaves carry outcomes");
    }
  }
  for (int w = 0; w < outcomes; ++w)
    if (covered[w] != 1) throw std::invalid_argument("outcome " + std::to_string(w) + " must belong to exactly one leaf");
}

int ConicalMarket::horizon() const {
  int depth = 0;
  for (int i = 0; !nodes[i].children.empty(); i = nodes[i].children.front()) ++depth;
  return depth;
}

std::vector<std::vector<int>> ConicalMarket::paths(int outcomes) const {
  std::vector<std::vector<int>> out(outcomes);
  std::vector<std::pair<int, std::vector<int>>> stack{{0, {0}}};
  while (!stack.empty()) {
    auto [i, path] = std::move(stack.back());
    stack.pop_back();
    if (nodes[i].children.empty()) {
      out[nodes[i].outcome] = path;
      continue;
    }
    for (int c : nodes[i].children) {
      auto next = path;
      next.push_back(c);
      stack.emplace_back(c, std::move(next));
    }
  }
  return out;
}

Cone ConicalMarket::solvency_cone(int node) const { return Cone::from_generators(nodes.at(node).cone_generators); }

Market Market::frictionless(FrictionlessMarket m, int outcomes) {
  m.validate(outcomes);
  Market out;
  out.kind_ = Kind::frictionless;
  out.outcomes_ = outcomes;
  out.frictionless_ = std::move(m);
  return out;
}

Market Market::conical(ConicalMarket m, int outcomes) {
  m.validate(outcomes);
  Market out;
  out.kind_ = Kind::conical;
  out.outcomes_ = outcomes;
  out.conical_ = std::move(m);
  return out;
}

WealthBlock Market::feasible_block(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw DimensionError("endowment has the wrong dimension");
  if (!x.allFinite()) throw std::invalid_argument("endowment must be finite");
  WealthBlock b;
  b.outcomes = outcomes_;
  b.dim = dim();
  b.endowment = x;
  if (kind_ == Kind::frictionless) {
    const auto& f = frictionless_;
    const int m = static_cast<int>(f.traded.size());
    b.coeff = Eigen::MatrixXd::Zero(outcomes_, m + outcomes_);
    b.lower = Eigen::VectorXd::Constant(m + outcomes_, -kInf);
    for (int i = 0; i < m; ++i) {
      const int a = f.traded[i];
      for (int w = 0; w < outcomes_; ++w) b.coeff(w, i) = f.ST(w, a) - f.S0[a];
      b.names.push_back("alpha" + std::to_string(a));
    }
    // free disposal
    for (int w = 0; w < outcomes_; ++w) {
      b.coeff(w, m + w) = -1.0;
      b.lower[m + w] = 0.0;
      b.names.push_back("dispose" + std::to_string(w));
    }
    return b;
  }
  const auto& c = conical_;
  std::vector<int> first(c.nodes.size());
  int count = 0;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    first[i] = count;
    count += static_cast<int>(c.nodes[i].cone_generators.size());
    for (std::size_t g = 0; g < c.nodes[i].cone_generators.size(); ++g)
      b.names.push_back("beta" + std::to_string(i) + "_" + std::to_string(g));
  }
  b.coeff = Eigen::MatrixXd::Zero(outcomes_ * c.d, count);
  b.lower = Eigen::VectorXd::Zero(count);
  const auto paths = c.paths(outcomes_);
  for (int w = 0; w < outcomes_; ++w) {
    for (int node : paths[w]) {
      const auto& gens = c.nodes[node].cone_generators;
      for (std::size_t g = 0; g < gens.size(); ++g)
        for (int j = 0; j < c.d; ++j) b.coeff(b.row(w, j), first[node] + static_cast<int>(g)) = -gens[g][j];
    }
  }
  return b;
}

Cone Market::initial_cone() const {
  if (kind_ == Kind::frictionless) return Cone::orthant(1);
  return conical_.solvency_cone(0);
}

double membership_residual(const Market& market, const Eigen::VectorXd& x, const Eigen::MatrixXd& V) {
  const WealthBlock b = market.feasible_block(x);
  if (V.rows() != b.outcomes || V.cols() != b.dim) throw DimensionError("wealth table has the wrong shape");
  const int n = b.decisions();
  ConvexProgram lp(n + 1);
  lp.cost = Eigen::VectorXd::Unit(n + 1, n);
  lp.lower.head(n) = b.lower;
  for (int w = 0; w < b.outcomes; ++w) {
    for (int j = 0; j < b.dim; ++j) {
      const int r = b.row(w, j);
      const double gap = V(w, j) - x[j];
      Eigen::VectorXd row(n + 1);
      // t - (gap - coeff z) >= 0 and t + (gap - coeff z) >= 0
      row.head(n) = b.coeff.row(r).transpose();
      row[n] = 1.0;
      lp.add_inequality(row, gap);
      row.head(n) = -b.coeff.row(r).transpose();
      lp.add_inequality(row, -gap);
    }
  }
  const SolveReport rep = solve(lp);
  if (rep.status != SolveStatus::optimal) throw std::runtime_error("membership program failed: " + rep.message);
  return std::max(0.0, rep.objective);
}

bool AssumptionReport::passed() const {
  return std::all_of(items.begin(), items.end(), [](const AssumptionItem& i) { return i.passed; });
}

AssumptionReport assumption_probe(const Market& market, int samples, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = market.dim();

  auto random_vector = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
  };
  auto sample = [&](const Eigen::VectorXd& x) {
    const WealthBlock b = market.feasible_block(x);
    Eigen::VectorXd z(b.decisions());
    for (int i = 0; i < z.size(); ++i) z[i] = std::isfinite(b.lower[i]) ? b.lower[i] + unit(rng) : normal(rng);
    return b.wealth(z);
  };
  auto constant = [&](const Eigen::VectorXd& r) {
    return Eigen::MatrixXd(Eigen::VectorXd::Ones(market.outcomes()) * r.transpose());
  };

  AssumptionReport rep;
  auto record = [&](const std::string& name, double residual, double allowed) {
    auto it = std::find_if(rep.items.begin(), rep.items.end(), [&](const AssumptionItem& i) { return i.name == name; });
    if (it == rep.items.end()) {
      rep.items.push_back({name, true, 0.0});
      it = rep.items.end() - 1;
    }
    it->worst = std::max(it->worst, residual);
    if (residual > allowed) it->passed = false;
  };

  const Cone k0 = market.initial_cone();
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = random_vector(d);
    const Eigen::VectorXd y = random_vector(d);
    const double lambda = unit(rng);

    const Eigen::MatrixXd v1 = sample(x);
    const Eigen::MatrixXd v2 = sample(x);
    record("convex", membership_residual(market, x, lambda * v1 + (1 - lambda) * v2), tol);

    const Eigen::MatrixXd w2 = sample(y);
    record("mixture", membership_residual(market, lambda * x + (1 - lambda) * y, lambda * v1 + (1 - lambda) * w2), tol);

    Eigen::VectorXd up(d);
    for (int j = 0; j < d; ++j) up[j] = unit(rng);
    record("monotone", membership_residual(market, x + up, v1), tol);
    if (market.kind() == Market::Kind::conical) {
      Eigen::VectorXd kv = Eigen::VectorXd::Zero(d);
      for (const auto& g : k0.generators()) kv += unit(rng) * g;
      record("monotone_K0", membership_residual(market, x + kv, v1), tol);
    }

    const Eigen::VectorXd r = random_vector(d);
    record("translation", membership_residual(market, x + r, v1 + constant(r)), tol);

    for (double delta : {1e-2, 1e-4, 1e-6}) {
      const Eigen::MatrixXd v = sample(x + Eigen::VectorXd::Constant(d, delta));
      record("closed", membership_residual(market, x, v), delta + tol);
    }
  }
  return rep;
}

}  // namespace setprice
