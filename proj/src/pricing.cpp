#include "setprice/pricing.hpp"

#include "setprice/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace setprice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Wealth of a block with optional price variables in front of the market
// decisions: V(omega) = x0 + price_sign * p + coeff z. The utility argument
// is V + claim_sign * C.
struct Layout {
  int d = 1;           // price variables (0 for plain utility maximization)
  WealthBlock wealth;
  double price_sign = 0.0;
  double claim_sign = 1.0;

  int n() const { return d + wealth.decisions(); }
};

Layout make_layout(const Market& market, const Eigen::VectorXd& x0, int price_dim, double price_sign,
                   double claim_sign) {
  Layout l;
  l.d = price_dim;
  l.wealth = market.feasible_block(x0);
  l.price_sign = price_sign;
  l.claim_sign = claim_sign;
  return l;
}

ConvexProgram base_program(const Layout& l) {
  ConvexProgram prog(l.n());
  prog.lower.tail(l.wealth.decisions()) = l.wealth.lower;
  return prog;
}

// scale * E_Q u(V + claim_sign * C) over the layout's variables.
UtilityExpr expected_expr(const UtilityFunction& u, const Eigen::VectorXd& prior, const Layout& l,
                          const RandomVector& claim, double scale) {
  const WealthBlock& wb = l.wealth;
  const int dim = wb.dim;
  UtilityExpr e = UtilityExpr::affine(Eigen::VectorXd::Zero(l.n()));
  for (int w = 0; w < wb.outcomes; ++w) {
    if (prior[w] == 0.0 || scale == 0.0) continue;
    UtilityTerm t;
    t.weight = scale * prior[w];
    t.u = u;
    t.A = Eigen::MatrixXd::Zero(dim, l.n());
    if (l.d > 0) t.A.leftCols(l.d) = l.price_sign * Eigen::MatrixXd::Identity(dim, dim);
    for (int j = 0; j < dim; ++j) t.A.row(j).tail(wb.decisions()) = wb.coeff.row(wb.row(w, j));
    t.b = wb.endowment + l.claim_sign * claim.at(w);
    e.terms.push_back(std::move(t));
  }
  return e;
}

// sum over (prior, utility) of w_j E_Q u(V + C) - level
UtilityExpr weighted_expr(const PreferenceRepresentation& pref, const Layout& l, const RandomVector& claim,
                          const Eigen::VectorXd& w, double level) {
  UtilityExpr e = UtilityExpr::affine(Eigen::VectorXd::Zero(l.n()), -level);
  for (int a = 0; a < pref.s(); ++a) {
    for (int b = 0; b < pref.r(); ++b) {
      const double wj = w[pref.component(a, b)];
      if (wj == 0.0) continue;
      const UtilityExpr part = expected_expr(pref.utilities()[b], pref.priors()[a], l, claim, wj);
      for (const auto& t : part.terms) e.terms.push_back(t);
    }
  }
  return e;
}

void check_dims(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x,
                const RandomVector& claim) {
  if (pref.dim() != market.dim()) throw DimensionError("utility dimension differs from market dimension");
  if (pref.outcomes() != market.outcomes()) throw DimensionError("prior length differs from market outcomes");
  if (x.size() != market.dim()) throw DimensionError("endowment dimension differs from market dimension");
  if (claim.outcomes() != market.outcomes() || claim.dim() != market.dim())
    throw DimensionError("claim table must be outcomes x market dimension");
}

void check_single(const PreferenceRepresentation& pref) {
  if (pref.r() != 1 || pref.s() != 1) throw std::invalid_argument("a single utility and a single prior are required");
}

Cone price_cone(const Market& market, const PricingOptions& opt) {
  if (opt.price_cone) {
    if (opt.price_cone->dim() != market.dim()) throw DimensionError("price cone dimension differs from market");
    return *opt.price_cone;
  }
  return market.kind() == Market::Kind::frictionless ? Cone::orthant(market.dim()) : market.initial_cone();
}

Eigen::VectorXd utility_direction(const PricingOptions& opt, int q) {
  if (opt.direction.size() == 0) return Eigen::VectorXd::Constant(q, 1.0 / std::sqrt(static_cast<double>(q)));
  if (opt.direction.size() != q) throw DimensionError("direction k must have one entry per (prior, utility) pair");
  if ((opt.direction.array() <= 0.0).any()) throw std::invalid_argument("direction k must be strictly positive");
  return opt.direction;
}

// A price and a trade with price_sign * p + coeff z + claim_sign * C >= 1 in
// every outcome, cheapest along a direction inside the dual of `cone`. Added
// to a wealth decision it lifts that wealth by at least one unit while the
// claim is held, which makes a strictly feasible start for the price blocks.
std::optional<Eigen::VectorXd> hedge_offset(const Layout& l, const RandomVector& claim, const Cone& cone) {
  const WealthBlock& wb = l.wealth;
  const int n = l.n();
  ConvexProgram lp = base_program(l);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(l.d);
  for (const auto& nk : cone.normals()) dir += nk / nk.norm();
  if (dir.norm() == 0.0) dir = Eigen::VectorXd::Ones(l.d);
  lp.cost.head(l.d) = l.price_sign * dir;
  for (int w = 0; w < wb.outcomes; ++w) {
    for (int j = 0; j < wb.dim; ++j) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row[j] = l.price_sign;
      row.tail(wb.decisions()) = wb.coeff.row(wb.row(w, j)).transpose();
      lp.add_inequality(row, 1.0 - l.claim_sign * claim.at(w)[j]);
    }
  }
  const SolveReport rep = solve(lp);
  if (rep.status != SolveStatus::optimal) return std::nullopt;
  return rep.x;
}

// Hedge offset plus the wealth decision of a utility maximizer, pushed off
// the decision bounds.
Eigen::VectorXd block_start(const Layout& l, const Eigen::VectorXd& offset, const Eigen::VectorXd& decision) {
  Eigen::VectorXd x = offset;
  const int m = l.wealth.decisions();
  if (decision.size() == m) x.tail(m) += decision;
  for (int j = 0; j < m; ++j) {
    const double lo = l.wealth.lower[j];
    if (std::isfinite(lo)) x[l.d + j] = std::max(x[l.d + j], lo + 1e-3);
  }
  return x;
}

// Vector program in price space: one block per list of constraints, each with
// an optional start (empty vector for none).
CvopProblem price_problem(const Layout& l, Side side, const Cone& cone,
                          const std::vector<std::vector<UtilityExpr>>& constraints,
                          const std::vector<Eigen::VectorXd>& starts = {}) {
  CvopProblem p;
  p.q = l.d;
  p.ordering = cone;
  p.sense = side == Side::buy ? Sense::maximize : Sense::minimize;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& list = constraints[i];
    CvopBlock b;
    b.feasible = base_program(l);
    if (i < starts.size()) b.feasible.start = starts[i];
    for (const auto& c : list) b.feasible.add_concave(c);
    for (int j = 0; j < l.d; ++j) b.objectives.push_back(UtilityExpr::affine(Eigen::VectorXd::Unit(l.n(), j)));
    for (int j = 0; j < l.d; ++j) b.variable_names.push_back("p" + std::to_string(j));
    for (const auto& nm : l.wealth.names) b.variable_names.push_back(nm);
    p.blocks.push_back(std::move(b));
  }
  return p;
}

Eigen::MatrixXd block_wealth(const Layout& l, const Eigen::VectorXd& decision) {
  const Eigen::VectorXd p = decision.head(l.d);
  WealthBlock wb = l.wealth;
  wb.endowment = l.wealth.endowment + l.price_sign * p;
  return wb.wealth(decision.tail(l.wealth.decisions()));
}

Polyhedron half_line(double endpoint, bool lower_set) {
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, lower_set ? -1.0 : 1.0);
  return dd_convert(Polyhedron::from_halfspaces(1, {{a, lower_set ? -endpoint : endpoint}}));
}

// d = 1: every block is a scalar program and the price set is an interval.
PriceSet scalar_blocks(const CvopProblem& problem, const Layout& l, Side side, const Execution exec,
                       const SolverOptions& opt) {
  const int nb = static_cast<int>(problem.blocks.size());
  std::vector<WeightedSumResult> res(nb);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (int b = 0; b < nb; ++b) {
    CvopProblem single;
    single.q = 1;
    single.ordering = problem.ordering;
    single.sense = problem.sense;
    single.blocks = {problem.blocks[b]};
    try {
      res[b] = solve_weighted_sum(single, one, 0, opt);
    } catch (const std::exception& ex) {
      res[b].status = SolveStatus::max_iter;
      res[b].report.message = ex.what();
    }
  }
  PriceSet out;
  out.side = side;
  out.cone = problem.ordering;
  out.blocks = nb;
  const bool buy = side == Side::buy;
  double best = buy ? kInf : -kInf;
  int bind = -1;
  for (int b = 0; b < nb; ++b) {
    const auto& r = res[b];
    if (r.status == SolveStatus::infeasible) {
      out.status = CvopStatus::infeasible;
      out.message = "constraint block " + std::to_string(b) + " is infeasible";
      out.inner = out.outer = Polyhedron::empty_set(1);
      return out;
    }
    if (r.status == SolveStatus::unbounded) continue;
    if (r.status != SolveStatus::optimal) {
      out.status = CvopStatus::failed;
      out.message = "constraint block " + std::to_string(b) + ": " + r.report.message;
      return out;
    }
    out.max_kkt_residual = std::max(out.max_kkt_residual, r.report.kkt_residual());
    const double v = r.image[0];
    if (buy ? v < best : v > best) {
      best = v;
      bind = b;
    }
  }
  if (bind < 0) {
    out.status = CvopStatus::unbounded;
    out.message = "price is unbounded in every constraint block";
    out.inner = out.outer = Polyhedron::whole_space(1);
    return out;
  }
  out.status = CvopStatus::solved;
  out.endpoint = best;
  out.inner = out.outer = half_line(best, buy);
  // A block optimum at its own price stays feasible at the binding price
  // because A(.) is monotone.
  Hedge h;
  h.price = Eigen::VectorXd::Constant(1, best);
  for (int b = 0; b < nb; ++b)
    if (res[b].status == SolveStatus::optimal) h.wealth.push_back(block_wealth(l, res[b].x));
  out.hedges.push_back(std::move(h));
  return out;
}

PriceSet vector_blocks(const CvopProblem& problem, const Layout& l, Side side, const PricingOptions& opt) {
  PriceSet out;
  out.side = side;
  out.cone = problem.ordering;
  out.blocks = static_cast<int>(problem.blocks.size());
  const EpsilonSolution sol = solve_cvop(problem, opt.epsilon, opt.benson);
  out.status = sol.status;
  out.message = sol.message;
  out.max_kkt_residual = sol.max_kkt_residual;
  if (sol.status == CvopStatus::infeasible) {
    out.inner = out.outer = Polyhedron::empty_set(l.d);
    return out;
  }
  if (sol.status != CvopStatus::solved && sol.status != CvopStatus::partial) return out;
  out.inner = sol.inner;
  out.outer = sol.outer;
  for (const auto& pt : sol.points) {
    Hedge h;
    h.price = pt.image;
    for (const auto& dec : pt.decisions) h.wealth.push_back(block_wealth(l, dec));
    out.hedges.push_back(std::move(h));
  }
  return out;
}

PriceSet solve_price_problem(const CvopProblem& problem, const Layout& l, Side side, const PricingOptions& opt) {
  if (l.d == 1) return scalar_blocks(problem, l, side, opt.benson.execution, opt.benson.solver);
  return vector_blocks(problem, l, side, opt);
}

Layout price_layout(const Market& market, const Eigen::VectorXd& x0, Side side) {
  const bool buy = side == Side::buy;
  return make_layout(market, x0, market.dim(), buy ? -1.0 : 1.0, buy ? 1.0 : -1.0);
}

CvopProblem plain_utility_problem(const PreferenceRepresentation& pref, const Layout& l, const RandomVector& claim,
                                  const Eigen::VectorXd& direction) {
  CvopProblem p;
  p.q = pref.q();
  p.ordering = Cone::orthant(p.q);
  p.direction = direction;
  p.sense = Sense::maximize;
  CvopBlock b;
  b.feasible = base_program(l);
  b.variable_names = l.wealth.names;
  for (int a = 0; a < pref.s(); ++a)
    for (int u = 0; u < pref.r(); ++u)
      b.objectives.push_back(expected_expr(pref.utilities()[u], pref.priors()[a], l, claim, 1.0));
  p.blocks.push_back(std::move(b));
  return p;
}

}  // namespace

const char* to_string(Side s) { return s == Side::buy ? "buy" : "sell"; }

const char* to_string(Membership m) {
  switch (m) {
    case Membership::in_subset:
      return "in_subset";
    case Membership::in_superset_only:
      return "in_superset_only";
    case Membership::outside:
      return "outside";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Certainty equivalents

std::vector<double> ce_levels(const PreferenceRepresentation& pref, const RandomVector& z, CeRegion region) {
  if (z.dim() != pref.dim() || z.outcomes() != pref.outcomes()) throw DimensionError("payoff shape differs from preference");
  std::vector<double> out;
  for (const auto& u : pref.utilities()) {
    double level = region == CeRegion::upper ? -kInf : kInf;
    for (const auto& q : pref.priors()) {
      const double v = expected_utility(u, q, z).value();
      level = region == CeRegion::upper ? std::max(level, v) : std::min(level, v);
    }
    out.push_back(level);
  }
  return out;
}

bool ce_membership(const PreferenceRepresentation& pref, const Eigen::VectorXd& c, const RandomVector& z,
                   CeRegion region, double tol) {
  if (c.size() != pref.dim()) throw DimensionError("point dimension differs from preference");
  const auto levels = ce_levels(pref, z, region);
  for (int i = 0; i < pref.r(); ++i) {
    const double uc = pref.utilities()[i].value(c).value();
    if (region == CeRegion::upper) {
      if (levels[i] == -kInf) continue;
      if (uc < levels[i] - tol) return false;
    } else {
      if (uc == -kInf) continue;
      if (uc > levels[i] + tol) return false;
    }
  }
  return true;
}

namespace {

bool single_coordinate(const UtilityFunction& u) {
  return u.composition() == Composition::component || (u.composition() == Composition::univariate && u.dim() == 1);
}

int coordinate_of(const UtilityFunction& u) { return u.composition() == Composition::component ? u.index() : 0; }

// c with u(c) = level along the utility's own coordinate.
double coordinate_level(const UtilityFunction& u, double level) {
  if (level == -kInf) return -kInf;
  const auto c = u.inverse_scalar(level);
  if (!c) throw std::runtime_error("expected utility level outside the range of the utility");
  return *c;
}

Polyhedron orthant_region(const Eigen::VectorXd& corner) {
  const int d = static_cast<int>(corner.size());
  std::vector<Halfspace> hs;
  for (int i = 0; i < d; ++i)
    if (std::isfinite(corner[i])) hs.push_back({Eigen::VectorXd::Unit(d, i), corner[i]});
  return dd_convert(Polyhedron::from_halfspaces(d, std::move(hs)));
}

RegionApprox exact_region(Polyhedron p) {
  RegionApprox r;
  r.inner = p;
  r.outer = std::move(p);
  return r;
}

// Upper image of: minimize c subject to u(c) >= level for the listed utilities.
RegionApprox region_cvop(const PreferenceRepresentation& pref, const std::vector<int>& which,
                         const std::vector<double>& levels, const PricingOptions& opt) {
  const int d = pref.dim();
  CvopProblem p;
  p.q = d;
  p.ordering = Cone::orthant(d);
  p.sense = Sense::minimize;
  CvopBlock b;
  b.feasible = ConvexProgram(d);
  for (int j = 0; j < d; ++j) {
    b.objectives.push_back(UtilityExpr::affine(Eigen::VectorXd::Unit(d, j)));
    b.variable_names.push_back("c" + std::to_string(j));
  }
  for (int i : which) {
    if (levels[i] == -kInf) continue;
    UtilityExpr e = UtilityExpr::affine(Eigen::VectorXd::Zero(d), -levels[i]);
    UtilityTerm t;
    t.u = pref.utilities()[i];
    t.A = Eigen::MatrixXd::Identity(d, d);
    t.b = Eigen::VectorXd::Zero(d);
    e.terms.push_back(std::move(t));
    b.feasible.add_concave(std::move(e));
  }
  p.blocks.push_back(std::move(b));
  const EpsilonSolution sol = solve_cvop(p, opt.epsilon, opt.benson);
  RegionApprox r;
  r.status = sol.status;
  r.message = sol.message;
  if (sol.status == CvopStatus::solved || sol.status == CvopStatus::partial) {
    r.inner = sol.inner;
    r.outer = sol.outer;
  }
  return r;
}

}  // namespace

CeResult ce_regions(const PreferenceRepresentation& pref, const RandomVector& z, const PricingOptions& options) {
  const int d = pref.dim();
  const auto up = ce_levels(pref, z, CeRegion::upper);
  const auto low = ce_levels(pref, z, CeRegion::lower);
  CeResult out;
  const auto& us = pref.utilities();
  const bool closed = std::all_of(us.begin(), us.end(), [](const UtilityFunction& u) { return single_coordinate(u); });

  if (closed) {
    out.method = "closed_form";
    Eigen::VectorXd weak = Eigen::VectorXd::Constant(d, -kInf);
    Eigen::VectorXd strong = Eigen::VectorXd::Constant(d, kInf);
    std::vector<bool> covered(d, false);
    for (int i = 0; i < pref.r(); ++i) {
      const int j = coordinate_of(us[i]);
      covered[j] = true;
      const double a = coordinate_level(us[i], up[i]);
      const double b = coordinate_level(us[i], low[i]);
      weak[j] = std::max(weak[j], a);
      strong[j] = std::min(strong[j], b);
      Eigen::VectorXd corner = Eigen::VectorXd::Constant(d, -kInf);
      corner[j] = b;
      out.lower_complement.push_back(exact_region(orthant_region(corner)));
    }
    out.upper = exact_region(orthant_region(weak));
    out.weak_point = weak;
    out.strong_point = strong;
    if (d == 1) {
      out.weak = weak[0];
      out.strong = strong[0];
    }
    bool meet = std::all_of(covered.begin(), covered.end(), [](bool b) { return b; });
    for (int j = 0; meet && j < d; ++j)
      meet = std::abs(weak[j] - strong[j]) <= 1e-12 * std::max(1.0, std::abs(weak[j]));
    if (meet) out.point = weak;
    return out;
  }

  out.method = "cvop";
  std::vector<int> all(pref.r());
  for (int i = 0; i < pref.r(); ++i) all[i] = i;
  out.upper = region_cvop(pref, all, up, options);
  for (int i = 0; i < pref.r(); ++i) {
    if (single_coordinate(us[i])) {
      // A one-coordinate constraint gives a halfspace; as a vector program it
      // would be unbounded in the other coordinates.
      Eigen::VectorXd corner = Eigen::VectorXd::Constant(d, -kInf);
      corner[coordinate_of(us[i])] = coordinate_level(us[i], low[i]);
      out.lower_complement.push_back(exact_region(orthant_region(corner)));
    } else {
      out.lower_complement.push_back(region_cvop(pref, {i}, low, options));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Utility maximization

CvopProblem utility_problem(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x,
                            const RandomVector& claim, const Eigen::VectorXd& direction) {
  check_dims(pref, market, x, claim);
  const Layout l = make_layout(market, x, 0, 0.0, 1.0);
  return plain_utility_problem(pref, l, claim, direction);
}

UtilityMaxResult utility_maximization(const PreferenceRepresentation& pref, const Market& market,
                                      const Eigen::VectorXd& x, const RandomVector& claim,
                                      const PricingOptions& options) {
  check_dims(pref, market, x, claim);
  const Layout l = make_layout(market, x, 0, 0.0, 1.0);
  const CvopProblem p = plain_utility_problem(pref, l, claim, utility_direction(options, pref.q()));
  UtilityMaxResult out;
  out.solution = solve_cvop(p, options.epsilon, options.benson);
  for (const auto& pt : out.solution.points) out.hedges.push_back(l.wealth.wealth(pt.decisions.front()));
  return out;
}

std::optional<double> weighted_utility_value(const PreferenceRepresentation& pref, const Market& market,
                                             const Eigen::VectorXd& x, const RandomVector& claim,
                                             const Eigen::VectorXd& w, Eigen::MatrixXd* hedge) {
  check_dims(pref, market, x, claim);
  if (w.size() != pref.q()) throw DimensionError("weight has wrong dimension");
  const Layout l = make_layout(market, x, 0, 0.0, 1.0);
  const CvopProblem p = plain_utility_problem(pref, l, claim, {});
  const WeightedSumResult r = solve_weighted_sum(p, w, 0);
  if (r.status != SolveStatus::optimal) return std::nullopt;
  if (hedge) *hedge = l.wealth.wealth(r.x);
  return r.value;
}

double reservation_utility(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x0) {
  check_single(pref);
  const RandomVector zero = RandomVector::constant(market.outcomes(), Eigen::VectorXd::Zero(market.dim()));
  const auto v = weighted_utility_value(pref, market, x0, zero, Eigen::VectorXd::Ones(1));
  if (!v) throw std::runtime_error("utility maximization without the claim was not solved");
  return *v;
}

// ---------------------------------------------------------------------------
// Prices

namespace {

// weight_levels that also reports the point attaining each level.
void weight_levels_at(const EpsilonSolution& umax, std::vector<Eigen::VectorXd>& weights,
                      std::vector<double>& levels, std::vector<int>& source, double tol) {
  weights.clear();
  levels.clear();
  source.clear();
  for (std::size_t p = 0; p < umax.points.size(); ++p) {
    const auto& pt = umax.points[p];
    bool merged = false;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if ((weights[i] - pt.weight).cwiseAbs().maxCoeff() <= tol) {
        if (pt.value > levels[i]) {
          levels[i] = pt.value;
          source[i] = static_cast<int>(p);
        }
        merged = true;
        break;
      }
    }
    if (!merged) {
      weights.push_back(pt.weight);
      levels.push_back(pt.value);
      source.push_back(static_cast<int>(p));
    }
  }
}

Eigen::VectorXd point_decision(const EpsilonSolution& umax, int i) {
  const auto& d = umax.points[i].decisions;
  return d.empty() ? Eigen::VectorXd() : d.front();
}

}  // namespace

void weight_levels(const EpsilonSolution& umax, std::vector<Eigen::VectorXd>& weights, std::vector<double>& levels,
                   double tol) {
  std::vector<int> source;
  weight_levels_at(umax, weights, levels, source, tol);
}

namespace {

void check_umax(const PreferenceRepresentation& pref, const EpsilonSolution& umax) {
  if (umax.status != CvopStatus::solved && umax.status != CvopStatus::partial)
    throw std::invalid_argument("utility maximization solution is not usable");
  if (umax.sense != Sense::maximize) throw std::invalid_argument("utility maximization must be a maximization");
  if (umax.points.empty()) throw std::invalid_argument("utility maximization solution has no points");
  if (umax.points.front().image.size() != pref.q()) throw DimensionError("solution does not match the preference");
}

}  // namespace

PriceSet price_superset(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x0,
                        const RandomVector& claim, Side side, const EpsilonSolution& umax,
                        const PricingOptions& options) {
  check_dims(pref, market, x0, claim);
  check_umax(pref, umax);
  const Layout l = price_layout(market, x0, side);
  const Cone cone = price_cone(market, options);
  std::vector<Eigen::VectorXd> ws;
  std::vector<double> vs;
  std::vector<int> source;
  weight_levels_at(umax, ws, vs, source, 1e-9);
  const auto offset = hedge_offset(l, claim, cone);
  std::vector<std::vector<UtilityExpr>> blocks;
  std::vector<Eigen::VectorXd> starts;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    blocks.push_back({weighted_expr(pref, l, claim, ws[i], vs[i])});
    if (offset) starts.push_back(block_start(l, *offset, point_decision(umax, source[i])));
  }
  const CvopProblem p = price_problem(l, side, cone, blocks, starts);
  return solve_price_problem(p, l, side, options);
}

PriceSet price_subset(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x0,
                      const RandomVector& claim, Side side, const EpsilonSolution& umax,
                      const PricingOptions& options) {
  check_dims(pref, market, x0, claim);
  check_umax(pref, umax);
  const Layout l = price_layout(market, x0, side);
  const Eigen::VectorXd k = umax.direction;
  const Cone cone = price_cone(market, options);
  const auto offset = hedge_offset(l, claim, cone);
  std::vector<std::vector<UtilityExpr>> blocks;
  std::vector<Eigen::VectorXd> starts;
  for (std::size_t i = 0; i < umax.points.size(); ++i) {
    const auto& pt = umax.points[i];
    if (offset) starts.push_back(block_start(l, *offset, point_decision(umax, static_cast<int>(i))));
    std::vector<UtilityExpr> list;
    for (int a = 0; a < pref.s(); ++a) {
      for (int b = 0; b < pref.r(); ++b) {
        const int j = pref.component(a, b);
        UtilityExpr e = expected_expr(pref.utilities()[b], pref.priors()[a], l, claim, 1.0);
        e.constant -= pt.image[j] + umax.epsilon * k[j];
        list.push_back(std::move(e));
      }
    }
    blocks.push_back(std::move(list));
  }
  const CvopProblem p = price_problem(l, side, cone, blocks, starts);
  return solve_price_problem(p, l, side, options);
}

PriceBounds price_bounds(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x0,
                         const RandomVector& claim, Side side, const EpsilonSolution& umax,
                         const PricingOptions& options) {
  PriceBounds out;
  out.side = side;
  out.epsilon = umax.epsilon;
  weight_levels(umax, out.weights, out.levels);
  out.superset = price_superset(pref, market, x0, claim, side, umax, options);
  out.subset = price_subset(pref, market, x0, claim, side, umax, options);
  return out;
}

namespace {

CvopProblem exact_problem(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x0,
                          const RandomVector& claim, Side side, const PricingOptions& options, Layout& l) {
  check_dims(pref, market, x0, claim);
  check_single(pref);
  const double v0 = reservation_utility(pref, market, x0);
  l = price_layout(market, x0, side);
  const Cone cone = price_cone(market, options);
  std::vector<std::vector<UtilityExpr>> blocks{
      {weighted_expr(pref, l, claim, Eigen::VectorXd::Ones(1), v0)}};
  std::vector<Eigen::VectorXd> starts;
  if (const auto offset = hedge_offset(l, claim, cone)) starts.push_back(block_start(l, *offset, {}));
  return price_problem(l, side, cone, blocks, starts);
}

}  // namespace

PriceSet price_exact_single_utility(const PreferenceRepresentation& pref, const Market& market,
                                    const Eigen::VectorXd& x0, const RandomVector& claim, Side side,
                                    const PricingOptions& options) {
  Layout l;
  const CvopProblem p = exact_problem(pref, market, x0, claim, side, options, l);
  return solve_price_problem(p, l, side, options);
}

double scalar_price(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x0,
                    const RandomVector& claim, int currency, Side side, const PricingOptions& options) {
  if (currency < 0 || currency >= market.dim()) throw std::invalid_argument("currency index out of range");
  Layout l;
  const CvopProblem p = exact_problem(pref, market, x0, claim, side, options, l);
  const int d = market.dim();
  const PsResult r = solve_pascoletti_serafini(p, Eigen::VectorXd::Zero(d), Eigen::VectorXd::Unit(d, currency), 0,
                                               options.benson.solver);
  if (r.status != SolveStatus::optimal)
    throw std::runtime_error(std::string("scalar price program ended with status ") + to_string(r.status));
  return side == Side::buy ? -r.rho : r.rho;
}

// ---------------------------------------------------------------------------
// Hedging sets

PriceSet superhedging(const Market& market, const RandomVector& claim, const PricingOptions& options) {
  if (claim.outcomes() != market.outcomes() || claim.dim() != market.dim())
    throw DimensionError("claim table must be outcomes x market dimension");
  const int d = market.dim();
  const Layout l = make_layout(market, Eigen::VectorXd::Zero(d), d, 1.0, 0.0);
  CvopProblem p;
  p.q = d;
  p.ordering = price_cone(market, options);
  p.sense = Sense::minimize;
  CvopBlock b;
  b.feasible = base_program(l);
  const WealthBlock& wb = l.wealth;
  for (int w = 0; w < wb.outcomes; ++w) {
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(l.n());
      row[j] = 1.0;
      row.tail(wb.decisions()) = wb.coeff.row(wb.row(w, j)).transpose();
      b.feasible.add_equality(row, claim.values()(w, j));
    }
  }
  for (int j = 0; j < d; ++j) {
    b.objectives.push_back(UtilityExpr::affine(Eigen::VectorXd::Unit(l.n(), j)));
    b.variable_names.push_back("p" + std::to_string(j));
  }
  for (const auto& nm : wb.names) b.variable_names.push_back(nm);
  p.blocks.push_back(std::move(b));
  return solve_price_problem(p, l, Side::sell, options);
}

PriceSet subhedging(const Market& market, const RandomVector& claim, const PricingOptions& options) {
  PriceSet s = superhedging(market, -claim, options);
  s.side = Side::buy;
  if (s.status == CvopStatus::solved || s.status == CvopStatus::partial) {
    s.inner = s.inner.negated();
    s.outer = s.outer.negated();
  } else if (s.status == CvopStatus::infeasible) {
    s.inner = s.outer = Polyhedron::empty_set(market.dim());
  }
  if (s.endpoint) s.endpoint = -*s.endpoint;
  for (auto& h : s.hedges) {
    h.price = -h.price;
    for (auto& w : h.wealth) w = -w;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Trade matching

TradeMatch trade_match(const Agent& buyer, const Agent& seller, const Market& market, const RandomVector& claim) {
  check_single(buyer.pref);
  check_single(seller.pref);
  check_dims(buyer.pref, market, buyer.endowment, claim);
  check_dims(seller.pref, market, seller.endowment, claim);
  const int d = market.dim();
  const double vb = reservation_utility(buyer.pref, market, buyer.endowment);
  const double vs = reservation_utility(seller.pref, market, seller.endowment);
  const Layout lb = price_layout(market, buyer.endowment, Side::buy);
  const Layout ls = price_layout(market, seller.endowment, Side::sell);
  const int nb = lb.n();
  const int ns = ls.n();
  const int n = nb + ns + 1;  // buyer block, seller block, squared distance

  auto place = [&](UtilityExpr e, int offset) {
    UtilityExpr out = UtilityExpr::affine(Eigen::VectorXd::Zero(n), e.constant);
    out.linear.segment(offset, e.linear.size()) = e.linear;
    for (auto t : e.terms) {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(t.A.rows(), n);
      A.middleCols(offset, t.A.cols()) = t.A;
      t.A = std::move(A);
      out.terms.push_back(std::move(t));
    }
    return out;
  };

  ConvexProgram prog(n);
  prog.lower.segment(d, lb.wealth.decisions()) = lb.wealth.lower;
  prog.lower.segment(nb + d, ls.wealth.decisions()) = ls.wealth.lower;
  prog.cost = Eigen::VectorXd::Unit(n, n - 1);
  prog.add_concave(place(weighted_expr(buyer.pref, lb, claim, Eigen::VectorXd::Ones(1), vb), 0));
  prog.add_concave(place(weighted_expr(seller.pref, ls, claim, Eigen::VectorXd::Ones(1), vs), nb));
  QuadraticConstraint qc;
  qc.linear = Eigen::VectorXd::Unit(n, n - 1);
  qc.D = Eigen::MatrixXd::Zero(d, n);
  qc.D.leftCols(d) = Eigen::MatrixXd::Identity(d, d);
  qc.D.middleCols(nb, d) = -Eigen::MatrixXd::Identity(d, d);
  qc.e = Eigen::VectorXd::Zero(d);
  prog.add_quadratic(std::move(qc));

  const SolveReport rep = solve(prog);
  TradeMatch out;
  out.message = rep.message;
  if (rep.status != SolveStatus::optimal) {
    if (out.message.empty()) out.message = std::string("trade matching program ended with status ") + to_string(rep.status);
    return out;
  }
  out.solved = true;
  const Eigen::VectorXd zb = rep.x.head(nb);
  const Eigen::VectorXd zs = rep.x.segment(nb, ns);
  out.buy_price = zb.head(d);
  out.sell_price = zs.head(d);
  out.distance = (out.buy_price - out.sell_price).norm();
  out.buyer_wealth = block_wealth(lb, zb);
  out.seller_wealth = block_wealth(ls, zs);
  return out;
}

// ---------------------------------------------------------------------------
// Membership

MembershipReport price_membership(const PreferenceRepresentation& pref, const Market& market,
                                  const Eigen::VectorXd& x0, const RandomVector& claim, const Eigen::VectorXd& p,
                                  Side side, const EpsilonSolution& umax, double tol) {
  check_dims(pref, market, x0, claim);
  check_umax(pref, umax);
  if (p.size() != market.dim()) throw DimensionError("price dimension differs from market");
  const bool buy = side == Side::buy;
  const Eigen::VectorXd x = buy ? Eigen::VectorXd(x0 - p) : Eigen::VectorXd(x0 + p);
  const RandomVector signed_claim = buy ? claim : -claim;

  MembershipReport rep;
  std::vector<Eigen::VectorXd> ws;
  std::vector<double> vs;
  weight_levels(umax, ws, vs);
  rep.weighted_gap = kInf;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const auto v = weighted_utility_value(pref, market, x, signed_claim, ws[i]);
    const double gap = v ? *v - vs[i] : -kInf;
    if (gap < rep.weighted_gap) {
      rep.weighted_gap = gap;
      rep.weight = ws[i];
    }
  }

  // Largest common slack s <= 1 in U(V + C) >= U(X^i) + eps k + s.
  const Layout l = make_layout(market, x, 0, 0.0, 1.0);
  const int n = l.n();
  rep.subset_slack = kInf;
  for (const auto& pt : umax.points) {
    ConvexProgram prog(n + 1);
    prog.lower.head(l.wealth.decisions()) = l.wealth.lower;
    prog.upper[n] = 1.0;
    prog.cost = -Eigen::VectorXd::Unit(n + 1, n);
    for (int a = 0; a < pref.s(); ++a) {
      for (int b = 0; b < pref.r(); ++b) {
        const int j = pref.component(a, b);
        UtilityExpr e = expected_expr(pref.utilities()[b], pref.priors()[a], l, signed_claim, 1.0);
        e.constant -= pt.image[j] + umax.epsilon * umax.direction[j];
        e.linear.conservativeResize(n + 1);
        e.linear[n] = -1.0;
        for (auto& t : e.terms) {
          t.A.conservativeResize(t.A.rows(), n + 1);
          t.A.col(n).setZero();
        }
        prog.add_concave(std::move(e));
      }
    }
    const SolveReport r = solve(prog);
    const double s = r.status == SolveStatus::optimal ? -r.objective : -kInf;
    rep.subset_slack = std::min(rep.subset_slack, s);
  }

  if (rep.subset_slack >= -tol)
    rep.status = Membership::in_subset;
  else if (rep.weighted_gap < -tol)
    rep.status = Membership::outside;
  else
    rep.status = Membership::in_superset_only;
  return rep;
}

double exchange_budget(const Cone& k0, const Eigen::VectorXd& x, int currency) {
  if (x.size() != k0.dim()) throw DimensionError("position dimension differs from cone");
  if (currency < 0 || currency >= k0.dim()) throw std::invalid_argument("currency index out of range");
  // x - a e_j in K_0  <=>  n.x >= a n_j for every normal n
  double hi = kInf;
  double lo = -kInf;
  for (const auto& nk : k0.normals()) {
    const double nj = nk[currency];
    const double nx = nk.dot(x);
    if (nj > 1e-14)
      hi = std::min(hi, nx / nj);
    else if (nj < -1e-14)
      lo = std::max(lo, nx / nj);
    else if (nx < -1e-12)
      return -kInf;
  }
  return hi >= lo ? hi : -kInf;
}

}  // namespace setprice
