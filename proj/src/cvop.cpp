#include "setprice/cvop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace setprice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// half-width of the decision box used by the initial weighted-sum problems
constexpr double kInitBox = 1e4;

// Objectives rewritten for minimization.
std::vector<UtilityExpr> min_form(const CvopProblem& p, int block) {
  std::vector<UtilityExpr> g;
  for (const auto& f : p.blocks[block].objectives) g.push_back(p.sense == Sense::maximize ? f.scaled(-1.0) : f);
  return g;
}

bool all_affine(const std::vector<UtilityExpr>& g, const Eigen::VectorXd& w) {
  for (std::size_t i = 0; i < g.size(); ++i)
    if (w[static_cast<int>(i)] != 0.0 && !g[i].is_affine()) return false;
  return true;
}

// sum_i w_i g_i as one expression over n variables.
UtilityExpr combine(const std::vector<UtilityExpr>& g, const Eigen::VectorXd& w, int n) {
  UtilityExpr out = UtilityExpr::affine(Eigen::VectorXd::Zero(n));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double wi = w[static_cast<int>(i)];
    if (wi == 0.0) continue;
    out.linear += wi * g[i].linear;
    out.constant += wi * g[i].constant;
    for (auto t : g[i].terms) {
      t.weight *= wi;
      out.terms.push_back(std::move(t));
    }
  }
  return out;
}

// Pads an expression with zero columns up to n variables.
UtilityExpr widen(UtilityExpr e, int n) {
  const int old = static_cast<int>(e.linear.size());
  e.linear.conservativeResize(n);
  e.linear.tail(n - old).setZero();
  for (auto& t : e.terms) {
    t.A.conservativeResize(t.A.rows(), n);
    t.A.rightCols(n - old).setZero();
  }
  return e;
}

Eigen::VectorXd eval_all(const std::vector<UtilityExpr>& g, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) y[static_cast<int>(i)] = g[i].value(x);
  return y;
}

// The supplied start of a block, or the origin, moved just inside violated
// simple bounds. Subproblems seed their epigraph variable from it.
Eigen::VectorXd block_guess(const ConvexProgram& prog) {
  const int n = prog.n();
  Eigen::VectorXd x = prog.start.size() == n ? prog.start : Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const double lo = prog.lower[j];
    const double up = prog.upper[j];
    const double gap = std::isfinite(lo) && std::isfinite(up) ? std::min(1e-2, 0.25 * (up - lo)) : 1e-2;
    if (x[j] <= lo) x[j] = lo + gap;
    if (x[j] >= up) x[j] = up - gap;
  }
  return x;
}

struct WsMin {
  SolveStatus status = SolveStatus::max_iter;
  Eigen::VectorXd x;
  Eigen::VectorXd image;
  double value = 0.0;
  SolveReport report;
};

// With box > 0 every decision is confined to [-box, box]. Weights on the
// boundary of the dual cone can have unbounded optimal faces on which the
// barrier iterates would drift away; the box gives them a center. A box bound
// that still carries a multiplier at the end means the objective really
// decreases without bound.
WsMin weighted_sum_min(const CvopProblem& p, int block, const Eigen::VectorXd& w, const SolverOptions& opt,
                       double box = 0.0) {
  const auto g = min_form(p, block);
  const CvopBlock& b = p.blocks[block];
  const int n = b.feasible.n();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!g[i].is_affine() && w[static_cast<int>(i)] < 0.0)
      throw std::invalid_argument("weighted sum with a negative weight on a nonlinear objective is not convex");
  ConvexProgram prog = b.feasible;
  if (box > 0.0) {
    prog.lower = prog.lower.cwiseMax(-box);
    prog.upper = prog.upper.cwiseMin(box);
  }
  const UtilityExpr combined = combine(g, w, n);
  if (all_affine(g, w)) {
    prog.cost = combined.linear;
    prog.cost_constant = combined.constant;
  } else {
    prog.start = block_guess(prog);
    const double f = combined.value(prog.start);
    prog.extend(1);
    prog.cost = Eigen::VectorXd::Unit(n + 1, n);
    if (std::isfinite(f)) prog.start[n] = f + 1.0;
    UtilityExpr epi = widen(combined.scaled(-1.0), n + 1);
    epi.linear[n] += 1.0;
    prog.add_concave(std::move(epi));
  }
  WsMin out;
  out.report = solve(prog, opt);
  out.status = out.report.status;
  out.x = out.report.x.head(n);
  if (box > 0.0 && out.status == SolveStatus::optimal) {
    const double scale = 1e-7 * std::max(1.0, w.cwiseAbs().maxCoeff());
    for (int j = 0; j < n; ++j) {
      const bool at_lo = b.feasible.lower[j] < -box && out.report.dual_lower[j] > scale;
      const bool at_up = b.feasible.upper[j] > box && out.report.dual_upper[j] > scale;
      if (at_lo || at_up) {
        out.status = SolveStatus::unbounded;
        out.report.status = SolveStatus::unbounded;
        out.report.message = "weighted sum decreases until the decision box";
        return out;
      }
    }
  }
  if (out.status == SolveStatus::optimal) {
    out.image = eval_all(g, out.x);
    // objectives with zero weight may be infinite at a point that only optimizes the others
    out.value = 0.0;
    for (int i = 0; i < w.size(); ++i)
      if (w[i] != 0.0) out.value += w[i] * out.image[i];
  }
  return out;
}

struct PsMin {
  SolveStatus status = SolveStatus::max_iter;
  double rho = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd image;
  Eigen::VectorXd weight;
  double offset = 0.0;
  SolveReport report;
};

PsMin ps_min(const CvopProblem& p, int block, const Eigen::VectorXd& v, const Eigen::VectorXd& d,
             const SolverOptions& opt) {
  const auto g = min_form(p, block);
  const CvopBlock& b = p.blocks[block];
  const int n = b.feasible.n();
  ConvexProgram prog = b.feasible;
  const Eigen::VectorXd x = block_guess(prog);
  prog.start = x;
  prog.extend(1);
  prog.cost = Eigen::VectorXd::Unit(n + 1, n);
  const auto& normals = p.ordering.normals();
  // normal row i lives in G (linear) or in the concave list
  std::vector<std::pair<bool, int>> where;
  for (const auto& nk : normals) {
    UtilityExpr row = widen(combine(g, nk, n).scaled(-1.0), n + 1);
    row.linear[n] += nk.dot(d);
    row.constant += nk.dot(v);
    if (row.is_affine()) {
      where.emplace_back(false, static_cast<int>(prog.G.rows()));
      prog.add_inequality(row.linear, -row.constant);
    } else {
      where.emplace_back(true, static_cast<int>(prog.concave.size()));
      prog.add_concave(std::move(row));
    }
  }
  {
    // smallest rho that makes the guess satisfy every normal row, plus one
    double rho = -kInf;
    bool ok = true;
    for (const auto& nk : normals) {
      const double gx = combine(g, nk, n).value(x);
      ok = ok && std::isfinite(gx);
      rho = std::max(rho, (gx - nk.dot(v)) / nk.dot(d));
    }
    if (ok && std::isfinite(rho)) prog.start[n] = rho + 1.0;
  }
  PsMin out;
  out.report = solve(prog, opt);
  out.status = out.report.status;
  out.x = out.report.x.head(n);
  out.rho = out.report.x[n];
  if (out.status != SolveStatus::optimal) return out;
  out.image = eval_all(g, out.x);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p.q);
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const double lam = where[i].first ? out.report.dual_concave[where[i].second] : out.report.dual_ineq[where[i].second];
    w += lam * normals[i];
  }
  const double wd = w.dot(d);
  if (wd > 0.0) w /= wd;
  out.weight = w;
  // The dual bound only certifies the level up to the barrier gap.
  out.offset = w.dot(v + out.rho * d) - out.report.gap;
  return out;
}

bool same_cut(const Halfspace& a, const Eigen::VectorXd& w, double beta, double tol) {
  const double na = a.a.norm();
  const double nw = w.norm();
  if ((a.a / na - w / nw).norm() > tol) return false;
  return std::abs(a.b / na - beta / nw) <= tol * std::max(1.0, std::abs(beta / nw));
}

}  // namespace

const char* to_string(Sense s) { return s == Sense::minimize ? "minimize" : "maximize"; }
const char* to_string(Execution e) { return e == Execution::serial ? "serial" : "parallel"; }

const char* to_string(CvopStatus s) {
  switch (s) {
    case CvopStatus::solved:
      return "solved";
    case CvopStatus::partial:
      return "partial";
    case CvopStatus::unbounded:
      return "unbounded";
    case CvopStatus::infeasible:
      return "infeasible";
    case CvopStatus::failed:
      return "failed";
  }
  return "?";
}

Eigen::VectorXd CvopProblem::k() const {
  if (direction.size() == 0) return ordering.default_direction();
  return direction;
}

void CvopProblem::validate() const {
  if (q <= 0) throw std::invalid_argument("objective dimension must be positive");
  if (ordering.dim() != q) throw DimensionError("ordering cone dimension differs from objective dimension");
  if (!ordering.is_pointed()) throw std::invalid_argument("ordering cone must be pointed");
  if (blocks.empty()) throw std::invalid_argument("vector problem needs at least one block");
  const Eigen::VectorXd kk = k();
  if (kk.size() != q) throw DimensionError("direction k has wrong dimension");
  if (!ordering.interior(kk)) throw std::invalid_argument("direction k must lie in the interior of the ordering cone");
  std::vector<bool> nonlinear(q, false);
  for (const auto& b : blocks) {
    b.feasible.validate();
    if (static_cast<int>(b.objectives.size()) != q) throw DimensionError("block has wrong number of objectives");
    for (int i = 0; i < q; ++i) {
      const auto& f = b.objectives[i];
      if (f.linear.size() != b.feasible.n()) throw DimensionError("objective length differs from block variables");
      for (const auto& t : f.terms) {
        if (t.A.cols() != b.feasible.n()) throw DimensionError("objective utility map has wrong width");
        const bool ok = sense == Sense::minimize ? t.weight <= 0.0 : t.weight >= 0.0;
        if (!ok) throw std::invalid_argument("objective is not convex in the problem's sense");
        nonlinear[i] = true;
      }
    }
  }
  for (const auto& nk : ordering.normals())
    for (int i = 0; i < q; ++i)
      if (nonlinear[i] && nk[i] < -1e-12)
        throw std::invalid_argument("ordering cone dual has a negative weight on a nonlinear objective");
}

Eigen::VectorXd evaluate_objective(const CvopProblem& problem, int block, const Eigen::VectorXd& x) {
  return eval_all(problem.blocks[block].objectives, x);
}

WeightedSumResult solve_weighted_sum(const CvopProblem& problem, const Eigen::VectorXd& w, int block,
                                     const SolverOptions& options) {
  problem.validate();
  if (w.size() != problem.q) throw DimensionError("weight has wrong dimension");
  const WsMin r = weighted_sum_min(problem, block, w, options);
  WeightedSumResult out;
  out.status = r.status;
  out.x = r.x;
  out.report = r.report;
  if (r.status == SolveStatus::optimal) {
    out.image = evaluate_objective(problem, block, r.x);
    out.value = w.dot(out.image);
  }
  return out;
}

PsResult solve_pascoletti_serafini(const CvopProblem& problem, const Eigen::VectorXd& v, const Eigen::VectorXd& dir,
                                   int block, const SolverOptions& options) {
  problem.validate();
  if (v.size() != problem.q || dir.size() != problem.q) throw DimensionError("reference point or direction dimension");
  if (!problem.ordering.contains(dir) || dir.norm() == 0.0)
    throw std::invalid_argument("direction must be a nonzero element of the ordering cone");
  const bool maxi = problem.sense == Sense::maximize;
  const PsMin r = ps_min(problem, block, maxi ? Eigen::VectorXd(-v) : v, dir, options);
  PsResult out;
  out.status = r.status;
  out.report = r.report;
  out.x = r.x;
  out.rho = r.rho;
  if (r.status == SolveStatus::infeasible) throw std::runtime_error("direction misses image");
  if (r.status != SolveStatus::optimal) return out;
  out.image = evaluate_objective(problem, block, r.x);
  out.weight = r.weight;
  out.offset = maxi ? -r.offset : r.offset;
  return out;
}

// ---------------------------------------------------------------------------
// Benson loop

EpsilonSolution solve_cvop(const CvopProblem& problem, double epsilon, const BensonOptions& options) {
  problem.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const int q = problem.q;
  const int nb = static_cast<int>(problem.blocks.size());
  const bool maxi = problem.sense == Sense::maximize;
  const Eigen::VectorXd k = problem.k();

  EpsilonSolution sol;
  sol.sense = problem.sense;
  sol.epsilon = epsilon;
  sol.direction = k;
  sol.cone_generators = problem.ordering.generators();

  auto note_report = [&](const SolveReport& r) {
    ++sol.subproblems;
    if (r.status == SolveStatus::optimal) sol.max_kkt_residual = std::max(sol.max_kkt_residual, r.kkt_residual());
  };

  // Min-form points collected during the run.
  std::vector<SolutionPoint> pts;
  auto add_point = [&](SolutionPoint pt) {
    for (const auto& o : pts)
      if ((o.image - pt.image).cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, pt.image.cwiseAbs().maxCoeff()) &&
          (o.weight - pt.weight).cwiseAbs().maxCoeff() <= 1e-12)
        return;
    pts.push_back(std::move(pt));
  };

  const double geom_tol = std::min(kGeomTol, 1e-2 * epsilon);
  PolyhedronBuilder outer(q, geom_tol);

  // Initialization: one weighted-sum problem per generator of the dual cone.
  const Cone dual = positive_dual_cone(problem.ordering);
  std::vector<Eigen::VectorXd> init_w;
  for (const auto& g : dual.generators()) init_w.push_back(g / g.dot(k));
  std::vector<WsMin> init(init_w.size() * nb);
  const int n_init = static_cast<int>(init.size());
#pragma omp parallel for schedule(dynamic) if (options.execution == Execution::parallel)
  for (int t = 0; t < n_init; ++t) {
    try {
      const auto& fb = problem.blocks[t % nb].feasible;
      double scale = 1.0;
      if (fb.start.size() > 0) scale = std::max(scale, fb.start.cwiseAbs().maxCoeff());
      init[t] = weighted_sum_min(problem, t % nb, init_w[t / nb], options.solver, kInitBox * scale);
    } catch (const std::exception& ex) {
      init[t].status = SolveStatus::max_iter;
      init[t].report.message = ex.what();
    }
  }

  for (std::size_t gi = 0; gi < init_w.size(); ++gi) {
    double beta = -kInf;
    for (int b = 0; b < nb; ++b) {
      const WsMin& r = init[gi * nb + b];
      note_report(r.report);
      if (r.status == SolveStatus::infeasible) {
        sol.status = CvopStatus::infeasible;
        sol.message = "block " + std::to_string(b) + " has no strictly feasible point";
        return sol;
      }
      if (r.status == SolveStatus::optimal) {
        beta = std::max(beta, r.value - r.report.gap);
        // points pushed out towards the box only mark an unbounded face
        if (nb == 1 && r.image.allFinite() && r.x.cwiseAbs().maxCoeff() <= 1e-3 * kInitBox) add_point({{r.x}, r.image, init_w[gi], r.value});
      } else if (r.status == SolveStatus::max_iter) {
        sol.status = CvopStatus::failed;
        sol.message = "weighted-sum subproblem hit the iteration cap: " + r.report.message;
        return sol;
      }
    }
    if (beta == -kInf) {
      sol.status = CvopStatus::unbounded;
      sol.message = "weighted-sum problem unbounded for a dual cone generator";
      return sol;
    }
    outer.add_halfspace(init_w[gi], beta);
  }

  // Refinement loop.
  std::vector<Eigen::VectorXd> resolved;
  auto is_resolved = [&](const Eigen::VectorXd& v) {
    for (const auto& r : resolved)
      if ((r - v).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff())) return true;
    return false;
  };
  bool partial = false;
  for (;;) {
    std::vector<Eigen::VectorXd> todo;
    for (auto& v : outer.vertices())
      if (!is_resolved(v)) todo.push_back(std::move(v));
    if (todo.empty()) break;
    if (sol.iterations >= options.max_iterations) {
      partial = true;
      break;
    }
    ++sol.iterations;

    const int n_tasks = static_cast<int>(todo.size()) * nb;
    std::vector<PsMin> res(n_tasks);
#pragma omp parallel for schedule(dynamic) if (options.execution == Execution::parallel)
    for (int t = 0; t < n_tasks; ++t) {
      try {
        res[t] = ps_min(problem, t % nb, todo[t / nb], k, options.solver);
      } catch (const std::exception& ex) {
        res[t].status = SolveStatus::max_iter;
        res[t].report.message = ex.what();
      }
    }

    // Serial update in vertex order keeps the result independent of scheduling.
    for (std::size_t vi = 0; vi < todo.size(); ++vi) {
      const Eigen::VectorXd& v = todo[vi];
      resolved.push_back(v);
      int bind = -1;
      bool failed = false;
      for (int b = 0; b < nb; ++b) {
        const PsMin& r = res[vi * nb + b];
        note_report(r.report);
        // rho is free, so this means no point lies in the domain of every objective
        if (r.status == SolveStatus::infeasible) {
          sol.status = CvopStatus::infeasible;
          sol.message = "block " + std::to_string(b) + " has no point where every objective is finite";
          return sol;
        }
        if (r.status != SolveStatus::optimal) {
          failed = true;
          continue;
        }
        if (bind < 0 || r.rho > res[vi * nb + bind].rho) bind = b;
      }
      if (failed) {
        partial = true;
        continue;
      }
      const PsMin& br = res[vi * nb + bind];
      SolutionPoint pt;
      for (int b = 0; b < nb; ++b) pt.decisions.push_back(res[vi * nb + b].x);
      pt.image = nb == 1 ? br.image : Eigen::VectorXd(v + br.rho * k);
      pt.weight = br.weight / br.weight.dot(k);
      pt.value = pt.weight.dot(pt.image);
      add_point(pt);
      if (br.rho <= epsilon) continue;
      bool dup = false;
      for (const auto& h : outer.halfspaces())
        if (same_cut(h, br.weight, br.offset, options.dedupe_tol)) dup = true;
      if (dup || br.weight.dot(v) >= br.offset) continue;
      outer.add_halfspace(br.weight, br.offset);
    }
  }

  if (pts.empty()) {
    sol.status = CvopStatus::failed;
    sol.message = "no subproblem returned a solution";
    return sol;
  }
  sol.status = partial ? CvopStatus::partial : CvopStatus::solved;
  if (partial) sol.message = "iteration cap or subproblem failure; approximation not certified";

  std::vector<Eigen::VectorXd> imgs, rays;
  for (const auto& p : pts) imgs.push_back(p.image);
  for (const auto& g : problem.ordering.generators()) rays.push_back(g);
  Polyhedron inner = dd_convert(Polyhedron::from_generators(q, imgs, rays), geom_tol);
  Polyhedron outer_shift = inner.translated(-epsilon * k);
  Polyhedron cuts = outer.polyhedron();
  if (maxi) {
    for (auto& p : pts) {
      p.image = -p.image;
      p.value = -p.value;
    }
    inner = inner.negated();
    outer_shift = outer_shift.negated();
    cuts = cuts.negated();
  }
  sol.points = std::move(pts);
  sol.inner = std::move(inner);
  sol.outer = std::move(outer_shift);
  sol.cut_outer = std::move(cuts);
  return sol;
}

std::vector<Eigen::VectorXd> EpsilonSolution::weights() const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& p : points) out.push_back(p.weight);
  return out;
}

std::vector<double> EpsilonSolution::values() const {
  std::vector<double> out;
  for (const auto& p : points) out.push_back(p.value);
  return out;
}

std::vector<Eigen::VectorXd> EpsilonSolution::images() const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& p : points) out.push_back(p.image);
  return out;
}

ImagePair images(const EpsilonSolution& sol) { return {sol.inner, sol.outer}; }

}  // namespace setprice
