#include "setprice/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace setprice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

// ---------------------------------------------------------------------------
// Expressions

UtilityExpr UtilityExpr::affine(Eigen::VectorXd linear, double constant) {
  UtilityExpr e;
  e.linear = std::move(linear);
  e.constant = constant;
  return e;
}

double UtilityExpr::value(const Eigen::VectorXd& z) const {
  // Constants first: levels close to a utility's upper bound cancel against
  // its offset before the small variable parts are added.
  double fixed = constant;
  double moving = 0.0;
  for (const auto& t : terms) {
    if (t.weight == 0.0) continue;
    const Eigen::VectorXd arg = t.A * z + t.b;
    const ExtendedReal u = t.u.shifted_value(arg);
    if (!u.is_finite()) return kNaN;
    fixed += t.weight * t.u.offset();
    moving += t.weight * u.value();
  }
  return fixed + (linear.dot(z) + moving);
}

void UtilityExpr::derivatives(const Eigen::VectorXd& z, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
  grad = linear;
  hess.setZero(z.size(), z.size());
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  for (const auto& t : terms) {
    if (t.weight == 0.0) continue;
    t.u.grad_hess(t.A * z + t.b, g, h);
    grad.noalias() += t.weight * (t.A.transpose() * g);
    hess.noalias() += t.weight * (t.A.transpose() * h * t.A);
  }
}

UtilityExpr UtilityExpr::scaled(double factor) const {
  UtilityExpr e = *this;
  e.linear *= factor;
  e.constant *= factor;
  for (auto& t : e.terms) t.weight *= factor;
  return e;
}

double QuadraticConstraint::value(const Eigen::VectorXd& z) const {
  return linear.dot(z) + constant - (D * z + e).squaredNorm();
}

// ---------------------------------------------------------------------------
// Program

ConvexProgram::ConvexProgram(int n) : n_(n) {
  if (n <= 0) throw std::invalid_argument("convex program needs at least one variable");
  cost = Eigen::VectorXd::Zero(n);
  A_eq.resize(0, n);
  G.resize(0, n);
  lower = Eigen::VectorXd::Constant(n, -kInf);
  upper = Eigen::VectorXd::Constant(n, kInf);
}

void ConvexProgram::add_equality(const Eigen::VectorXd& row, double rhs) {
  if (row.size() != n_) throw DimensionError("equality row has wrong length");
  A_eq.conservativeResize(A_eq.rows() + 1, n_);
  A_eq.row(A_eq.rows() - 1) = row.transpose();
  b_eq.conservativeResize(b_eq.size() + 1);
  b_eq[b_eq.size() - 1] = rhs;
}

void ConvexProgram::add_inequality(const Eigen::VectorXd& row, double rhs) {
  if (row.size() != n_) throw DimensionError("inequality row has wrong length");
  G.conservativeResize(G.rows() + 1, n_);
  G.row(G.rows() - 1) = row.transpose();
  h.conservativeResize(h.size() + 1);
  h[h.size() - 1] = rhs;
}

void ConvexProgram::add_concave(UtilityExpr expr) { concave.push_back(std::move(expr)); }

void ConvexProgram::add_quadratic(QuadraticConstraint q) { quadratic.push_back(std::move(q)); }

void ConvexProgram::extend(int extra) {
  if (extra < 0) throw std::invalid_argument("cannot shrink a program");
  const int m = n_ + extra;
  cost.conservativeResize(m);
  cost.tail(extra).setZero();
  A_eq.conservativeResize(A_eq.rows(), m);
  A_eq.rightCols(extra).setZero();
  G.conservativeResize(G.rows(), m);
  G.rightCols(extra).setZero();
  lower.conservativeResize(m);
  lower.tail(extra).setConstant(-kInf);
  upper.conservativeResize(m);
  upper.tail(extra).setConstant(kInf);
  if (start.size() > 0) {
    start.conservativeResize(m);
    start.tail(extra).setZero();
  }
  for (auto& c : concave) {
    c.linear.conservativeResize(m);
    c.linear.tail(extra).setZero();
    for (auto& t : c.terms) {
      t.A.conservativeResize(t.A.rows(), m);
      t.A.rightCols(extra).setZero();
    }
  }
  for (auto& q : quadratic) {
    q.linear.conservativeResize(m);
    q.linear.tail(extra).setZero();
    q.D.conservativeResize(q.D.rows(), m);
    q.D.rightCols(extra).setZero();
  }
  n_ = m;
}

void ConvexProgram::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw DimensionError(what);
  };
  need(cost.size() == n_, "cost vector length");
  need(A_eq.cols() == n_ && A_eq.rows() == b_eq.size(), "equality block shape");
  need(G.cols() == n_ && G.rows() == h.size(), "inequality block shape");
  need(lower.size() == n_ && upper.size() == n_, "bound vector length");
  need(start.size() == 0 || start.size() == n_, "start vector length");
  for (const auto& c : concave) {
    need(c.linear.size() == n_, "concave constraint linear part length");
    for (const auto& t : c.terms) {
      need(t.A.cols() == n_ && t.A.rows() == t.u.dim() && t.b.size() == t.u.dim(), "utility term map shape");
      if (t.weight < 0.0) throw std::invalid_argument("concave constraint with negative utility weight");
    }
  }
  for (const auto& q : quadratic)
    need(q.linear.size() == n_ && q.D.cols() == n_ && q.D.rows() == q.e.size(), "quadratic constraint shape");
  for (int i = 0; i < n_; ++i)
    if (lower[i] > upper[i]) throw std::invalid_argument("lower bound exceeds upper bound");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::unbounded:
      return "unbounded";
    case SolveStatus::max_iter:
      return "max_iter";
  }
  return "?";
}

double SolveReport::kkt_residual() const {
  return std::max({kkt_stationarity, kkt_feasibility, kkt_complementarity});
}

// ---------------------------------------------------------------------------
// Interior point engine

namespace {

enum class RowKind { ineq, lower, upper, domain };

struct LinearRow {
  Eigen::VectorXd a;
  double b;  // a.z - b >= 0
  RowKind kind;
  int index;
};

// Barrier problem in reduced coordinates x = (y, [s]) with z = z0 + N y.
struct Engine {
  Eigen::VectorXd z0;
  Eigen::MatrixXd N;
  std::vector<LinearRow> rows;
  const std::vector<UtilityExpr>* concave = nullptr;
  const std::vector<QuadraticConstraint>* quadratic = nullptr;

  bool use_linear = true;
  bool use_nonlinear = true;
  bool relax_linear = false;
  bool relax_nonlinear = false;
  // phase I keeps |y_i| < box so the auxiliary problem stays bounded (0 = off)
  double box = 0.0;
  Eigen::VectorXd cost;  // over x

  int k() const { return static_cast<int>(N.cols()); }
  bool has_slack() const { return relax_linear || relax_nonlinear; }
  int dim() const { return k() + (has_slack() ? 1 : 0); }
  int count() const {
    int m = 0;
    if (use_linear) m += static_cast<int>(rows.size());
    if (use_nonlinear) m += static_cast<int>(concave->size() + quadratic->size());
    if (has_slack()) m += 1;
    if (box > 0.0) m += 2 * k();
    return m;
  }

  Eigen::VectorXd z_of(const Eigen::VectorXd& x) const { return z0 + N * x.head(k()); }

  // Constraint values; false if any is not strictly positive.
  bool values(const Eigen::VectorXd& x, Eigen::VectorXd& vals) const {
    vals.resize(count());
    const Eigen::VectorXd z = z_of(x);
    const double s = has_slack() ? x[k()] : 0.0;
    int i = 0;
    if (use_linear)
      for (const auto& r : rows) vals[i++] = r.a.dot(z) - r.b + (relax_linear ? s : 0.0);
    if (use_nonlinear) {
      for (const auto& c : *concave) vals[i++] = c.value(z) + (relax_nonlinear ? s : 0.0);
      for (const auto& q : *quadratic) vals[i++] = q.value(z) + (relax_nonlinear ? s : 0.0);
    }
    if (has_slack()) vals[i++] = s + 1.0;
    if (box > 0.0) {
      for (int j = 0; j < k(); ++j) {
        vals[i++] = box - x[j];
        vals[i++] = box + x[j];
      }
    }
    for (int j = 0; j < vals.size(); ++j)
      if (!(vals[j] > 0.0)) return false;
    return true;
  }

  // Change of the barrier merit between two feasible points, formed term by
  // term so that it does not cancel against the size of the merit itself.
  double merit_change(const Eigen::VectorXd& x, const Eigen::VectorXd& vals, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& yvals, double t) const {
    return t * cost.dot(y - x) - (yvals.array() / vals.array()).log().sum();
  }

  // Gradient and Hessian of the barrier merit (vals must be current).
  void derivatives(const Eigen::VectorXd& x, double t, const Eigen::VectorXd& vals, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) const {
    const int n = dim();
    const int kk = k();
    grad = t * cost;
    hess.setZero(n, n);
    const Eigen::VectorXd z = z_of(x);
    Eigen::VectorXd gz(n);
    int i = 0;
    auto add_linear = [&](const Eigen::VectorXd& g, double v) {
      grad -= g / v;
      hess.noalias() += (g * g.transpose()) / (v * v);
    };
    if (use_linear) {
      for (const auto& r : rows) {
        gz.head(kk) = N.transpose() * r.a;
        if (has_slack()) gz[kk] = relax_linear ? 1.0 : 0.0;
        add_linear(gz, vals[i++]);
      }
    }
    if (use_nonlinear) {
      Eigen::VectorXd g;
      Eigen::MatrixXd h;
      auto add_nonlinear = [&](double v) {
        gz.head(kk) = N.transpose() * g;
        if (has_slack()) gz[kk] = relax_nonlinear ? 1.0 : 0.0;
        add_linear(gz, v);
        hess.topLeftCorner(kk, kk).noalias() -= (N.transpose() * h * N) / v;
      };
      for (const auto& c : *concave) {
        c.derivatives(z, g, h);
        add_nonlinear(vals[i++]);
      }
      for (const auto& q : *quadratic) {
        const Eigen::VectorXd r = q.D * z + q.e;
        g = q.linear - 2.0 * q.D.transpose() * r;
        h = -2.0 * q.D.transpose() * q.D;
        add_nonlinear(vals[i++]);
      }
    }
    if (has_slack()) {
      gz.setZero();
      gz[kk] = 1.0;
      add_linear(gz, vals[i++]);
    }
    if (box > 0.0) {
      for (int j = 0; j < kk; ++j) {
        const double a = vals[i++];
        const double b = vals[i++];
        grad[j] += 1.0 / a - 1.0 / b;
        hess(j, j) += 1.0 / (a * a) + 1.0 / (b * b);
      }
    }
  }
};

enum class CenterStatus { centered, early_stop, unbounded, max_iter };

// Damped Newton minimization of the barrier merit at fixed t. `early` is
// checked after every step.
template <class Early>
CenterStatus center(const Engine& e, Eigen::VectorXd& x, double t, double tol, int max_newton,
                    const SolverOptions& opt, int& total, Early early) {
  Eigen::VectorXd vals, trial_vals, grad, dx;
  Eigen::MatrixXd hess;
  double best = kInf;
  int since_best = 0;
  for (int it = 0; it < max_newton; ++it) {
    ++total;
    if (!e.values(x, vals)) throw std::logic_error("barrier iterate left the feasible region");
    e.derivatives(x, t, vals, grad, hess);
    const double reg = 1e-13 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
    hess.diagonal().array() += reg;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    dx = ldlt.solve(-grad);
    if (!dx.allFinite()) dx = hess.completeOrthogonalDecomposition().solve(-grad);
    const double lambda2 = -grad.dot(dx);
    if (!(lambda2 > 0.0) || lambda2 / 2.0 <= tol) return CenterStatus::centered;
    // at very large t the decrement bottoms out at rounding noise
    if (lambda2 < 0.9 * best) {
      best = lambda2;
      since_best = 0;
    } else if (++since_best >= 8 && best < 1e-3) {
      return CenterStatus::centered;
    }
    // steps below rounding of the iterate cannot improve it
    if (dx.cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, x.cwiseAbs().maxCoeff())) return CenterStatus::centered;
    const double slope = grad.dot(dx);
    // inside the quadratic convergence region the merit decrease is below
    // rounding, so only feasibility is checked there
    const bool local = lambda2 < 1e-6;
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 80; ++ls) {
      const Eigen::VectorXd trial = x + alpha * dx;
      if (e.values(trial, trial_vals) &&
          (local || e.merit_change(x, vals, trial, trial_vals, t) <= 0.25 * alpha * slope)) {
        x = trial;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    // no further progress at machine precision counts as centered
    if (!moved || (alpha < 1e-6 && lambda2 < 1e-3)) return CenterStatus::centered;
    if (e.z_of(x).cwiseAbs().maxCoeff() > opt.unbounded_norm ||
        (e.has_slack() && std::abs(x[e.k()]) > opt.unbounded_norm))
      return CenterStatus::unbounded;
    if (early(x)) return CenterStatus::early_stop;
  }
  return CenterStatus::max_iter;
}

enum class PathStatus { converged, early_stop, unbounded, max_iter };

struct PathOutcome {
  PathStatus status;
  Eigen::VectorXd x;
  double t;
  int iterations;
};

// Follows the central path from a strictly feasible x.
template <class Early>
PathOutcome follow_path(const Engine& e, Eigen::VectorXd x, const SolverOptions& opt, Early early) {
  const int m = e.count();
  double t = 1.0;
  int total = 0;
  Eigen::VectorXd last = x;
  double last_t = 0.0;
  for (;;) {
    const auto st = center(e, x, t, opt.newton_tol, opt.max_newton, opt, total, early);
    if (st == CenterStatus::early_stop) return {PathStatus::early_stop, x, t, total};
    if (st == CenterStatus::unbounded) return {PathStatus::unbounded, x, t, total};
    if (st == CenterStatus::max_iter) {
      // Badly scaled constraints can stall centering once the slacks reach
      // rounding level; the previous center is kept if its gap is small.
      if (last_t > 0.0 && m / last_t <= opt.loose_gap_tol * std::max(1.0, std::abs(e.cost.dot(last))))
        return {PathStatus::converged, last, last_t, total};
      return {PathStatus::max_iter, x, t, total};
    }
    last = x;
    last_t = t;
    const double obj = e.cost.dot(x);
    if (m / t <= opt.gap_tol * std::max(1.0, std::abs(obj))) {
      // a few extra Newton steps sharpen the multiplier estimates
      center(e, x, t, 1e-26, 30, opt, total, [](const Eigen::VectorXd&) { return false; });
      return {PathStatus::converged, x, t, total};
    }
    t *= opt.mu;
  }
}

// Orthonormal null-space basis and a particular solution of A z = b.
bool affine_parametrization(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int n, Eigen::VectorXd& z0,
                            Eigen::MatrixXd& N) {
  if (A.rows() == 0) {
    z0 = Eigen::VectorXd::Zero(n);
    N = Eigen::MatrixXd::Identity(n, n);
    return true;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-12 * std::max(1.0, sv.size() ? sv[0] : 0.0) * std::max(A.rows(), A.cols());
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++rank;
  svd.setThreshold(tol / std::max(1.0, sv.size() ? sv[0] : 1.0));
  z0 = svd.solve(b);
  if ((A * z0 - b).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, b.cwiseAbs().maxCoeff())) return false;
  N = svd.matrixV().rightCols(n - rank);
  return true;
}

}  // namespace

SolveReport solve(const ConvexProgram& p, const SolverOptions& opt) {
  p.validate();
  const int n = p.n();
  SolveReport rep;
  rep.dual_eq = Eigen::VectorXd::Zero(p.A_eq.rows());
  rep.dual_ineq = Eigen::VectorXd::Zero(p.G.rows());
  rep.dual_lower = Eigen::VectorXd::Zero(n);
  rep.dual_upper = Eigen::VectorXd::Zero(n);
  rep.dual_concave = Eigen::VectorXd::Zero(p.concave.size());
  rep.dual_quadratic = Eigen::VectorXd::Zero(p.quadratic.size());

  Engine e;
  e.concave = &p.concave;
  e.quadratic = &p.quadratic;
  if (!affine_parametrization(p.A_eq, p.b_eq, n, e.z0, e.N)) {
    rep.status = SolveStatus::infeasible;
    rep.message = "equality constraints are inconsistent";
    rep.x = Eigen::VectorXd::Zero(n);
    return rep;
  }

  for (int i = 0; i < p.G.rows(); ++i) e.rows.push_back({p.G.row(i).transpose(), p.h[i], RowKind::ineq, i});
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(p.lower[j])) e.rows.push_back({Eigen::VectorXd::Unit(n, j), p.lower[j], RowKind::lower, j});
    if (std::isfinite(p.upper[j])) e.rows.push_back({-Eigen::VectorXd::Unit(n, j), -p.upper[j], RowKind::upper, j});
  }
  int domain_rows = 0;
  for (const auto& c : p.concave) {
    for (const auto& t : c.terms) {
      const Eigen::VectorXd lo = t.u.domain_lower();
      for (int i = 0; i < lo.size(); ++i) {
        if (!std::isfinite(lo[i])) continue;
        e.rows.push_back({t.A.row(i).transpose(), lo[i] - t.b[i], RowKind::domain, domain_rows++});
      }
    }
  }
  rep.dual_domain = Eigen::VectorXd::Zero(domain_rows);

  const int kk = e.k();
  const bool has_nonlinear = !p.concave.empty() || !p.quadratic.empty();
  const int m_total = static_cast<int>(e.rows.size() + p.concave.size() + p.quadratic.size());

  auto finish_point = [&](const Eigen::VectorXd& z) {
    rep.x = z;
    rep.objective = p.cost.dot(z) + p.cost_constant;
  };

  // Degenerate shapes: no free directions, or nothing to keep feasible.
  if (kk == 0 || m_total == 0) {
    const Eigen::VectorXd z = e.z0;
    finish_point(z);
    if (kk > 0 && (e.N.transpose() * p.cost).cwiseAbs().maxCoeff() > 1e-12) {
      rep.status = SolveStatus::unbounded;
      rep.message = "objective decreases along a free direction";
      return rep;
    }
    double worst = 0.0;
    for (const auto& r : e.rows) worst = std::min(worst, r.a.dot(z) - r.b);
    for (const auto& c : p.concave) {
      const double v = c.value(z);
      worst = std::min(worst, std::isnan(v) ? -kInf : v);
    }
    for (const auto& q : p.quadratic) worst = std::min(worst, q.value(z));
    rep.status = worst >= -1e-12 ? SolveStatus::optimal : SolveStatus::infeasible;
    rep.kkt_feasibility = -worst;
    return rep;
  }

  // Start from the point of the affine set closest to one that respects the
  // simple bounds with unit margin (or strictly, for a supplied guess).
  const bool guess = p.start.size() == n && p.start.allFinite();
  Eigen::VectorXd target = guess ? p.start : e.z0;
  for (int j = 0; j < n; ++j) {
    const bool lo = std::isfinite(p.lower[j]);
    const bool up = std::isfinite(p.upper[j]);
    if (lo && up) {
      const double margin = std::min(1.0, 0.25 * (p.upper[j] - p.lower[j]));
      if (!guess || target[j] <= p.lower[j] || target[j] >= p.upper[j])
        target[j] = std::clamp(target[j], p.lower[j] + margin, p.upper[j] - margin);
    } else if (lo) {
      if (!guess || target[j] <= p.lower[j]) target[j] = std::max(target[j], p.lower[j] + 1.0);
    } else if (up) {
      if (!guess || target[j] >= p.upper[j]) target[j] = std::min(target[j], p.upper[j] - 1.0);
    }
  }
  Eigen::VectorXd y = e.N.transpose() * (target - e.z0);
  Eigen::VectorXd vals;
  double scale = std::max(1.0, e.z0.cwiseAbs().maxCoeff());
  for (const auto& r : e.rows) scale = std::max(scale, std::abs(r.b) / std::max(r.a.cwiseAbs().maxCoeff(), 1e-300));
  e.box = 1e3 * std::min(scale, 1e6) + y.cwiseAbs().maxCoeff();

  // Phase I, stage A: strictly satisfy all linear rows.
  if (!e.rows.empty()) {
    e.use_nonlinear = false;
    e.relax_linear = true;
    Eigen::VectorXd x(kk + 1);
    x.head(kk) = y;
    const Eigen::VectorXd z = e.z_of(y);
    double worst = kInf;
    for (const auto& r : e.rows) worst = std::min(worst, r.a.dot(z) - r.b);
    if (worst <= 0.0) {
      x[kk] = 1.0 - worst;
      e.cost = Eigen::VectorXd::Unit(kk + 1, kk);
      auto out = follow_path(e, x, opt, [&](const Eigen::VectorXd& xx) { return xx[kk] < 0.0; });
      rep.newton_iterations += out.iterations;
      if (out.status != PathStatus::early_stop) {
        rep.status = out.status == PathStatus::max_iter ? SolveStatus::max_iter : SolveStatus::infeasible;
        rep.message = "no strictly feasible point for the linear constraints";
        finish_point(e.z_of(out.x));
        return rep;
      }
      y = out.x.head(kk);
    }
    e.relax_linear = false;
  }

  // Phase I, stage B: strictly satisfy the nonlinear constraints.
  if (has_nonlinear) {
    e.use_nonlinear = true;
    e.use_linear = true;
    const Eigen::VectorXd z = e.z_of(y);
    double worst = kInf;
    for (const auto& c : p.concave) {
      const double v = c.value(z);
      worst = std::min(worst, std::isnan(v) ? -kInf : v);
    }
    for (const auto& q : p.quadratic) worst = std::min(worst, q.value(z));
    if (!std::isfinite(worst)) {
      rep.status = SolveStatus::infeasible;
      rep.message = "utility argument outside its domain at the phase I start";
      finish_point(z);
      return rep;
    }
    if (worst <= 0.0) {
      e.relax_nonlinear = true;
      Eigen::VectorXd x(kk + 1);
      x.head(kk) = y;
      x[kk] = 1.0 - worst;
      e.cost = Eigen::VectorXd::Unit(kk + 1, kk);
      auto out = follow_path(e, x, opt, [&](const Eigen::VectorXd& xx) { return xx[kk] < 0.0; });
      rep.newton_iterations += out.iterations;
      if (out.status != PathStatus::early_stop) {
        rep.status = out.status == PathStatus::max_iter ? SolveStatus::max_iter : SolveStatus::infeasible;
        rep.message = "no strictly feasible point for the nonlinear constraints";
        finish_point(e.z_of(out.x));
        return rep;
      }
      y = out.x.head(kk);
      e.relax_nonlinear = false;
    }
  }

  // Phase II
  e.box = 0.0;
  e.use_linear = true;
  e.use_nonlinear = true;
  e.relax_linear = false;
  e.relax_nonlinear = false;
  e.cost = e.N.transpose() * p.cost;
  auto out = follow_path(e, y, opt, [](const Eigen::VectorXd&) { return false; });
  rep.newton_iterations += out.iterations;
  const Eigen::VectorXd z = e.z_of(out.x);
  finish_point(z);
  if (out.status == PathStatus::unbounded) {
    rep.status = SolveStatus::unbounded;
    rep.message = "iterates diverge while the objective decreases";
    return rep;
  }
  rep.status = out.status == PathStatus::max_iter ? SolveStatus::max_iter : SolveStatus::optimal;
  if (rep.status == SolveStatus::max_iter)
    rep.message = "Newton iteration limit reached at t = " + std::to_string(out.t);

  // Dual estimates and KKT residuals in the original coordinates.
  e.values(out.x, vals);
  const double t = out.t;
  const int m = static_cast<int>(vals.size());
  Eigen::MatrixXd J(n, m);
  {
    int i = 0;
    for (const auto& r : e.rows) J.col(i++) = r.a;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    for (const auto& c : p.concave) {
      c.derivatives(z, g, h);
      J.col(i++) = g;
    }
    for (const auto& q : p.quadratic) J.col(i++) = q.linear - 2.0 * q.D.transpose() * (q.D * z + q.e);
  }
  const Eigen::MatrixXd At = p.A_eq.transpose();
  auto residual = [&](const Eigen::VectorXd& lam, Eigen::VectorXd& nu) {
    Eigen::VectorXd r = p.cost - J * lam;
    if (At.cols() > 0) {
      nu = At.completeOrthogonalDecomposition().solve(r);
      r -= At * nu;
    } else {
      nu.resize(0);
    }
    return r;
  };
  Eigen::VectorXd lam = (1.0 / (t * vals.array())).matrix();
  Eigen::VectorXd nu;
  Eigen::VectorXd resid = residual(lam, nu);

  // The barrier estimates 1/(t g) lose accuracy when slacks approach rounding
  // level; re-fit the multipliers of the nearly active constraints.
  std::vector<int> active;
  for (int j = 0; j < m; ++j)
    if (lam[j] >= vals[j]) active.push_back(j);
  if (!active.empty()) {
    const int na = static_cast<int>(active.size());
    Eigen::MatrixXd M(n, na + At.cols());
    Eigen::VectorXd rhs = p.cost;
    for (int j = 0; j < m; ++j)
      if (lam[j] < vals[j]) rhs -= lam[j] * J.col(j);
    for (int a = 0; a < na; ++a) M.col(a) = J.col(active[a]);
    if (At.cols() > 0) M.rightCols(At.cols()) = At;
    const Eigen::VectorXd sol = M.completeOrthogonalDecomposition().solve(rhs);
    Eigen::VectorXd refined = lam;
    bool ok = sol.allFinite();
    for (int a = 0; a < na && ok; ++a) {
      if (sol[a] < -1e-10 * std::max(1.0, lam[active[a]])) ok = false;
      refined[active[a]] = std::max(sol[a], 0.0);
    }
    if (ok) {
      Eigen::VectorXd nu2;
      Eigen::VectorXd r2 = residual(refined, nu2);
      if (r2.cwiseAbs().maxCoeff() <= resid.cwiseAbs().maxCoeff()) {
        lam = refined;
        nu = nu2;
        resid = r2;
      }
    }
  }

  double comp = 0.0;
  double feas = 0.0;
  for (int j = 0; j < m; ++j) {
    comp = std::max(comp, lam[j] * std::max(vals[j], 0.0));
    feas = std::max(feas, -vals[j]);
  }
  int i = 0;
  for (const auto& r : e.rows) {
    switch (r.kind) {
      case RowKind::ineq:
        rep.dual_ineq[r.index] = lam[i];
        break;
      case RowKind::lower:
        rep.dual_lower[r.index] = lam[i];
        break;
      case RowKind::upper:
        rep.dual_upper[r.index] = lam[i];
        break;
      case RowKind::domain:
        rep.dual_domain[r.index] = lam[i];
        break;
    }
    ++i;
  }
  for (std::size_t c = 0; c < p.concave.size(); ++c) rep.dual_concave[c] = lam[i++];
  for (std::size_t c = 0; c < p.quadratic.size(); ++c) rep.dual_quadratic[c] = lam[i++];
  if (At.cols() > 0) {
    rep.dual_eq = nu;
    feas = std::max(feas, (p.A_eq * z - p.b_eq).cwiseAbs().maxCoeff());
  }
  rep.gap = m_total / t;
  rep.kkt_stationarity = resid.cwiseAbs().maxCoeff();
  rep.kkt_feasibility = feas;
  rep.kkt_complementarity = comp;
  return rep;
}

}  // namespace setprice
