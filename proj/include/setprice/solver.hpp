#pragma once

#include "setprice/core.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace setprice {

/// weight * u(A z + b)
struct UtilityTerm {
  double weight = 1.0;
  UtilityFunction u;
  Eigen::MatrixXd A;  // u.dim() x n
  Eigen::VectorXd b;  // u.dim()
};

/// linear.z + constant + sum of utility terms. Concave when every term weight
/// is non-negative, convex when every weight is non-positive.
struct UtilityExpr {
  Eigen::VectorXd linear;
  double constant = 0.0;
  std::vector<UtilityTerm> terms;

  static UtilityExpr affine(Eigen::VectorXd linear, double constant = 0.0);

  bool is_affine() const { return terms.empty(); }
  /// NaN when some utility argument leaves its domain.
  double value(const Eigen::VectorXd& z) const;
  /// Requires every utility argument in the interior of its domain.
  void derivatives(const Eigen::VectorXd& z, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const;
  /// Scales linear part, constant and all term weights.
  UtilityExpr scaled(double factor) const;
};

/// linear.z + constant - ||D z + e||^2 >= 0
struct QuadraticConstraint {
  Eigen::VectorXd linear;
  double constant = 0.0;
  Eigen::MatrixXd D;
  Eigen::VectorXd e;
  double value(const Eigen::VectorXd& z) const;
};

/// minimize cost.z + cost_constant subject to
///   A_eq z = b_eq, G z >= h, lower <= z <= upper,
///   concave[i](z) >= 0, quadratic[i](z) >= 0.
/// Utility arguments are kept inside their domains by implicit linear rows.
class ConvexProgram {
 public:
  explicit ConvexProgram(int n);

  int n() const { return n_; }

  Eigen::VectorXd cost;
  double cost_constant = 0.0;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<UtilityExpr> concave;
  std::vector<QuadraticConstraint> quadratic;
  /// Optional initial guess for phase I (empty = none). It need not be feasible.
  Eigen::VectorXd start;

  void add_equality(const Eigen::VectorXd& row, double rhs);
  void add_inequality(const Eigen::VectorXd& row, double rhs);
  void add_concave(UtilityExpr expr);
  void add_quadratic(QuadraticConstraint q);
  /// Appends `extra` decision variables (zero coefficients everywhere).
  void extend(int extra);

  /// Throws DimensionError / std::invalid_argument on inconsistent data.
  void validate() const;

 private:
  int n_;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iter };
const char* to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::max_iter;
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd dual_eq;         // per equality row
  Eigen::VectorXd dual_ineq;       // per row of G
  Eigen::VectorXd dual_lower;      // per variable (0 where unbounded)
  Eigen::VectorXd dual_upper;
  Eigen::VectorXd dual_concave;
  Eigen::VectorXd dual_quadratic;
  Eigen::VectorXd dual_domain;     // implicit utility-domain rows
  double gap = 0.0;
  double kkt_stationarity = 0.0;
  double kkt_feasibility = 0.0;
  double kkt_complementarity = 0.0;
  int newton_iterations = 0;
  std::string message;

  double kkt_residual() const;
};

struct SolverOptions {
  double mu = 10.0;
  double newton_tol = 1e-10;
  int max_newton = 200;  // per centering step
  double gap_tol = 1e-11;
  /// Accepted duality gap (relative) when centering stalls near the end of the path.
  double loose_gap_tol = 1e-7;
  double unbounded_norm = 1e9;
};

/// Primal log-barrier interior point method with damped Newton steps and a
/// two-stage phase I.
SolveReport solve(const ConvexProgram& program, const SolverOptions& options = {});

}  // namespace setprice
