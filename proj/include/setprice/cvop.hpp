#pragma once

#include "setprice/polytope.hpp"
#include "setprice/solver.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace setprice {

enum class Sense { minimize, maximize };
enum class Execution { serial, parallel };

const char* to_string(Sense s);
const char* to_string(Execution e);

/// One feasible region with its own decision variables and objective map.
/// Objectives are written in the problem's own sense: for minimization every
/// utility term must carry a non-positive weight (convex), for maximization a
/// non-negative one (concave).
struct CvopBlock {
  ConvexProgram feasible{1};  // cost is ignored
  std::vector<UtilityExpr> objectives;
  std::vector<std::string> variable_names;
};

/// K-convex vector optimization problem. With several blocks the image is the
/// intersection of the block images; every block image must be a K-upper set
/// (K-lower set for maximization).
struct CvopProblem {
  int q = 1;
  Cone ordering = Cone::orthant(1);
  Eigen::VectorXd direction;  // interior direction k; empty means ordering.default_direction()
  Sense sense = Sense::minimize;
  std::vector<CvopBlock> blocks;

  Eigen::VectorXd k() const;
  void validate() const;
};

struct WeightedSumResult {
  SolveStatus status = SolveStatus::max_iter;
  Eigen::VectorXd x;      // decision of the block
  Eigen::VectorXd image;  // f(x)
  double value = 0.0;     // w.f(x)
  SolveReport report;
};

/// Optimizes w.f over one block in the problem's sense (minimize or maximize).
WeightedSumResult solve_weighted_sum(const CvopProblem& problem, const Eigen::VectorXd& w, int block = 0,
                                     const SolverOptions& options = {});

struct PsResult {
  SolveStatus status = SolveStatus::max_iter;
  double rho = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd image;   // f(x)
  Eigen::VectorXd weight;  // supporting weight, normalized to weight.dir = 1
  double offset = 0.0;     // supporting halfspace level (see below)
  SolveReport report;
};

/// Pascoletti-Serafini scalarization on one block.
///   minimize: least rho with v + rho*dir in the upper image; the halfspace
///             {y : weight.y >= offset} contains the upper image.
///   maximize: least rho with v - rho*dir in the lower image; the halfspace
///             {y : weight.y <= offset} contains the lower image.
PsResult solve_pascoletti_serafini(const CvopProblem& problem, const Eigen::VectorXd& v, const Eigen::VectorXd& dir,
                                   int block = 0, const SolverOptions& options = {});

struct BensonOptions {
  Execution execution = Execution::parallel;
  int max_iterations = 500;  // vertex rounds
  double dedupe_tol = 1e-9;  // angular tolerance for identical cuts
  SolverOptions solver;
};

struct SolutionPoint {
  std::vector<Eigen::VectorXd> decisions;  // one per block
  Eigen::VectorXd image;                   // image point (f(x) for single-block problems)
  Eigen::VectorXd weight;                  // weight.k = 1
  double value = 0.0;                      // weight.image, the scalarized optimum for this weight
};

enum class CvopStatus { solved, partial, unbounded, infeasible, failed };
const char* to_string(CvopStatus s);

/// Finite weak epsilon-solution. For minimization inner = conv(images) + K and
/// outer = inner - eps*k; for maximization inner = conv(images) - K and
/// outer = inner + eps*k. cut_outer is the intersection of all supporting
/// halfspaces found, which lies between the true image and outer.
struct EpsilonSolution {
  CvopStatus status = CvopStatus::failed;
  std::string message;
  Sense sense = Sense::minimize;
  double epsilon = 0.0;
  Eigen::VectorXd direction;
  std::vector<Eigen::VectorXd> cone_generators;
  std::vector<SolutionPoint> points;
  Polyhedron inner;
  Polyhedron outer;
  Polyhedron cut_outer;
  int iterations = 0;
  int subproblems = 0;
  double max_kkt_residual = 0.0;

  bool ok() const { return status == CvopStatus::solved; }
  std::vector<Eigen::VectorXd> weights() const;
  std::vector<double> values() const;
  std::vector<Eigen::VectorXd> images() const;
};

/// Primal Benson outer approximation.
EpsilonSolution solve_cvop(const CvopProblem& problem, double epsilon, const BensonOptions& options = {});

struct ImagePair {
  Polyhedron inner;
  Polyhedron outer;
};
ImagePair images(const EpsilonSolution& sol);

/// Evaluates the objective map of one block at x.
Eigen::VectorXd evaluate_objective(const CvopProblem& problem, int block, const Eigen::VectorXd& x);

}  // namespace setprice
