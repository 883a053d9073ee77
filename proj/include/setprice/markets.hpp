#pragma once

#include "setprice/core.hpp"
#include "setprice/polytope.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace setprice {

/// Terminal wealth as an affine function of the trading decisions:
///   V_T(omega)_j = x_j + coeff.row(omega * dim + j) . z,  z >= lower.
/// The endowment enters only through the constant x, so A(x) = x + A(0).
struct WealthBlock {
  int outcomes = 0;
  int dim = 1;
  Eigen::MatrixXd coeff;  // (outcomes*dim) x decisions
  Eigen::VectorXd lower;  // per decision, -inf for free variables
  std::vector<std::string> names;
  Eigen::VectorXd endowment;  // x

  int decisions() const { return static_cast<int>(coeff.cols()); }
  int row(int omega, int j) const { return omega * dim + j; }
  /// Terminal wealth table (outcomes x dim) for decision z.
  Eigen::MatrixXd wealth(const Eigen::VectorXd& z) const;
};

/// One-period market with n assets of which the ones listed in `traded` can
/// be bought and sold without costs. Wealth is measured in one currency.
struct FrictionlessMarket {
  Eigen::VectorXd S0;        // n initial prices
  Eigen::MatrixXd ST;        // outcomes x n terminal prices
  std::vector<int> traded;   // m < n asset indices

  void validate(int outcomes) const;
};

/// Node of an event tree. Leaves carry the outcome they stand for.
struct TreeNode {
  std::vector<Eigen::VectorXd> cone_generators;  // generators of the solvency cone at this node
  std::vector<int> children;
  int outcome = -1;  // leaves only
};

/// Multi-period market with proportional transaction costs in d currencies,
/// A_T = -K_0 - K_1 - ... - K_T along every path of the tree. Node 0 is the root.
struct ConicalMarket {
  int d = 2;
  std::vector<TreeNode> nodes;

  /// Checks tree shape, leaf/outcome coverage and R^d_+ within every cone.
  void validate(int outcomes) const;
  int horizon() const;
  /// Root-to-leaf node path for every outcome.
  std::vector<std::vector<int>> paths(int outcomes) const;
  Cone solvency_cone(int node) const;
};

class Market {
 public:
  enum class Kind { frictionless, conical };

  static Market frictionless(FrictionlessMarket m, int outcomes);
  static Market conical(ConicalMarket m, int outcomes);

  Kind kind() const { return kind_; }
  int dim() const { return kind_ == Kind::frictionless ? 1 : conical_.d; }
  int outcomes() const { return outcomes_; }
  const FrictionlessMarket& frictionless_data() const { return frictionless_; }
  const ConicalMarket& conical_data() const { return conical_; }

  /// Affine description of A(x).
  WealthBlock feasible_block(const Eigen::VectorXd& x) const;
  /// Cone used to order prices: R^d_+ for frictionless markets, K_0 otherwise.
  Cone initial_cone() const;

 private:
  Kind kind_ = Kind::frictionless;
  int outcomes_ = 0;
  FrictionlessMarket frictionless_;
  ConicalMarket conical_;
};

/// Smallest t >= 0 with |V - (x + coeff z)| <= t for some admissible z, i.e.
/// the sup-norm distance from the wealth table V (outcomes x dim) to the
/// affine image of A(x). Solved as a linear program.
double membership_residual(const Market& market, const Eigen::VectorXd& x, const Eigen::MatrixXd& V);

struct AssumptionItem {
  std::string name;
  bool passed = true;
  double worst = 0.0;  // largest membership residual seen
};

struct AssumptionReport {
  std::vector<AssumptionItem> items;
  bool passed() const;
};

/// Randomized probes of convexity, mixture closure, monotonicity, translation
/// and closedness of A(.). A test aid, not a proof.
AssumptionReport assumption_probe(const Market& market, int samples = 10, std::uint64_t seed = 7,
                                  double tol = 1e-7);

}  // namespace setprice
