#pragma once

#include "setprice/core.hpp"
#include "setprice/cvop.hpp"
#include "setprice/markets.hpp"
#include "setprice/polytope.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace setprice {

enum class Side { buy, sell };
const char* to_string(Side s);

struct PricingOptions {
  double epsilon = 1e-6;
  Eigen::VectorXd direction;  // k in utility space; empty means the normalized ones vector
  /// Ordering cone of the price problems. Empty means R^d_+ for frictionless
  /// markets and K_0 for conical ones.
  std::optional<Cone> price_cone;
  BensonOptions benson;
};

// ---------------------------------------------------------------------------
// Certainty equivalents

enum class CeRegion { upper, lower };

/// Exact test: upper means u(c) >= max_Q E_Q u(Z) for every u, lower means
/// u(c) <= min_Q E_Q u(Z) for every u.
bool ce_membership(const PreferenceRepresentation& pref, const Eigen::VectorXd& c, const RandomVector& z,
                   CeRegion region, double tol = kCompareTol);

struct RegionApprox {
  CvopStatus status = CvopStatus::solved;
  std::string message;
  Polyhedron inner;  // subset of the region
  Polyhedron outer;  // superset of the region
};

struct CeResult {
  std::string method;  // "closed_form" or "cvop"
  RegionApprox upper;  // C_up
  /// One upper set per utility; their union is the closure of the complement of C_low.
  std::vector<RegionApprox> lower_complement;
  /// Single-coordinate utilities only: C_up = weak_point + R^d_+, C_low = strong_point - R^d_+.
  std::optional<Eigen::VectorXd> weak_point;
  std::optional<Eigen::VectorXd> strong_point;
  /// d = 1: c^w = sup_{u,Q} u^{-1}(E_Q u(Z)) and c^s = inf_{u,Q} u^{-1}(E_Q u(Z)).
  std::optional<double> weak;
  std::optional<double> strong;
  /// Set when C_up and C_low meet in a single point.
  std::optional<Eigen::VectorXd> point;
};

CeResult ce_regions(const PreferenceRepresentation& pref, const RandomVector& z, const PricingOptions& options = {});

/// Per-utility levels max_Q E_Q u(Z) (upper) or min_Q E_Q u(Z) (lower).
std::vector<double> ce_levels(const PreferenceRepresentation& pref, const RandomVector& z, CeRegion region);

// ---------------------------------------------------------------------------
// Utility maximization

/// Maximize U(V_T + C) over V_T in A(x) as a q-objective CVOP, one objective
/// per (prior, utility) in prior-major order.
CvopProblem utility_problem(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x,
                            const RandomVector& claim, const Eigen::VectorXd& direction = {});

struct UtilityMaxResult {
  EpsilonSolution solution;
  std::vector<Eigen::MatrixXd> hedges;  // terminal wealth V_T of every solution point
};

UtilityMaxResult utility_maximization(const PreferenceRepresentation& pref, const Market& market,
                                      const Eigen::VectorXd& x, const RandomVector& claim,
                                      const PricingOptions& options = {});

/// sup over A(x) of w.U(V_T + C); nullopt when the program is not solved to optimality.
std::optional<double> weighted_utility_value(const PreferenceRepresentation& pref, const Market& market,
                                             const Eigen::VectorXd& x, const RandomVector& claim,
                                             const Eigen::VectorXd& w, Eigen::MatrixXd* hedge = nullptr);

// ---------------------------------------------------------------------------
// Set-valued prices

/// Price vector together with one terminal wealth per constraint block.
struct Hedge {
  Eigen::VectorXd price;
  std::vector<Eigen::MatrixXd> wealth;
};

struct PriceSet {
  CvopStatus status = CvopStatus::failed;
  std::string message;
  Side side = Side::buy;
  /// Buy sets are lower sets and sell sets upper sets w.r.t. `cone`.
  Polyhedron inner;
  Polyhedron outer;
  Cone cone = Cone::orthant(1);
  int blocks = 0;
  std::vector<Hedge> hedges;
  /// d = 1: the finite interval endpoint (nullopt when the set is empty or everything).
  std::optional<double> endpoint;
  /// Largest KKT residual over the optimal scalar subproblems.
  double max_kkt_residual = 0.0;

  bool empty() const { return status == CvopStatus::infeasible; }
};

struct PriceBounds {
  Side side = Side::buy;
  double epsilon = 0.0;
  PriceSet superset;  // its outer set contains the true price set
  PriceSet subset;    // its inner set lies in the true price set (may be empty)
  std::vector<Eigen::VectorXd> weights;  // W
  std::vector<double> levels;           // v^w for w in W
};

/// Weights and levels (w, v^w) read off a utility maximization solution, duplicates removed.
void weight_levels(const EpsilonSolution& umax, std::vector<Eigen::VectorXd>& weights, std::vector<double>& levels,
                   double tol = 1e-9);

PriceSet price_superset(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x0,
                        const RandomVector& claim, Side side, const EpsilonSolution& umax,
                        const PricingOptions& options = {});

PriceSet price_subset(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x0,
                      const RandomVector& claim, Side side, const EpsilonSolution& umax,
                      const PricingOptions& options = {});

PriceBounds price_bounds(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x0,
                         const RandomVector& claim, Side side, const EpsilonSolution& umax,
                         const PricingOptions& options = {});

/// Single utility and single prior: the price set itself is the image of one CVOP.
PriceSet price_exact_single_utility(const PreferenceRepresentation& pref, const Market& market,
                                    const Eigen::VectorXd& x0, const RandomVector& claim, Side side,
                                    const PricingOptions& options = {});

/// sup_{V_T in A(x0)} E u(V_T) for a single utility and prior.
double reservation_utility(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x0);

/// Indifference price in currency j (0-based): p e_j lies on the boundary of the price set.
double scalar_price(const PreferenceRepresentation& pref, const Market& market, const Eigen::VectorXd& x0,
                    const RandomVector& claim, int currency, Side side, const PricingOptions& options = {});

// ---------------------------------------------------------------------------
// Hedging sets

/// {p : C in A(p)} as the upper image of a linear vector program.
PriceSet superhedging(const Market& market, const RandomVector& claim, const PricingOptions& options = {});
/// -superhedging(-C)
PriceSet subhedging(const Market& market, const RandomVector& claim, const PricingOptions& options = {});

// ---------------------------------------------------------------------------
// Trade matching

struct Agent {
  PreferenceRepresentation pref;
  Eigen::VectorXd endowment;
};

struct TradeMatch {
  bool solved = false;
  std::string message;
  double distance = 0.0;  // Euclidean distance between the buy and the sell price
  Eigen::VectorXd buy_price;
  Eigen::VectorXd sell_price;
  Eigen::MatrixXd buyer_wealth;
  Eigen::MatrixXd seller_wealth;
  bool overlap(double tol = 1e-4) const { return solved && distance <= tol; }
};

/// Closest pair of buy price of `buyer` and sell price of `seller` for the
/// same claim and market. Both agents need a single utility and prior.
TradeMatch trade_match(const Agent& buyer, const Agent& seller, const Market& market, const RandomVector& claim);

// ---------------------------------------------------------------------------
// Membership

enum class Membership { in_subset, in_superset_only, outside };
const char* to_string(Membership m);

struct MembershipReport {
  Membership status = Membership::outside;
  /// min over W of sup_{A(x0 -/+ p)} w.U(V_T +/- C) - v^w and the weight attaining it.
  double weighted_gap = 0.0;
  Eigen::VectorXd weight;
  /// Largest common slack s with U(V^i +/- C) >= U(X^i) + eps k + s for all i (capped at 1).
  double subset_slack = 0.0;
};

MembershipReport price_membership(const PreferenceRepresentation& pref, const Market& market,
                                  const Eigen::VectorXd& x0, const RandomVector& claim, const Eigen::VectorXd& p,
                                  Side side, const EpsilonSolution& umax, double tol = 1e-9);

/// Largest amount of currency j obtainable from position x by exchanging at time zero.
double exchange_budget(const Cone& k0, const Eigen::VectorXd& x, int currency);

}  // namespace setprice
