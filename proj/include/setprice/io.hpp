#pragma once

#include "setprice/core.hpp"
#include "setprice/cvop.hpp"
#include "setprice/markets.hpp"
#include "setprice/polytope.hpp"
#include "setprice/pricing.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>

namespace setprice {

using Json = nlohmann::ordered_json;

/// Problem file rejected by the schema. `path` locates the offending entry,
/// e.g. "$.market.ST[2][1]".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class OrderingChoice { automatic, orthant, k0 };

struct Counterparty {
  PreferenceRepresentation pref;
  Eigen::VectorXd x0;
};

struct Problem {
  ProbabilitySpace space = ProbabilitySpace::uniform(1);
  PreferenceRepresentation pref;
  Market market;
  RandomVector claim;
  Eigen::VectorXd x0;
  double epsilon = 1e-6;
  Eigen::VectorXd direction;  // empty means the default
  OrderingChoice ordering = OrderingChoice::automatic;
  std::optional<Counterparty> counterparty;

  /// Pricing options with the file's epsilon, direction and ordering cone.
  PricingOptions options() const;
};

Problem parse_problem(const Json& doc);
/// Reads and parses a problem file; unreadable or malformed JSON is a SchemaError at "$".
Problem load_problem(const std::string& path);

// ---------------------------------------------------------------------------
// Writers. Doubles are written with round-trip precision; absent values are null.

Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);
Json to_json(const Polyhedron& p);
Json to_json(const EpsilonSolution& s);
Json to_json(const CeResult& c);
Json to_json(const UtilityMaxResult& u);
Json to_json(const PriceSet& p);
Json to_json(const PriceBounds& b);
Json to_json(const TradeMatch& t);

/// Inverse of to_json(Polyhedron); the H-representation is used when present.
Polyhedron polyhedron_from_json(const Json& j);

/// One line per vertex, then one per ray, as kind,coord0,coord1,...
std::string polyhedron_csv(const Polyhedron& p);
/// Image points of a solution with their weights: image..., weight..., value.
std::string frontier_csv(const EpsilonSolution& s);

}  // namespace setprice
