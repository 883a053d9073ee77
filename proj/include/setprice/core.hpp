#pragma once

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace setprice {

/// Raised when two objects that must agree on a dimension do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Real number extended by -infinity. Expected utilities of payoffs that
/// leave the utility domain take the -infinity value; it is never a NaN.
class ExtendedReal {
 public:
  ExtendedReal(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  static ExtendedReal minus_infinity() {
    ExtendedReal r(0.0);
    r.finite_ = false;
    return r;
  }

  bool is_finite() const { return finite_; }
  /// Value for finite numbers, -inf otherwise.
  double value() const { return finite_ ? value_ : -std::numeric_limits<double>::infinity(); }

 private:
  double value_ = 0.0;
  bool finite_ = true;
};

// ---------------------------------------------------------------------------
// Probability space and random vectors

class ProbabilitySpace {
 public:
  ProbabilitySpace(std::vector<std::string> labels, Eigen::VectorXd probs);

  /// Uniform space on n outcomes labelled w1..wn.
  static ProbabilitySpace uniform(int n);

  int size() const { return static_cast<int>(probs_.size()); }
  const Eigen::VectorXd& probs() const { return probs_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int index_of(const std::string& label) const;

 private:
  std::vector<std::string> labels_;
  Eigen::VectorXd probs_;
};

/// Checks that p is a probability vector of length n (entries >= 0, sum 1).
void validate_prior(const Eigen::VectorXd& p, int n);

/// R^d-valued random variable on a finite space: one row per outcome.
class RandomVector {
 public:
  RandomVector() = default;
  explicit RandomVector(Eigen::MatrixXd values);
  static RandomVector constant(int outcomes, const Eigen::VectorXd& c);

  int outcomes() const { return static_cast<int>(values_.rows()); }
  int dim() const { return static_cast<int>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::VectorXd at(int omega) const { return values_.row(omega).transpose(); }

  RandomVector operator-() const { return RandomVector(-values_); }
  RandomVector operator+(const RandomVector& o) const;
  RandomVector operator+(double c) const;
  RandomVector operator*(double c) const { return RandomVector(values_ * c); }

 private:
  Eigen::MatrixXd values_;
};

// ---------------------------------------------------------------------------
// Utilities

enum class UtilityFamily { exponential, shifted_log, linear, power };
enum class Composition { univariate, additive, component };

/// One-dimensional building block of a utility function.
///   exponential  g(x) = 1 - exp(-lambda x)             domain [lower, inf)
///   shifted_log  g(x) = log((x + a) / a)                domain (-a, inf)
///   linear       g(x) = x
///   power        g(x) = ((x + a)^gamma - a^gamma)/gamma  domain [-a, inf), 0 < gamma < 1
struct ScalarUtility {
  UtilityFamily family = UtilityFamily::linear;
  double lambda = 1.0;
  double shift = 0.0;  // `a` for shifted_log and power
  double gamma = 0.5;
  double lower = -std::numeric_limits<double>::infinity();  // explicit domain cut

  static ScalarUtility exponential(double lambda, double lower = -std::numeric_limits<double>::infinity());
  static ScalarUtility shifted_log(double a);
  static ScalarUtility linear();
  static ScalarUtility power(double gamma, double a = 0.0);

  /// Infimum of the domain and whether it belongs to the domain.
  double domain_lower() const;
  bool domain_closed() const;
  bool in_domain(double x) const;
  bool in_interior(double x) const { return x > domain_lower(); }

  ExtendedReal value(double x) const;
  /// value(x) = offset() + shifted_value(x). For utilities bounded above the
  /// offset is the bound, so sums of many nearly saturated terms keep their
  /// small differences.
  double offset() const { return family == UtilityFamily::exponential ? 1.0 : 0.0; }
  ExtendedReal shifted_value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  /// Inverse on the range; nullopt when y is not attained (e.g. y >= 1 for exponential).
  std::optional<double> inverse(double y) const;

  void validate() const;
};

/// Multivariate utility built from scalar parts.
class UtilityFunction {
 public:
  static UtilityFunction univariate(ScalarUtility g);
  static UtilityFunction additive(std::vector<ScalarUtility> parts, std::vector<double> weights);
  /// u(x) = g(x_index) on R^dim.
  static UtilityFunction component(int dim, int index, ScalarUtility g);

  Composition composition() const { return composition_; }
  int dim() const { return dim_; }
  int index() const { return index_; }
  const std::vector<ScalarUtility>& parts() const { return parts_; }
  const std::vector<double>& weights() const { return weights_; }

  bool in_domain(const Eigen::VectorXd& x) const;
  bool in_interior(const Eigen::VectorXd& x) const;
  /// Per-coordinate domain lower bounds (-inf when a coordinate is unrestricted).
  Eigen::VectorXd domain_lower() const;

  ExtendedReal value(const Eigen::VectorXd& x) const;
  /// value(x) = offset() + shifted_value(x), see ScalarUtility::offset.
  double offset() const;
  ExtendedReal shifted_value(const Eigen::VectorXd& x) const;
  /// Analytic gradient and Hessian. Throws std::domain_error outside the domain interior.
  void grad_hess(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const;

  /// Inverse along the diagonal for d=1; for component utilities the inverse of the selected part.
  std::optional<double> inverse_scalar(double y) const;

 private:
  Composition composition_ = Composition::univariate;
  int dim_ = 1;
  int index_ = 0;
  std::vector<ScalarUtility> parts_;
  std::vector<double> weights_;
};

struct GradHess {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};
GradHess utility_grad_hess(const UtilityFunction& u, const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Preferences

/// Multi-prior expected multi-utility representation: r utilities, s priors.
class PreferenceRepresentation {
 public:
  PreferenceRepresentation(std::vector<UtilityFunction> utilities, std::vector<Eigen::VectorXd> priors);

  int r() const { return static_cast<int>(utilities_.size()); }
  int s() const { return static_cast<int>(priors_.size()); }
  int q() const { return r() * s(); }
  int dim() const { return utilities_.front().dim(); }
  int outcomes() const { return static_cast<int>(priors_.front().size()); }

  const std::vector<UtilityFunction>& utilities() const { return utilities_; }
  const std::vector<Eigen::VectorXd>& priors() const { return priors_; }

  /// Position of (prior, utility) in the vector functional: prior-major.
  int component(int prior, int utility) const { return prior * r() + utility; }

  /// True when every utility selects one coordinate and each coordinate is selected.
  bool is_componentwise() const;

 private:
  std::vector<UtilityFunction> utilities_;
  std::vector<Eigen::VectorXd> priors_;
};

ExtendedReal expected_utility(const UtilityFunction& u, const Eigen::VectorXd& prior, const RandomVector& z);

/// (E_{Q1}u1, ..., E_{Q1}ur, ..., E_{Qs}u1, ..., E_{Qs}ur). Entries are -inf when outside domain.
Eigen::VectorXd vector_utility(const PreferenceRepresentation& pref, const RandomVector& z);

enum class Preference { y_preferred, z_preferred, indifferent, incomparable };

inline constexpr double kCompareTol = 1e-10;

Preference prefers(const PreferenceRepresentation& pref, const RandomVector& y, const RandomVector& z,
                   double tol = kCompareTol);

const char* to_string(Preference p);
const char* to_string(UtilityFamily f);

}  // namespace setprice
