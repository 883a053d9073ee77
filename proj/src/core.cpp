#include "setprice/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace setprice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_dims(const char* what, long a, long b) {
  std::ostringstream os;
  os << what << ": " << a << " vs " << b;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

ProbabilitySpace::ProbabilitySpace(std::vector<std::string> labels, Eigen::VectorXd probs)
    : labels_(std::move(labels)), probs_(std::move(probs)) {
  if (probs_.size() == 0) throw std::invalid_argument("probability space needs at least one outcome");
  if (static_cast<long>(labels_.size()) != probs_.size())
    throw DimensionError(fmt_dims("outcome labels vs probabilities", labels_.size(), probs_.size()));
  for (int i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] > 0.0) || !std::isfinite(probs_[i]))
      throw std::invalid_argument("outcome probabilities must be strictly positive");
  }
  if (std::abs(probs_.sum() - 1.0) > 1e-12) throw std::invalid_argument("outcome probabilities must sum to 1");
}

ProbabilitySpace ProbabilitySpace::uniform(int n) {
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) labels.push_back("w" + std::to_string(i + 1));
  return {std::move(labels), Eigen::VectorXd::Constant(n, 1.0 / n)};
}

int ProbabilitySpace::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw std::invalid_argument("unknown outcome label '" + label + "'");
  return static_cast<int>(it - labels_.begin());
}

void validate_prior(const Eigen::VectorXd& p, int n) {
  if (p.size() != n) throw DimensionError(fmt_dims("prior length vs outcomes", p.size(), n));
  for (int i = 0; i < n; ++i)
    if (!(p[i] >= 0.0) || !std::isfinite(p[i])) throw std::invalid_argument("prior entries must be non-negative");
  if (std::abs(p.sum() - 1.0) > 1e-12) throw std::invalid_argument("prior must sum to 1");
}

RandomVector::RandomVector(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (!values_.allFinite()) throw std::invalid_argument("random vector entries must be finite");
}

RandomVector RandomVector::constant(int outcomes, const Eigen::VectorXd& c) {
  Eigen::MatrixXd m(outcomes, c.size());
  for (int i = 0; i < outcomes; ++i) m.row(i) = c.transpose();
  return RandomVector(std::move(m));
}

RandomVector RandomVector::operator+(const RandomVector& o) const {
  if (o.values_.rows() != values_.rows() || o.values_.cols() != values_.cols())
    throw DimensionError("random vector shapes differ");
  return RandomVector(values_ + o.values_);
}

RandomVector RandomVector::operator+(double c) const {
  return RandomVector((values_.array() + c).matrix());
}

// ---------------------------------------------------------------------------
// Scalar utilities

ScalarUtility ScalarUtility::exponential(double lambda, double lower) {
  ScalarUtility g;
  g.family = UtilityFamily::exponential;
  g.lambda = lambda;
  g.lower = lower;
  g.validate();
  return g;
}

ScalarUtility ScalarUtility::shifted_log(double a) {
  ScalarUtility g;
  g.family = UtilityFamily::shifted_log;
  g.shift = a;
  g.validate();
  return g;
}

ScalarUtility ScalarUtility::linear() { return {}; }

ScalarUtility ScalarUtility::power(double gamma, double a) {
  ScalarUtility g;
  g.family = UtilityFamily::power;
  g.gamma = gamma;
  g.shift = a;
  g.validate();
  return g;
}

void ScalarUtility::validate() const {
  switch (family) {
    case UtilityFamily::exponential:
      if (!(lambda > 0.0)) throw std::invalid_argument("exponential utility needs lambda > 0");
      break;
    case UtilityFamily::shifted_log:
      if (!(shift > 0.0)) throw std::invalid_argument("shifted log utility needs a > 0");
      break;
    case UtilityFamily::power:
      if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("power utility needs 0 < gamma < 1");
      if (!(shift >= 0.0)) throw std::invalid_argument("power utility needs a >= 0");
      break;
    case UtilityFamily::linear:
      break;
  }
}

double ScalarUtility::domain_lower() const {
  switch (family) {
    case UtilityFamily::shifted_log:
    case UtilityFamily::power:
      return std::max(lower, -shift);
    default:
      return lower;
  }
}

bool ScalarUtility::domain_closed() const {
  // log is -inf at its boundary; the others are finite there
  return !(family == UtilityFamily::shifted_log && domain_lower() == -shift);
}

bool ScalarUtility::in_domain(double x) const {
  const double lo = domain_lower();
  return domain_closed() ? x >= lo : x > lo;
}

ExtendedReal ScalarUtility::value(double x) const {
  if (!in_domain(x)) return ExtendedReal::minus_infinity();
  switch (family) {
    case UtilityFamily::exponential:
      return -std::expm1(-lambda * x);
    case UtilityFamily::shifted_log:
      return std::log1p(x / shift);
    case UtilityFamily::linear:
      return x;
    case UtilityFamily::power:
      return (std::pow(x + shift, gamma) - std::pow(shift, gamma)) / gamma;
  }
  return x;
}

ExtendedReal ScalarUtility::shifted_value(double x) const {
  if (!in_domain(x)) return ExtendedReal::minus_infinity();
  if (family == UtilityFamily::exponential) return -std::exp(-lambda * x);
  return value(x);
}

double ScalarUtility::d1(double x) const {
  switch (family) {
    case UtilityFamily::exponential:
      return lambda * std::exp(-lambda * x);
    case UtilityFamily::shifted_log:
      return 1.0 / (x + shift);
    case UtilityFamily::linear:
      return 1.0;
    case UtilityFamily::power:
      return std::pow(x + shift, gamma - 1.0);
  }
  return 1.0;
}

double ScalarUtility::d2(double x) const {
  switch (family) {
    case UtilityFamily::exponential:
      return -lambda * lambda * std::exp(-lambda * x);
    case UtilityFamily::shifted_log:
      return -1.0 / ((x + shift) * (x + shift));
    case UtilityFamily::linear:
      return 0.0;
    case UtilityFamily::power:
      return (gamma - 1.0) * std::pow(x + shift, gamma - 2.0);
  }
  return 0.0;
}

std::optional<double> ScalarUtility::inverse(double y) const {
  double x = 0.0;
  switch (family) {
    case UtilityFamily::exponential:
      if (y >= 1.0) return std::nullopt;
      x = -std::log1p(-y) / lambda;
      break;
    case UtilityFamily::shifted_log:
      x = shift * std::expm1(y);
      break;
    case UtilityFamily::linear:
      x = y;
      break;
    case UtilityFamily::power: {
      const double base = gamma * y + std::pow(shift, gamma);
      if (base < 0.0) return std::nullopt;
      x = std::pow(base, 1.0 / gamma) - shift;
      break;
    }
  }
  if (!in_domain(x)) return std::nullopt;
  return x;
}

// ---------------------------------------------------------------------------
// Multivariate utilities

UtilityFunction UtilityFunction::univariate(ScalarUtility g) {
  g.validate();
  UtilityFunction u;
  u.composition_ = Composition::univariate;
  u.dim_ = 1;
  u.parts_ = {g};
  u.weights_ = {1.0};
  return u;
}

UtilityFunction UtilityFunction::additive(std::vector<ScalarUtility> parts, std::vector<double> weights) {
  if (parts.empty()) throw std::invalid_argument("additive utility needs at least one part");
  if (parts.size() != weights.size()) throw DimensionError(fmt_dims("additive parts vs weights", parts.size(), weights.size()));
  // strictly increasing needs every coordinate to count
  for (double w : weights)
    if (!(w > 0.0)) throw std::invalid_argument("additive utility weights must be positive");
  for (const auto& g : parts) g.validate();
  UtilityFunction u;
  u.composition_ = Composition::additive;
  u.dim_ = static_cast<int>(parts.size());
  u.parts_ = std::move(parts);
  u.weights_ = std::move(weights);
  return u;
}

UtilityFunction UtilityFunction::component(int dim, int index, ScalarUtility g) {
  if (index < 0 || index >= dim) throw std::invalid_argument("component utility index out of range");
  g.validate();
  UtilityFunction u;
  u.composition_ = Composition::component;
  u.dim_ = dim;
  u.index_ = index;
  u.parts_ = {g};
  u.weights_ = {1.0};
  return u;
}

Eigen::VectorXd UtilityFunction::domain_lower() const {
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(dim_, -kInf);
  switch (composition_) {
    case Composition::univariate:
      lo[0] = parts_[0].domain_lower();
      break;
    case Composition::additive:
      for (int i = 0; i < dim_; ++i) lo[i] = parts_[i].domain_lower();
      break;
    case Composition::component:
      lo[index_] = parts_[0].domain_lower();
      break;
  }
  return lo;
}

bool UtilityFunction::in_domain(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw DimensionError(fmt_dims("utility argument", x.size(), dim_));
  switch (composition_) {
    case Composition::univariate:
      return parts_[0].in_domain(x[0]);
    case Composition::additive:
      for (int i = 0; i < dim_; ++i)
        if (!parts_[i].in_domain(x[i])) return false;
      return true;
    case Composition::component:
      return parts_[0].in_domain(x[index_]);
  }
  return false;
}

bool UtilityFunction::in_interior(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw DimensionError(fmt_dims("utility argument", x.size(), dim_));
  switch (composition_) {
    case Composition::univariate:
      return parts_[0].in_interior(x[0]);
    case Composition::additive:
      for (int i = 0; i < dim_; ++i)
        if (!parts_[i].in_interior(x[i])) return false;
      return true;
    case Composition::component:
      return parts_[0].in_interior(x[index_]);
  }
  return false;
}

ExtendedReal UtilityFunction::value(const Eigen::VectorXd& x) const {
  if (!in_domain(x)) return ExtendedReal::minus_infinity();
  switch (composition_) {
    case Composition::univariate:
      return parts_[0].value(x[0]);
    case Composition::additive: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += weights_[i] * parts_[i].value(x[i]).value();
      return s;
    }
    case Composition::component:
      return parts_[0].value(x[index_]);
  }
  return ExtendedReal::minus_infinity();
}

double UtilityFunction::offset() const {
  if (composition_ != Composition::additive) return parts_[0].offset();
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += weights_[i] * parts_[i].offset();
  return s;
}

ExtendedReal UtilityFunction::shifted_value(const Eigen::VectorXd& x) const {
  if (!in_domain(x)) return ExtendedReal::minus_infinity();
  switch (composition_) {
    case Composition::univariate:
      return parts_[0].shifted_value(x[0]);
    case Composition::additive: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += weights_[i] * parts_[i].shifted_value(x[i]).value();
      return s;
    }
    case Composition::component:
      return parts_[0].shifted_value(x[index_]);
  }
  return ExtendedReal::minus_infinity();
}

void UtilityFunction::grad_hess(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
  if (!in_interior(x)) throw std::domain_error("utility derivatives requested outside the domain interior");
  grad.setZero(dim_);
  hess.setZero(dim_, dim_);
  switch (composition_) {
    case Composition::univariate:
      grad[0] = parts_[0].d1(x[0]);
      hess(0, 0) = parts_[0].d2(x[0]);
      break;
    case Composition::additive:
      for (int i = 0; i < dim_; ++i) {
        grad[i] = weights_[i] * parts_[i].d1(x[i]);
        hess(i, i) = weights_[i] * parts_[i].d2(x[i]);
      }
      break;
    case Composition::component:
      grad[index_] = parts_[0].d1(x[index_]);
      hess(index_, index_) = parts_[0].d2(x[index_]);
      break;
  }
}

std::optional<double> UtilityFunction::inverse_scalar(double y) const {
  if (composition_ == Composition::additive) {
    if (dim_ != 1) return std::nullopt;
    return parts_[0].inverse(y / weights_[0]);
  }
  return parts_[0].inverse(y);
}

GradHess utility_grad_hess(const UtilityFunction& u, const Eigen::VectorXd& x) {
  GradHess gh;
  u.grad_hess(x, gh.gradient, gh.hessian);
  return gh;
}

// ---------------------------------------------------------------------------

PreferenceRepresentation::PreferenceRepresentation(std::vector<UtilityFunction> utilities,
                                                   std::vector<Eigen::VectorXd> priors)
    : utilities_(std::move(utilities)), priors_(std::move(priors)) {
  if (utilities_.empty()) throw std::invalid_argument("preference needs at least one utility");
  if (priors_.empty()) throw std::invalid_argument("preference needs at least one prior");
  const int d = utilities_.front().dim();
  for (const auto& u : utilities_)
    if (u.dim() != d) throw DimensionError(fmt_dims("utility dimensions", u.dim(), d));
  const int n = static_cast<int>(priors_.front().size());
  for (const auto& p : priors_) validate_prior(p, n);
}

bool PreferenceRepresentation::is_componentwise() const {
  std::vector<bool> covered(dim(), false);
  for (const auto& u : utilities_) {
    if (u.composition() == Composition::component) {
      covered[u.index()] = true;
    } else if (u.composition() == Composition::univariate && dim() == 1) {
      covered[0] = true;
    } else {
      return false;
    }
  }
  return std::all_of(covered.begin(), covered.end(), [](bool b) { return b; });
}

ExtendedReal expected_utility(const UtilityFunction& u, const Eigen::VectorXd& prior, const RandomVector& z) {
  if (z.dim() != u.dim()) throw DimensionError(fmt_dims("utility dimension vs payoff dimension", u.dim(), z.dim()));
  if (prior.size() != z.outcomes()) throw DimensionError(fmt_dims("prior length vs outcomes", prior.size(), z.outcomes()));
  double s = 0.0;
  for (int w = 0; w < z.outcomes(); ++w) {
    if (prior[w] == 0.0) continue;
    const ExtendedReal v = u.value(z.at(w));
    if (!v.is_finite()) return ExtendedReal::minus_infinity();
    s += prior[w] * v.value();
  }
  return s;
}

Eigen::VectorXd vector_utility(const PreferenceRepresentation& pref, const RandomVector& z) {
  Eigen::VectorXd out(pref.q());
  for (int s = 0; s < pref.s(); ++s)
    for (int r = 0; r < pref.r(); ++r)
      out[pref.component(s, r)] = expected_utility(pref.utilities()[r], pref.priors()[s], z).value();
  return out;
}

Preference prefers(const PreferenceRepresentation& pref, const RandomVector& y, const RandomVector& z, double tol) {
  if (y.dim() != z.dim() || y.outcomes() != z.outcomes()) throw DimensionError("compared payoffs differ in shape");
  const Eigen::VectorXd uy = vector_utility(pref, y);
  const Eigen::VectorXd uz = vector_utility(pref, z);
  bool y_ge = true;
  bool z_ge = true;
  for (int i = 0; i < uy.size(); ++i) {
    const double a = uy[i];
    const double b = uz[i];
    if (a == b) continue;  // covers both -inf
    if (a < b - tol) y_ge = false;
    if (b < a - tol) z_ge = false;
  }
  if (y_ge && z_ge) return Preference::indifferent;
  if (y_ge) return Preference::y_preferred;
  if (z_ge) return Preference::z_preferred;
  return Preference::incomparable;
}

const char* to_string(Preference p) {
  switch (p) {
    case Preference::y_preferred:
      return "y_preferred";
    case Preference::z_preferred:
      return "z_preferred";
    case Preference::indifferent:
      return "indifferent";
    case Preference::incomparable:
      return "incomparable";
  }
  return "?";
}

const char* to_string(UtilityFamily f) {
  switch (f) {
    case UtilityFamily::exponential:
      return "exponential";
    case UtilityFamily::shifted_log:
      return "shifted_log";
    case UtilityFamily::linear:
      return "linear";
    case UtilityFamily::power:
      return "power";
  }
  return "?";
}

}  // namespace setprice
