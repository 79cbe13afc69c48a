#include "sheafid/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "sheafid/error.hpp"

namespace sheafid {

namespace {

double edge_norm(const Sheaf& sheaf, std::size_t e, const Vec& y_e) {
  return std::sqrt(std::max(0.0, y_e.dot(sheaf.edge_grams[e] * y_e)));
}

bool is_negative(const std::vector<std::size_t>& neg, std::size_t e) {
  return std::find(neg.begin(), neg.end(), e) != neg.end();
}

// sum_m theta_m r^(2(m-1)) over the first `terms` coefficients.
double monomial_gain(const std::vector<double>& theta, std::size_t terms, double r2) {
  double gain = 0.0;
  double pow = 1.0;
  for (std::size_t m = 0; m < terms; ++m) {
    gain += theta[m] * pow;
    pow *= r2;
  }
  return gain;
}

double monomial_value(const std::vector<double>& theta, std::size_t terms, double r2) {
  double value = 0.0;
  double pow = r2;
  for (std::size_t m = 0; m < terms; ++m) {
    value += theta[m] * pow / static_cast<double>(2 * (m + 1));
    pow *= r2;
  }
  return value;
}

}  // namespace

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::quadratic: return "quadratic";
    case PotentialKind::shifted_quadratic: return "shifted_quadratic";
    case PotentialKind::bounded_confidence: return "bounded_confidence";
    case PotentialKind::antagonistic: return "antagonistic";
    case PotentialKind::monomial: return "monomial";
    case PotentialKind::harmonic_augmented: return "harmonic_augmented";
  }
  return "unknown";
}

std::optional<PotentialKind> potential_kind_from_string(const std::string& name) {
  for (auto k : {PotentialKind::quadratic, PotentialKind::shifted_quadratic,
                 PotentialKind::bounded_confidence, PotentialKind::antagonistic,
                 PotentialKind::monomial, PotentialKind::harmonic_augmented}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

double bc_profile(double r, double eps) {
  require(eps > 0.0, ErrorKind::parameter, "bounded-confidence threshold must be positive");
  if (r > eps) return eps * eps / 6.0;
  const double e2 = eps * eps;
  const double r2 = r * r;
  return 0.5 * r2 - r2 * r2 / (2.0 * e2) + r2 * r2 * r2 / (6.0 * e2 * e2);
}

double bc_profile_derivative(double r, double eps) {
  require(eps > 0.0, ErrorKind::parameter, "bounded-confidence threshold must be positive");
  if (r > eps) return 0.0;
  const double s = 1.0 - (r * r) / (eps * eps);
  return r * s * s;
}

PotentialModel PotentialModel::quadratic() { return PotentialModel{}; }

PotentialModel PotentialModel::shifted_quadratic(Vec target) {
  PotentialModel m;
  m.kind_ = PotentialKind::shifted_quadratic;
  m.target_ = std::move(target);
  return m;
}

PotentialModel PotentialModel::bounded_confidence(double epsilon) {
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::parameter,
          "bounded-confidence threshold must be positive");
  PotentialModel m;
  m.kind_ = PotentialKind::bounded_confidence;
  m.epsilon_ = epsilon;
  return m;
}

PotentialModel PotentialModel::antagonistic(std::vector<std::size_t> negative_edges) {
  PotentialModel m;
  m.kind_ = PotentialKind::antagonistic;
  std::sort(negative_edges.begin(), negative_edges.end());
  negative_edges.erase(std::unique(negative_edges.begin(), negative_edges.end()),
                       negative_edges.end());
  m.negative_edges_ = std::move(negative_edges);
  return m;
}

PotentialModel PotentialModel::monomial(std::vector<double> theta) {
  require(!theta.empty(), ErrorKind::parameter, "monomial potential needs at least one coefficient");
  PotentialModel m;
  m.kind_ = PotentialKind::monomial;
  m.theta_ = std::move(theta);
  return m;
}

PotentialModel PotentialModel::harmonic_augmented(std::vector<double> theta, Vec constant_force) {
  require(theta.size() >= 2, ErrorKind::parameter,
          "harmonic_augmented needs monomial coefficients plus the harmonic coefficient");
  PotentialModel m;
  m.kind_ = PotentialKind::harmonic_augmented;
  m.theta_ = std::move(theta);
  m.constant_force_ = std::move(constant_force);
  return m;
}

bool PotentialModel::is_parametric() const {
  return kind_ == PotentialKind::monomial || kind_ == PotentialKind::harmonic_augmented ||
         kind_ == PotentialKind::bounded_confidence;
}

bool PotentialModel::is_linear_in_parameters() const {
  return kind_ == PotentialKind::monomial || kind_ == PotentialKind::harmonic_augmented;
}

std::size_t PotentialModel::parameter_count() const {
  switch (kind_) {
    case PotentialKind::monomial:
    case PotentialKind::harmonic_augmented: return theta_.size();
    case PotentialKind::bounded_confidence: return 1;
    default: return 0;
  }
}

std::vector<double> PotentialModel::parameters() const {
  if (kind_ == PotentialKind::bounded_confidence) return {epsilon_};
  return theta_;
}

PotentialModel PotentialModel::with_parameters(const std::vector<double>& params) const {
  require(is_parametric(), ErrorKind::usage, to_string(kind_) + " potential has no parameters");
  require(params.size() == parameter_count(), ErrorKind::usage, "parameter count mismatch");
  if (kind_ == PotentialKind::bounded_confidence) return bounded_confidence(params[0]);
  PotentialModel m = *this;
  m.theta_ = params;
  return m;
}

void PotentialModel::check_compatible(const Sheaf& sheaf) const {
  const auto n1 = static_cast<Eigen::Index>(sheaf.d1());
  if (kind_ == PotentialKind::shifted_quadratic) {
    require(target_.size() == n1, ErrorKind::structure, "shift target length does not match C^1");
  }
  if (kind_ == PotentialKind::harmonic_augmented) {
    require(constant_force_.size() == n1, ErrorKind::structure,
            "constant force length does not match C^1");
  }
  for (std::size_t e : negative_edges_) {
    require(e < sheaf.graph.edges.size(), ErrorKind::structure, "antagonistic edge id out of range");
  }
}

Vec PotentialModel::edge_force(const Sheaf& sheaf, std::size_t e, const Vec& y_e) const {
  switch (kind_) {
    case PotentialKind::quadratic: return y_e;
    case PotentialKind::shifted_quadratic:
      return y_e - target_.segment(static_cast<Eigen::Index>(sheaf.edge_offset(e)), y_e.size());
    case PotentialKind::antagonistic: return is_negative(negative_edges_, e) ? Vec(-2.0 * y_e) : y_e;
    case PotentialKind::bounded_confidence: {
      const double r = edge_norm(sheaf, e, y_e);
      if (r > epsilon_) return Vec::Zero(y_e.size());
      const double s = 1.0 - (r * r) / (epsilon_ * epsilon_);
      return y_e * (s * s);
    }
    case PotentialKind::monomial: {
      const double r = edge_norm(sheaf, e, y_e);
      return y_e * monomial_gain(theta_, theta_.size(), r * r);
    }
    case PotentialKind::harmonic_augmented: {
      const double r = edge_norm(sheaf, e, y_e);
      const std::size_t p = theta_.size();
      return y_e * monomial_gain(theta_, p - 1, r * r) +
             theta_[p - 1] *
                 constant_force_.segment(static_cast<Eigen::Index>(sheaf.edge_offset(e)), y_e.size());
    }
  }
  return y_e;
}

Vec PotentialModel::force(const Sheaf& sheaf, const Vec& y) const {
  require(static_cast<std::size_t>(y.size()) == sheaf.d1(), ErrorKind::structure,
          "1-cochain length mismatch in potential force");
  check_compatible(sheaf);
  Vec out(y.size());
  Eigen::Index at = 0;
  for (std::size_t e = 0; e < sheaf.graph.edges.size(); ++e) {
    const Eigen::Index d = sheaf.edge_dims[e];
    out.segment(at, d) = edge_force(sheaf, e, y.segment(at, d));
    at += d;
  }
  return out;
}

double PotentialModel::value(const Sheaf& sheaf, const Vec& y) const {
  require(static_cast<std::size_t>(y.size()) == sheaf.d1(), ErrorKind::structure,
          "1-cochain length mismatch in potential value");
  check_compatible(sheaf);
  double total = 0.0;
  Eigen::Index at = 0;
  for (std::size_t e = 0; e < sheaf.graph.edges.size(); ++e) {
    const Eigen::Index d = sheaf.edge_dims[e];
    const Vec y_e = y.segment(at, d);
    const Mat& g = sheaf.edge_grams[e];
    const double r2 = std::max(0.0, y_e.dot(g * y_e));
    switch (kind_) {
      case PotentialKind::quadratic: total += 0.5 * r2; break;
      case PotentialKind::shifted_quadratic: {
        const Vec diff = y_e - target_.segment(at, d);
        total += 0.5 * diff.dot(g * diff);
        break;
      }
      case PotentialKind::antagonistic:
        total += is_negative(negative_edges_, e) ? -r2 : 0.5 * r2;
        break;
      case PotentialKind::bounded_confidence: total += bc_profile(std::sqrt(r2), epsilon_); break;
      case PotentialKind::monomial: total += monomial_value(theta_, theta_.size(), r2); break;
      case PotentialKind::harmonic_augmented: {
        const std::size_t p = theta_.size();
        total += monomial_value(theta_, p - 1, r2) +
                 theta_[p - 1] * constant_force_.segment(at, d).dot(g * y_e);
        break;
      }
    }
    at += d;
  }
  return total;
}

Mat PotentialModel::edge_param_jacobian(const Sheaf& sheaf, std::size_t e, const Vec& y_e) const {
  require(is_parametric(), ErrorKind::usage,
          "parameter Jacobian requested for non-parametric potential " + to_string(kind_));
  const double r = edge_norm(sheaf, e, y_e);
  const double r2 = r * r;
  if (kind_ == PotentialKind::bounded_confidence) {
    Mat out = Mat::Zero(y_e.size(), 1);
    if (r <= epsilon_) {
      const double e2 = epsilon_ * epsilon_;
      out.col(0) = y_e * (4.0 * (1.0 - r2 / e2) * r2 / (e2 * epsilon_));
    }
    return out;
  }
  const std::size_t p = theta_.size();
  const std::size_t mono = kind_ == PotentialKind::harmonic_augmented ? p - 1 : p;
  Mat out(y_e.size(), static_cast<Eigen::Index>(p));
  double pow = 1.0;
  for (std::size_t m = 0; m < mono; ++m) {
    out.col(static_cast<Eigen::Index>(m)) = y_e * pow;
    pow *= r2;
  }
  if (kind_ == PotentialKind::harmonic_augmented) {
    out.col(static_cast<Eigen::Index>(p - 1)) =
        constant_force_.segment(static_cast<Eigen::Index>(sheaf.edge_offset(e)), y_e.size());
  }
  return out;
}

NodeField NodeField::zero() { return NodeField{}; }

NodeField NodeField::custom(ValueFn value, GradientFn gradient) {
  require(value && gradient, ErrorKind::usage, "custom node field needs value and gradient");
  NodeField f;
  f.zero_ = false;
  f.value_ = std::move(value);
  f.gradient_ = std::move(gradient);
  return f;
}

NodeField NodeField::quadratic_anchor(double weight, Vec anchor) {
  NodeField f;
  f.zero_ = false;
  f.anchored_ = true;
  f.anchor_weight_ = weight;
  f.anchor_ = std::move(anchor);
  return f;
}

double NodeField::value(const Sheaf& sheaf, const Vec& x) const {
  if (zero_) return 0.0;
  require(static_cast<std::size_t>(x.size()) == sheaf.d0(), ErrorKind::structure,
          "0-cochain length mismatch in node field");
  double total = 0.0;
  Eigen::Index at = 0;
  for (std::size_t v = 0; v < sheaf.graph.vertex_count; ++v) {
    const Eigen::Index d = sheaf.vertex_dims[v];
    const Vec x_v = x.segment(at, d);
    if (anchored_) {
      const Vec diff = x_v - anchor_.segment(at, d);
      total += 0.5 * anchor_weight_ * diff.dot(sheaf.vertex_grams[v] * diff);
    } else {
      total += value_(v, x_v);
    }
    at += d;
  }
  return total;
}

Vec NodeField::gradient(const Sheaf& sheaf, const Vec& x) const {
  if (zero_) return Vec::Zero(x.size());
  require(static_cast<std::size_t>(x.size()) == sheaf.d0(), ErrorKind::structure,
          "0-cochain length mismatch in node field");
  if (anchored_) {
    require(anchor_.size() == x.size(), ErrorKind::structure, "anchor length does not match C^0");
    return anchor_weight_ * (x - anchor_);
  }
  Vec out(x.size());
  Eigen::Index at = 0;
  for (std::size_t v = 0; v < sheaf.graph.vertex_count; ++v) {
    const Eigen::Index d = sheaf.vertex_dims[v];
    out.segment(at, d) = gradient_(v, x.segment(at, d));
    at += d;
  }
  return out;
}

}  // namespace sheafid
