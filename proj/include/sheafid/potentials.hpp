#pragma once

// Edge potential families U(y) = sum_e U_e(y_e) and node fields W(x).
//
// Forces are gradients in the edge-stalk inner products: for U_e = psi(r)
// with r = ||y_e||_{R_e}, the force is y_e * psi'(r) / r. The Euclidean
// gradient of U is therefore M2 * force.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sheafid/sheaf.hpp"

namespace sheafid {

enum class PotentialKind {
  quadratic,
  shifted_quadratic,
  bounded_confidence,
  antagonistic,
  monomial,
  harmonic_augmented,
};

std::string to_string(PotentialKind kind);
std::optional<PotentialKind> potential_kind_from_string(const std::string& name);

// Smooth bounded-confidence profile
//   psi(r) = r^2/2 - r^4/(2 eps^2) + r^6/(6 eps^4)  for r <= eps,  eps^2/6 beyond.
double bc_profile(double r, double eps);
double bc_profile_derivative(double r, double eps);

class PotentialModel {
 public:
  static PotentialModel quadratic();
  static PotentialModel shifted_quadratic(Vec target);
  static PotentialModel bounded_confidence(double epsilon);
  static PotentialModel antagonistic(std::vector<std::size_t> negative_edges);
  // theta_m multiplies psi_m(r) = r^(2m) / (2m), m = 1..p.
  static PotentialModel monomial(std::vector<double> theta);
  // Monomial terms from theta[0..p-2] plus theta[p-1] times the linear
  // potential <c_e, y_e> whose force is the constant cochain c.
  static PotentialModel harmonic_augmented(std::vector<double> theta, Vec constant_force);

  PotentialKind kind() const { return kind_; }
  const std::vector<double>& theta() const { return theta_; }
  double epsilon() const { return epsilon_; }
  const Vec& target() const { return target_; }
  const Vec& constant_force() const { return constant_force_; }
  const std::vector<std::size_t>& negative_edges() const { return negative_edges_; }

  bool is_parametric() const;
  // True when the force is linear in the parameters (design-matrix families).
  bool is_linear_in_parameters() const;
  std::size_t parameter_count() const;

  // Copy with new parameters: theta for monomial/harmonic_augmented, {eps}
  // for bounded_confidence.
  PotentialModel with_parameters(const std::vector<double>& params) const;
  std::vector<double> parameters() const;

  double value(const Sheaf& sheaf, const Vec& y) const;
  Vec force(const Sheaf& sheaf, const Vec& y) const;
  // Force on a single edge block.
  Vec edge_force(const Sheaf& sheaf, std::size_t e, const Vec& y_e) const;
  // d(edge force)/d(parameters), edge_dim x parameter_count.
  Mat edge_param_jacobian(const Sheaf& sheaf, std::size_t e, const Vec& y_e) const;

  // Checks cochain lengths against the sheaf and throws on mismatch.
  void check_compatible(const Sheaf& sheaf) const;

 private:
  PotentialKind kind_ = PotentialKind::quadratic;
  std::vector<double> theta_;
  double epsilon_ = 1.0;
  Vec target_;
  Vec constant_force_;
  std::vector<std::size_t> negative_edges_;
};

// Separable node potential W(x) = sum_v W_v(x_v) with gradient Psi.
class NodeField {
 public:
  // Called with (vertex id, x_v); the gradient is taken in the vertex Gram metric.
  using ValueFn = std::function<double(std::size_t, const Vec&)>;
  using GradientFn = std::function<Vec(std::size_t, const Vec&)>;

  static NodeField zero();
  // Per-vertex value and gradient callables, applied block by block.
  static NodeField custom(ValueFn value, GradientFn gradient);
  // W_v(x_v) = weight/2 * ||x_v - anchor_v||^2 in the vertex Gram metric.
  static NodeField quadratic_anchor(double weight, Vec anchor);

  bool is_zero() const { return zero_; }
  double value(const Sheaf& sheaf, const Vec& x) const;
  Vec gradient(const Sheaf& sheaf, const Vec& x) const;

 private:
  bool zero_ = true;
  ValueFn value_;
  GradientFn gradient_;
  double anchor_weight_ = 0.0;
  Vec anchor_;
  bool anchored_ = false;
};

}  // namespace sheafid
