#pragma once

// Inverse problem: residual extraction from trajectories, design and Gram
// matrices, information numbers, and the least-squares estimators.
//
// All stacked C^0 quantities use the M1 inner product block by block, so
// Gamma = sum_i A_i^T M1 A_i and the loss is
//   (1/N) sum_k ||r_k - delta* grad U_theta(delta x_k)||^2_{M1} + lambda ||theta||^2.

#include <string>
#include <utility>
#include <vector>

#include "sheafid/dynamics.hpp"
#include "sheafid/potentials.hpp"
#include "sheafid/sheaf.hpp"

namespace sheafid {

enum class ResidualSource { exact, finite_difference };

std::string to_string(ResidualSource source);

struct ResidualSample {
  Vec x;  // node state
  Vec r;  // residual -xdot - Psi(x)
  Vec y;  // edge state delta x
};

struct ResidualDataset {
  std::vector<ResidualSample> samples;
  ResidualSource source = ResidualSource::exact;
  double noise_std = 0.0;

  std::size_t size() const { return samples.size(); }
  void append(const ResidualDataset& other);
};

ResidualDataset residuals_exact(const Coboundary& op, const Trajectory& traj, const NodeField& node_field);
ResidualDataset residuals_fd(const Coboundary& op, const Trajectory& traj, const NodeField& node_field);

// Central differences inside, second-order one-sided at both ends.
std::vector<Vec> finite_difference_derivatives(const Trajectory& traj);

// Stacked design matrix (N*d0 x p). Block i, column m is delta* of the
// edge-wise parameter derivative of the force at y_i.
Mat design_matrix(const Coboundary& op, const PotentialModel& family, const ResidualDataset& data);

struct IdentifiabilityReport {
  Mat gram;               // p x p (1 x 1 for the scalar information number)
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool identifiable = false;
};

inline constexpr double kIdentifiabilityTol = 1e-10;
// Absolute floor for the scalar information number.
inline constexpr double kInformationFloor = 1e-12;

IdentifiabilityReport gram_and_lambda_min(const Coboundary& op, const Mat& design,
                                          double tol = kIdentifiabilityTol);

// Scalar information number I_N = sum_i ||delta* d/deps Phi_eps(y_i)||^2_{M1}.
IdentifiabilityReport information_scalar(const Coboundary& op, double epsilon,
                                         const ResidualDataset& data);

struct EstimationResult {
  std::vector<double> theta;  // theta-hat, or {eps-hat}
  double objective_value = 0.0;
  IdentifiabilityReport report;
  std::size_t sample_count = 0;
  std::size_t effective_rank = 0;
  std::vector<std::pair<double, double>> grid;  // (eps, loss) coarse scan for threshold fits
  std::size_t refinement_iterations = 0;
};

// Value of the least-squares objective for parameters `params` of `model`.
double estimation_objective(const Coboundary& op, const PotentialModel& model,
                            const ResidualDataset& data, double lambda = 0.0);

// Ridge/minimum-norm least squares for families linear in theta.
EstimationResult fit_linear(const Coboundary& op, const PotentialModel& family,
                            const ResidualDataset& data, double lambda = 0.0,
                            double tol = kIdentifiabilityTol);

struct ThresholdSearch {
  double lo = 0.25;
  double hi = 4.0;
  std::size_t grid_points = 64;
  double abs_tol = 1e-10;
};

// Bounded-confidence threshold: log-spaced grid then golden-section refinement.
EstimationResult fit_threshold(const Coboundary& op, const ResidualDataset& data,
                               const ThresholdSearch& search = {});

// sum_k ||x_{k+1} - x_k + int_{t_k}^{t_{k+1}} [delta* grad U_theta + Psi] ds||^2_{M1},
// integral by the trapezoid rule on recorded samples.
double integrated_residual_objective(const Coboundary& op, const PotentialModel& model,
                                     const NodeField& node_field, const Trajectory& traj);

}  // namespace sheafid
