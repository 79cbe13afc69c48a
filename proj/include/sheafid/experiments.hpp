#pragma once

// Desk-scale reproductions of the three identification experiments on cycle
// sheaves: formation transfer under a harmonic perturbation, bounded-confidence
// threshold recovery, and finite monomial-basis recovery.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sheafid/dynamics.hpp"
#include "sheafid/potentials.hpp"
#include "sheafid/sheaf.hpp"
#include "sheafid/sysid.hpp"

namespace sheafid {

enum class ExperimentId { formation_transfer, bounded_confidence, finite_basis };
enum class SheafVariant { identity, rotated };
enum class Coverage { broad, localized, limited };
enum class ResidualMode { observed, finite_difference };
enum class BasisVariant { correct, augmented };

std::string to_string(ExperimentId v);
std::string to_string(SheafVariant v);
std::string to_string(Coverage v);
std::string to_string(ResidualMode v);
std::string to_string(BasisVariant v);
std::optional<ExperimentId> experiment_id_from_string(const std::string& s);
std::optional<SheafVariant> sheaf_variant_from_string(const std::string& s);

// Tail-map rotation angle of the rotated cycle sheaf.
inline constexpr double kRotationAngle = 0.78539816339744830962;  // pi/4

// Directed n-cycle (edge i: i -> i+1 mod n), 2-D stalks, identity Grams and
// head maps; tail maps identity or the rotation by kRotationAngle. Verifies
// dim H^1 (2 resp. 0) and throws Error(config) on mismatch.
Sheaf make_cycle_sheaf(std::size_t n, SheafVariant variant);

// Constant cochain with the same 2-vector on every edge.
Vec constant_edge_cochain(const Sheaf& sheaf, double cx, double cy);

struct ExperimentConfig {
  ExperimentId id = ExperimentId::formation_transfer;
  std::size_t cycle_length = 3;
  SheafVariant sheaf_variant = SheafVariant::identity;
  Coverage coverage = Coverage::broad;
  ResidualMode residual_mode = ResidualMode::observed;
  BasisVariant basis = BasisVariant::correct;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7};
  double step = 0.01;
  double horizon = 10.0;
  double noise_std = 0.0;  // applied only in finite_difference mode
  std::vector<double> scales = {0.4, 0.8, 1.2};
  std::size_t train_count = 8;  // per scale for broad coverage
  std::size_t holdout_count = 4;
  // Amplitude range of the one-direction (limited) initial conditions.
  double limited_lo = 0.01;
  double limited_hi = 0.03;
  // Annulus of edge radii for localized coverage. Initial edge states are
  // drawn in it and training data is kept only while every edge stays in it.
  double annulus_lo = 0.95;
  double annulus_hi = 1.05;
  std::size_t eval_stride = 10;  // subsampling of trajectory edge states for evaluation sets

  void validate() const;
};

// Defaults per experiment (sheaf variant, horizon, noise level).
ExperimentConfig default_experiment_config(ExperimentId id);

struct EvaluationSets {
  std::vector<Vec> holdout;
  std::vector<Vec> pooled;
  std::vector<Vec> grid;
};

// 21 x 21 grid on [-2, 2]^2, the same vector on every edge.
std::vector<Vec> reference_grid(const Sheaf& sheaf);

// Mean over points of sum_e ||Phi_fit,e - Phi_true,e||^2_{R_e}.
double force_mse(const Sheaf& sheaf, const PotentialModel& truth, const PotentialModel& fitted,
                 const std::vector<Vec>& points);

struct ForceMse {
  double holdout = 0.0;
  double pooled = 0.0;
  double grid = 0.0;
};

ForceMse force_mse(const Sheaf& sheaf, const PotentialModel& truth, const PotentialModel& fitted,
                   const EvaluationSets& sets);

// Root mean square over trajectories, times, and coordinates of the node-state
// difference between two laws rolled out from the same initial conditions.
double rollout_rmse(const Coboundary& op, const PotentialModel& truth, const PotentialModel& fitted,
                    const std::vector<Vec>& initial_conditions, const SimConfig& cfg);

struct FormationSeed {
  std::uint64_t seed = 0;
  double max_rollout_diff = 0.0;
  double force_mse = 0.0;
  double recovered_terminal_error = 0.0;  // ||x_recovered(T) - target||
  double perturbed_terminal_error = 0.0;
  std::vector<double> diff_series;  // max |difference| per sample time
  std::vector<double> times;
};

struct FormationResult {
  ExperimentConfig config;
  std::size_t dim_h1 = 0;
  std::vector<FormationSeed> per_seed;
};

inline constexpr double kFormationBeta = 0.6;

FormationResult run_formation_transfer(const ExperimentConfig& cfg);

struct SeedMetrics {
  std::uint64_t seed = 0;
  std::vector<double> estimate;
  double param_error = 0.0;  // |eps-hat - eps*| or relative parameter error
  double rollout_rmse = 0.0;
  double information = 0.0;  // I_N or lambda_min(Gamma)
  bool identifiable = false;
  ForceMse force;
  std::vector<std::pair<double, double>> loss_grid;
};

struct RegimeResult {
  ExperimentConfig config;
  bool deterministic = false;  // single-run row
  std::vector<SeedMetrics> per_seed;
};

inline constexpr double kTrueThreshold = 1.0;
std::vector<double> true_monomial_theta();       // (1, 0.25, 0.03)
inline constexpr double kHarmonicCoefficient = 0.5;  // harmonic term of the augmented truth

RegimeResult run_bounded_confidence(const ExperimentConfig& cfg);
RegimeResult run_finite_basis(const ExperimentConfig& cfg);

// Prefix of a trajectory during which every edge radius lies in [lo, hi]
// (at least three samples so residuals remain defined).
Trajectory confine_to_band(const Coboundary& op, const Trajectory& traj, double lo, double hi);

// Training initial conditions of a coverage regime for one seed.
std::vector<Vec> training_initial_conditions(const Coboundary& op, const ExperimentConfig& cfg,
                                             Coverage coverage, std::uint64_t seed);
std::vector<Vec> holdout_initial_conditions(const Coboundary& op, const ExperimentConfig& cfg,
                                            Coverage coverage, std::uint64_t seed);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
  double median = 0.0;
};

SummaryStats summarize(std::vector<double> values);

std::string sci(double v);

Table formation_table(const std::vector<FormationResult>& rows);
Table regime_table(const std::string& name, ExperimentId id, const std::vector<RegimeResult>& rows);
Table force_check_table(const std::string& name, const std::vector<RegimeResult>& rows);

// Standard rows of each experiment with a shared base config (seeds, cycle length,...).
std::vector<ExperimentConfig> formation_rows(const ExperimentConfig& base,
                                             const std::vector<std::size_t>& cycle_lengths);
std::vector<ExperimentConfig> bounded_confidence_rows(const ExperimentConfig& base);
std::vector<ExperimentConfig> finite_basis_rows(const ExperimentConfig& base);

std::string row_label(const ExperimentConfig& cfg);

struct ExperimentReport {
  std::vector<Table> tables;
  std::vector<Table> series;  // plot-ready data
};

ExperimentReport run_experiment(const ExperimentConfig& base,
                                const std::vector<std::size_t>& cycle_lengths = {3, 5});

}  // namespace sheafid
