#include "sheafid/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "sheafid/error.hpp"
#include "sheafid/io.hpp"
#include "sheafid/parallel.hpp"

namespace sheafid {

namespace {

// Stream tags for derive_seed so every regime draws from its own generator.
constexpr std::uint64_t kTrainStream = 1000;
constexpr std::uint64_t kHoldoutStream = 2000;
constexpr std::uint64_t kRayStream = 3000;
constexpr std::uint64_t kNoiseStream = 4000;
constexpr std::uint64_t kFormationShiftStream = 5000;
constexpr std::uint64_t kFormationStartStream = 5001;

constexpr double kGridHalfWidth = 2.0;
constexpr int kGridPoints = 21;

std::uint64_t coverage_index(Coverage c) { return static_cast<std::uint64_t>(c); }

Mat rotation(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

Vec gaussian_vector(std::mt19937_64& rng, Eigen::Index n, double sd) {
  std::normal_distribution<double> dist(0.0, sd);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

double rms_edge_radius(const Coboundary& op, const Vec& y) {
  const Sheaf& s = op.sheaf();
  const std::size_t ne = s.graph.edges.size();
  if (ne == 0) return 0.0;
  return std::sqrt(op.inner1(y, y) / static_cast<double>(ne));
}

// Unit-RMS-edge-radius direction orthogonal (in M1) to the global sections.
Vec ray_direction(const Coboundary& op, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, kRayStream));
  const Mat h0 = global_section_basis(op);
  for (int attempt = 0; attempt < 16; ++attempt) {
    Vec d = gaussian_vector(rng, static_cast<Eigen::Index>(op.d0()), 1.0);
    if (h0.cols() > 0) d -= h0 * (h0.transpose() * (op.m1() * d));
    const double rad = rms_edge_radius(op, op.apply(d));
    if (rad > 1e-8) return d / rad;
  }
  fail(ErrorKind::config, "could not draw a ray direction with nonzero edge states");
}

std::vector<Vec> draw_initial_conditions(const Coboundary& op, const ExperimentConfig& cfg,
                                         Coverage coverage, std::uint64_t seed, std::uint64_t stream,
                                         std::size_t total) {
  std::mt19937_64 rng(derive_seed(seed, stream + coverage_index(coverage)));
  if (coverage == Coverage::broad && stream == kTrainStream) total *= cfg.scales.size();
  const auto n0 = static_cast<Eigen::Index>(op.d0());
  std::vector<Vec> out;
  out.reserve(total);
  switch (coverage) {
    case Coverage::broad: {
      // Per-coordinate sd scale/2 gives RMS initial edge radius ~scale on 2-D cycles.
      for (std::size_t i = 0; i < total; ++i) {
        const double scale = cfg.scales[i % cfg.scales.size()];
        out.push_back(gaussian_vector(rng, n0, 0.5 * scale));
      }
      break;
    }
    case Coverage::localized: {
      std::uniform_real_distribution<double> radius(cfg.annulus_lo, cfg.annulus_hi);
      std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
      const Sheaf& s = op.sheaf();
      for (std::size_t i = 0; i < total; ++i) {
        Vec y(static_cast<Eigen::Index>(op.d1()));
        Eigen::Index at = 0;
        for (std::size_t e = 0; e < s.graph.edges.size(); ++e) {
          const double rho = radius(rng);
          const double phi = angle(rng);
          Vec dir(2);
          dir << std::cos(phi), std::sin(phi);
          // Unit vector in the edge Gram norm.
          dir /= std::sqrt(dir.dot(s.edge_grams[e] * dir));
          y.segment(at, 2) = rho * dir;
          at += 2;
        }
        out.push_back(delta_pseudoinverse_apply(op, y));
      }
      break;
    }
    case Coverage::limited: {
      const Vec dir = ray_direction(op, seed);
      std::uniform_real_distribution<double> amp(cfg.limited_lo, cfg.limited_hi);
      for (std::size_t i = 0; i < total; ++i) out.push_back(amp(rng) * dir);
      break;
    }
  }
  return out;
}

std::vector<Trajectory> simulate_all(const Coboundary& op, const PotentialModel& model,
                                     const std::vector<Vec>& ics, const SimConfig& sim) {
  std::vector<Trajectory> out;
  out.reserve(ics.size());
  for (std::size_t i = 0; i < ics.size(); ++i) {
    SimConfig member = sim;
    member.seed = derive_seed(sim.seed, i);
    out.push_back(integrate(op, model, NodeField::zero(), ics[i], member));
  }
  return out;
}

// Training ensemble of one regime; localized data is confined to the annulus.
std::vector<Trajectory> training_trajectories(const Coboundary& op, const ExperimentConfig& cfg, Coverage coverage,
                                              std::uint64_t seed, const PotentialModel& truth, const SimConfig& sim) {
  auto trajs = simulate_all(op, truth, training_initial_conditions(op, cfg, coverage, seed), sim);
  if (coverage == Coverage::localized) {
    for (Trajectory& t : trajs) t = confine_to_band(op, t, cfg.annulus_lo, cfg.annulus_hi);
  }
  return trajs;
}

void collect_edge_states(const Coboundary& op, const std::vector<Trajectory>& trajs, std::size_t stride,
                         std::vector<Vec>& out) {
  stride = std::max<std::size_t>(1, stride);
  for (const Trajectory& t : trajs) {
    for (std::size_t k = 0; k < t.size(); k += stride) out.push_back(op.apply(t.states[k]));
  }
}

ResidualDataset build_residuals(const Coboundary& op, const std::vector<Trajectory>& trajs,
                                ResidualMode mode, double noise_std) {
  ResidualDataset data;
  for (const Trajectory& t : trajs) {
    data.append(mode == ResidualMode::observed ? residuals_exact(op, t, NodeField::zero())
                                               : residuals_fd(op, t, NodeField::zero()));
  }
  data.noise_std = mode == ResidualMode::observed ? 0.0 : noise_std;
  return data;
}

SimConfig base_sim(const ExperimentConfig& cfg) {
  SimConfig sim;
  sim.step = cfg.step;
  sim.horizon = cfg.horizon;
  return sim;
}

std::vector<Coverage> pooled_coverages(ExperimentId id) {
  if (id == ExperimentId::bounded_confidence) return {Coverage::broad, Coverage::localized};
  return {Coverage::broad, Coverage::limited};
}

EvaluationSets build_evaluation_sets(const Coboundary& op, const ExperimentConfig& cfg,
                                     const PotentialModel& truth, std::uint64_t seed,
                                     const std::vector<Trajectory>& holdout_truth) {
  EvaluationSets sets;
  collect_edge_states(op, holdout_truth, cfg.eval_stride, sets.holdout);
  const SimConfig sim = base_sim(cfg);
  for (Coverage c : pooled_coverages(cfg.id)) {
    collect_edge_states(op, training_trajectories(op, cfg, c, seed, truth, sim), cfg.eval_stride, sets.pooled);
  }
  sets.grid = reference_grid(op.sheaf());
  return sets;
}

double relative_error(const std::vector<double>& est, const std::vector<double>& truth) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = (i < est.size() ? est[i] : 0.0) - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  return std::sqrt(num / den);
}

std::string pm(const SummaryStats& s, bool single) {
  if (single) return sci(s.mean);
  return sci(s.mean) + " +/- " + sci(s.stddev);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_string(ExperimentId v) {
  switch (v) {
    case ExperimentId::formation_transfer: return "formation_transfer";
    case ExperimentId::bounded_confidence: return "bounded_confidence";
    case ExperimentId::finite_basis: return "finite_basis";
  }
  return "unknown";
}

std::string to_string(SheafVariant v) { return v == SheafVariant::identity ? "identity" : "rotated"; }

std::string to_string(Coverage v) {
  switch (v) {
    case Coverage::broad: return "broad";
    case Coverage::localized: return "localized";
    case Coverage::limited: return "limited";
  }
  return "unknown";
}

std::string to_string(ResidualMode v) {
  return v == ResidualMode::observed ? "observed" : "finite_difference";
}

std::string to_string(BasisVariant v) { return v == BasisVariant::correct ? "correct" : "augmented"; }

std::optional<ExperimentId> experiment_id_from_string(const std::string& s) {
  for (auto id : {ExperimentId::formation_transfer, ExperimentId::bounded_confidence,
                  ExperimentId::finite_basis}) {
    if (to_string(id) == s) return id;
  }
  return std::nullopt;
}

std::optional<SheafVariant> sheaf_variant_from_string(const std::string& s) {
  if (s == "identity" || s == "A") return SheafVariant::identity;
  if (s == "rotated" || s == "B") return SheafVariant::rotated;
  return std::nullopt;
}

Sheaf make_cycle_sheaf(std::size_t n, SheafVariant variant) {
  require(n >= 3, ErrorKind::config, "cycle length must be at least 3");
  DirectedGraph g;
  g.vertex_count = n;
  std::vector<Mat> heads;
  std::vector<Mat> tails;
  const Mat tail = variant == SheafVariant::identity ? Mat::Identity(2, 2) : rotation(kRotationAngle);
  for (std::size_t i = 0; i < n; ++i) {
    g.edges.push_back(Edge{i, (i + 1) % n});
    heads.push_back(Mat::Identity(2, 2));
    tails.push_back(tail);
  }
  Sheaf s = make_uniform_sheaf(std::move(g), 2, std::move(heads), std::move(tails));
  const std::size_t expected = variant == SheafVariant::identity ? 2 : 0;
  const std::size_t got = harmonic_basis(Coboundary(s)).dim();
  require(got == expected, ErrorKind::config,
          "cycle sheaf has dim H1 = " + std::to_string(got) + ", expected " + std::to_string(expected));
  return s;
}

Vec constant_edge_cochain(const Sheaf& sheaf, double cx, double cy) {
  Vec c(static_cast<Eigen::Index>(sheaf.d1()));
  Eigen::Index at = 0;
  for (int d : sheaf.edge_dims) {
    require(d == 2, ErrorKind::structure, "constant edge cochain needs 2-D edge stalks");
    c(at) = cx;
    c(at + 1) = cy;
    at += 2;
  }
  return c;
}

void ExperimentConfig::validate() const {
  require(cycle_length >= 3, ErrorKind::config, "cycle_length must be at least 3");
  require(!seeds.empty(), ErrorKind::config, "at least one seed is required");
  require(step > 0.0 && horizon >= step, ErrorKind::config, "invalid step/horizon");
  require(noise_std >= 0.0, ErrorKind::config, "noise_std must be non-negative");
  require(!scales.empty() && train_count > 0 && holdout_count > 0, ErrorKind::config,
          "scales, train_count and holdout_count must be non-empty/positive");
  require(limited_lo > 0.0 && limited_hi >= limited_lo, ErrorKind::config, "invalid limited amplitude range");
  require(annulus_lo > 0.0 && annulus_hi >= annulus_lo, ErrorKind::config, "invalid annulus");
  switch (id) {
    case ExperimentId::formation_transfer:
      break;
    case ExperimentId::bounded_confidence:
      require(sheaf_variant == SheafVariant::rotated, ErrorKind::config,
              "bounded_confidence runs on the rotated sheaf (H1 = 0)");
      require(coverage == Coverage::broad || coverage == Coverage::localized, ErrorKind::config,
              "bounded_confidence coverage must be broad or localized");
      require(basis == BasisVariant::correct, ErrorKind::config,
              "basis variants apply to finite_basis only");
      break;
    case ExperimentId::finite_basis:
      require(sheaf_variant == SheafVariant::identity, ErrorKind::config,
              "finite_basis runs on the identity sheaf (dim H1 = 2)");
      require(coverage == Coverage::broad || coverage == Coverage::limited, ErrorKind::config,
              "finite_basis coverage must be broad or limited");
      break;
  }
}

ExperimentConfig default_experiment_config(ExperimentId id) {
  ExperimentConfig cfg;
  cfg.id = id;
  switch (id) {
    case ExperimentId::formation_transfer:
      cfg.horizon = 4.0;
      cfg.sheaf_variant = SheafVariant::identity;
      break;
    case ExperimentId::bounded_confidence:
      cfg.sheaf_variant = SheafVariant::rotated;
      cfg.noise_std = 5e-3;
      break;
    case ExperimentId::finite_basis:
      cfg.sheaf_variant = SheafVariant::identity;
      cfg.noise_std = 1e-4;
      break;
  }
  return cfg;
}

std::vector<Vec> reference_grid(const Sheaf& sheaf) {
  std::vector<Vec> out;
  out.reserve(kGridPoints * kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) {
    for (int j = 0; j < kGridPoints; ++j) {
      const double a = -kGridHalfWidth + 2.0 * kGridHalfWidth * i / (kGridPoints - 1);
      const double b = -kGridHalfWidth + 2.0 * kGridHalfWidth * j / (kGridPoints - 1);
      out.push_back(constant_edge_cochain(sheaf, a, b));
    }
  }
  return out;
}

double force_mse(const Sheaf& sheaf, const PotentialModel& truth, const PotentialModel& fitted,
                 const std::vector<Vec>& points) {
  require(!points.empty(), ErrorKind::usage, "force MSE evaluation set is empty");
  double total = 0.0;
  for (const Vec& y : points) {
    const Vec diff = fitted.force(sheaf, y) - truth.force(sheaf, y);
    Eigen::Index at = 0;
    for (std::size_t e = 0; e < sheaf.graph.edges.size(); ++e) {
      const Eigen::Index d = sheaf.edge_dims[e];
      const Vec de = diff.segment(at, d);
      total += de.dot(sheaf.edge_grams[e] * de);
      at += d;
    }
  }
  return total / static_cast<double>(points.size());
}

ForceMse force_mse(const Sheaf& sheaf, const PotentialModel& truth, const PotentialModel& fitted,
                   const EvaluationSets& sets) {
  return {force_mse(sheaf, truth, fitted, sets.holdout), force_mse(sheaf, truth, fitted, sets.pooled),
          force_mse(sheaf, truth, fitted, sets.grid)};
}

double rollout_rmse(const Coboundary& op, const PotentialModel& truth, const PotentialModel& fitted,
                    const std::vector<Vec>& initial_conditions, const SimConfig& cfg) {
  SimConfig clean = cfg;
  clean.noise_std = 0.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (const Vec& x0 : initial_conditions) {
    const Trajectory a = integrate(op, truth, NodeField::zero(), x0, clean);
    Trajectory b;
    try {
      b = integrate(op, fitted, NodeField::zero(), x0, clean);
    } catch (const DivergenceError&) {
      return std::numeric_limits<double>::infinity();
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      sum += (a.states[k] - b.states[k]).squaredNorm();
      count += static_cast<std::size_t>(a.states[k].size());
    }
  }
  return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

Trajectory confine_to_band(const Coboundary& op, const Trajectory& traj, double lo, double hi) {
  const Sheaf& s = op.sheaf();
  std::size_t keep = 0;
  for (; keep < traj.size(); ++keep) {
    const Vec y = op.apply(traj.states[keep]);
    bool inside = true;
    Eigen::Index at = 0;
    for (std::size_t e = 0; e < s.graph.edges.size() && inside; ++e) {
      const Eigen::Index d = s.edge_dims[e];
      const Vec ye = y.segment(at, d);
      const double r = std::sqrt(ye.dot(s.edge_grams[e] * ye));
      inside = r >= lo && r <= hi;
      at += d;
    }
    if (!inside) break;
  }
  keep = std::min(traj.size(), std::max<std::size_t>(keep, 3));
  Trajectory out;
  out.times.assign(traj.times.begin(), traj.times.begin() + static_cast<std::ptrdiff_t>(keep));
  out.states.assign(traj.states.begin(), traj.states.begin() + static_cast<std::ptrdiff_t>(keep));
  if (traj.has_derivs()) out.derivs.assign(traj.derivs.begin(), traj.derivs.begin() + static_cast<std::ptrdiff_t>(keep));
  return out;
}

std::vector<double> true_monomial_theta() { return {1.0, 0.25, 0.03}; }

std::vector<Vec> training_initial_conditions(const Coboundary& op, const ExperimentConfig& cfg,
                                             Coverage coverage, std::uint64_t seed) {
  return draw_initial_conditions(op, cfg, coverage, seed, kTrainStream, cfg.train_count);
}

std::vector<Vec> holdout_initial_conditions(const Coboundary& op, const ExperimentConfig& cfg,
                                            Coverage coverage, std::uint64_t seed) {
  return draw_initial_conditions(op, cfg, coverage, seed, kHoldoutStream, cfg.holdout_count);
}

FormationResult run_formation_transfer(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.id == ExperimentId::formation_transfer, ErrorKind::config,
          "run_formation_transfer needs experiment_id formation_transfer");
  const Coboundary op(make_cycle_sheaf(cfg.cycle_length, cfg.sheaf_variant));
  const Sheaf& sheaf = op.sheaf();
  const Vec c = constant_edge_cochain(sheaf, 1.0, 0.0);
  const std::vector<Vec> grid = reference_grid(sheaf);

  FormationResult result;
  result.config = cfg;
  result.dim_h1 = harmonic_basis(op).dim();
  result.per_seed.resize(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    std::mt19937_64 shift_rng(derive_seed(seed, kFormationShiftStream));
    std::mt19937_64 start_rng(derive_seed(seed, kFormationStartStream));
    const Vec b = gaussian_vector(shift_rng, static_cast<Eigen::Index>(op.d1()), 1.0);
    const Vec x0 = gaussian_vector(start_rng, static_cast<Eigen::Index>(op.d0()), 1.0);
    SimConfig sim = base_sim(cfg);

    const PotentialModel truth = PotentialModel::shifted_quadratic(b);
    const Trajectory reference = integrate(op, truth, NodeField::zero(), x0, sim);
    const Vec target = reference.states.back();

    // Recovered law y - b and the rollout-only alternative y - b + beta c.
    const PotentialModel recovered = PotentialModel::shifted_quadratic(b);
    const PotentialModel perturbed = PotentialModel::shifted_quadratic(b - kFormationBeta * c);
    const Trajectory ra = integrate(op, recovered, NodeField::zero(), x0, sim);
    const Trajectory rb = integrate(op, perturbed, NodeField::zero(), x0, sim);

    FormationSeed out;
    out.seed = seed;
    for (std::size_t k = 0; k < ra.size(); ++k) {
      const double d = (ra.states[k] - rb.states[k]).cwiseAbs().maxCoeff();
      out.max_rollout_diff = std::max(out.max_rollout_diff, d);
      out.diff_series.push_back(d);
      out.times.push_back(ra.times[k]);
    }
    out.force_mse = force_mse(sheaf, recovered, perturbed, grid);
    out.recovered_terminal_error = std::sqrt(op.norm0_sq(ra.states.back() - target));
    out.perturbed_terminal_error = std::sqrt(op.norm0_sq(rb.states.back() - target));
    result.per_seed[i] = std::move(out);
  });
  return result;
}

RegimeResult run_bounded_confidence(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.id == ExperimentId::bounded_confidence, ErrorKind::config,
          "run_bounded_confidence needs experiment_id bounded_confidence");
  const Coboundary op(make_cycle_sheaf(cfg.cycle_length, cfg.sheaf_variant));
  const PotentialModel truth = PotentialModel::bounded_confidence(kTrueThreshold);

  RegimeResult result;
  result.config = cfg;
  result.per_seed.resize(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    SimConfig sim = base_sim(cfg);
    sim.seed = derive_seed(seed, kNoiseStream);
    if (cfg.residual_mode == ResidualMode::finite_difference) sim.noise_std = cfg.noise_std;

    const auto train = training_trajectories(op, cfg, cfg.coverage, seed, truth, sim);
    const ResidualDataset data = build_residuals(op, train, cfg.residual_mode, cfg.noise_std);

    const EstimationResult fit = fit_threshold(op, data);
    const PotentialModel fitted = PotentialModel::bounded_confidence(fit.theta[0]);

    const auto holdout_ics = holdout_initial_conditions(op, cfg, cfg.coverage, seed);
    const SimConfig clean = base_sim(cfg);
    const auto holdout = simulate_all(op, truth, holdout_ics, clean);

    SeedMetrics m;
    m.seed = seed;
    m.estimate = fit.theta;
    m.param_error = std::abs(fit.theta[0] - kTrueThreshold);
    m.information = fit.report.lambda_min;
    m.identifiable = fit.report.identifiable;
    m.rollout_rmse = rollout_rmse(op, truth, fitted, holdout_ics, clean);
    m.force = force_mse(op.sheaf(), truth, fitted, build_evaluation_sets(op, cfg, truth, seed, holdout));
    m.loss_grid = fit.grid;
    result.per_seed[i] = std::move(m);
  });
  return result;
}

RegimeResult run_finite_basis(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.id == ExperimentId::finite_basis, ErrorKind::config,
          "run_finite_basis needs experiment_id finite_basis");
  const Coboundary op(make_cycle_sheaf(cfg.cycle_length, cfg.sheaf_variant));
  const Vec c = constant_edge_cochain(op.sheaf(), 1.0, 0.0);

  std::vector<double> theta_true = true_monomial_theta();
  PotentialModel truth = PotentialModel::monomial(theta_true);
  if (cfg.basis == BasisVariant::augmented) {
    theta_true.push_back(kHarmonicCoefficient);
    truth = PotentialModel::harmonic_augmented(theta_true, c);
  }

  RegimeResult result;
  result.config = cfg;
  // The augmented row is reported from a single run.
  result.deterministic = cfg.basis == BasisVariant::augmented;
  const std::vector<std::uint64_t> seeds =
      result.deterministic ? std::vector<std::uint64_t>{cfg.seeds.front()} : cfg.seeds;
  result.per_seed.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    const std::uint64_t seed = seeds[i];
    SimConfig sim = base_sim(cfg);
    sim.seed = derive_seed(seed, kNoiseStream);
    if (cfg.residual_mode == ResidualMode::finite_difference) sim.noise_std = cfg.noise_std;

    const auto train = training_trajectories(op, cfg, cfg.coverage, seed, truth, sim);
    const ResidualDataset data = build_residuals(op, train, cfg.residual_mode, cfg.noise_std);

    const EstimationResult fit = fit_linear(op, truth, data);
    const PotentialModel fitted = truth.with_parameters(fit.theta);

    const auto holdout_ics = holdout_initial_conditions(op, cfg, cfg.coverage, seed);
    const SimConfig clean = base_sim(cfg);
    const auto holdout = simulate_all(op, truth, holdout_ics, clean);

    SeedMetrics m;
    m.seed = seed;
    m.estimate = fit.theta;
    m.param_error = relative_error(fit.theta, theta_true);
    m.information = fit.report.lambda_min;
    m.identifiable = fit.report.identifiable;
    m.rollout_rmse = rollout_rmse(op, truth, fitted, holdout_ics, clean);
    m.force = force_mse(op.sheaf(), truth, fitted, build_evaluation_sets(op, cfg, truth, seed, holdout));
    result.per_seed[i] = std::move(m);
  });
  return result;
}

SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return s;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string Table::to_csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_escape(columns[i]);
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(row[i]);
    os << "\n";
  }
  return os.str();
}

std::string Table::to_text() const {
  std::vector<std::size_t> width(columns.size(), 0);
  for (std::size_t i = 0; i < columns.size(); ++i) width[i] = columns[i].size();
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream os;
  os << name << "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      os << (i ? "  " : "") << cells[i] << std::string(width[i] - cells[i].size(), ' ');
    }
    os << "\n";
  };
  line(columns);
  std::size_t total = 0;
  for (std::size_t w : width) total += w + 2;
  os << std::string(total > 2 ? total - 2 : 0, '-') << "\n";
  for (const auto& row : rows) line(row);
  return os.str();
}

std::string row_label(const ExperimentConfig& cfg) {
  const std::string mode = cfg.residual_mode == ResidualMode::observed ? "Obs." : "FD";
  switch (cfg.id) {
    case ExperimentId::formation_transfer:
      return std::to_string(cfg.cycle_length) + "-cycle, Sheaf " +
             (cfg.sheaf_variant == SheafVariant::identity ? "A" : "B");
    case ExperimentId::bounded_confidence:
      return std::string(cfg.coverage == Coverage::broad ? "Broad" : "Localized") + " / " + mode;
    case ExperimentId::finite_basis:
      if (cfg.basis == BasisVariant::augmented) return "Augmented / " + mode;
      return std::string("Correct / ") + (cfg.coverage == Coverage::broad ? "Broad" : "Limited") + " / " + mode;
  }
  return "";
}

Table formation_table(const std::vector<FormationResult>& rows) {
  Table t;
  t.name = "table1_formation_transfer";
  t.columns = {"sheaf", "dim_h1", "max_rollout_diff", "force_mse", "recovered_terminal_error",
               "perturbed_terminal_error", "seeds"};
  for (const FormationResult& r : rows) {
    std::vector<double> diff, mse, rec, pert;
    for (const auto& s : r.per_seed) {
      diff.push_back(s.max_rollout_diff);
      mse.push_back(s.force_mse);
      rec.push_back(s.recovered_terminal_error);
      pert.push_back(s.perturbed_terminal_error);
    }
    t.rows.push_back({row_label(r.config), std::to_string(r.dim_h1), sci(summarize(diff).mean),
                      sci(summarize(mse).mean), sci(summarize(rec).mean), sci(summarize(pert).mean),
                      std::to_string(r.per_seed.size())});
  }
  return t;
}

Table regime_table(const std::string& name, ExperimentId id, const std::vector<RegimeResult>& rows) {
  Table t;
  t.name = name;
  const bool bc = id == ExperimentId::bounded_confidence;
  t.columns = {"setting",
               bc ? "abs_threshold_error" : "rel_param_error",
               "rollout_rmse",
               bc ? "information_number" : "lambda_min_gamma",
               bc ? "abs_threshold_error_mean" : "rel_param_error_mean",
               bc ? "abs_threshold_error_std" : "rel_param_error_std",
               "rollout_rmse_mean",
               "rollout_rmse_std",
               bc ? "information_mean" : "lambda_min_mean",
               bc ? "information_std" : "lambda_min_std",
               "identifiable_runs",
               "runs"};
  for (const RegimeResult& r : rows) {
    std::vector<double> err, rmse, info;
    std::size_t ident = 0;
    for (const auto& s : r.per_seed) {
      err.push_back(s.param_error);
      rmse.push_back(s.rollout_rmse);
      info.push_back(s.information);
      ident += s.identifiable ? 1 : 0;
    }
    const SummaryStats e = summarize(err), q = summarize(rmse), f = summarize(info);
    const bool single = r.per_seed.size() == 1;
    t.rows.push_back({row_label(r.config), pm(e, single), pm(q, single), pm(f, single),
                      format_double(e.mean), format_double(e.stddev), format_double(q.mean),
                      format_double(q.stddev), format_double(f.mean), format_double(f.stddev),
                      std::to_string(ident), std::to_string(r.per_seed.size())});
  }
  return t;
}

Table force_check_table(const std::string& name, const std::vector<RegimeResult>& rows) {
  Table t;
  t.name = name;
  t.columns = {"setting", "holdout_median", "pooled_median", "grid_median"};
  for (const RegimeResult& r : rows) {
    std::vector<double> h, p, g;
    for (const auto& s : r.per_seed) {
      h.push_back(s.force.holdout);
      p.push_back(s.force.pooled);
      g.push_back(s.force.grid);
    }
    t.rows.push_back({row_label(r.config), sci(summarize(h).median), sci(summarize(p).median),
                      sci(summarize(g).median)});
  }
  return t;
}

std::vector<ExperimentConfig> formation_rows(const ExperimentConfig& base,
                                             const std::vector<std::size_t>& cycle_lengths) {
  std::vector<ExperimentConfig> out;
  for (std::size_t n : cycle_lengths) {
    for (SheafVariant v : {SheafVariant::identity, SheafVariant::rotated}) {
      ExperimentConfig c = base;
      c.id = ExperimentId::formation_transfer;
      c.cycle_length = n;
      c.sheaf_variant = v;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<ExperimentConfig> bounded_confidence_rows(const ExperimentConfig& base) {
  std::vector<ExperimentConfig> out;
  for (ResidualMode mode : {ResidualMode::observed, ResidualMode::finite_difference}) {
    for (Coverage cov : {Coverage::broad, Coverage::localized}) {
      ExperimentConfig c = base;
      c.id = ExperimentId::bounded_confidence;
      c.sheaf_variant = SheafVariant::rotated;
      c.coverage = cov;
      c.residual_mode = mode;
      c.basis = BasisVariant::correct;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<ExperimentConfig> finite_basis_rows(const ExperimentConfig& base) {
  struct Row {
    BasisVariant basis;
    Coverage coverage;
    ResidualMode mode;
  };
  const Row layout[] = {
      {BasisVariant::correct, Coverage::broad, ResidualMode::observed},
      {BasisVariant::augmented, Coverage::broad, ResidualMode::observed},
      {BasisVariant::correct, Coverage::limited, ResidualMode::observed},
      {BasisVariant::correct, Coverage::broad, ResidualMode::finite_difference},
      {BasisVariant::correct, Coverage::limited, ResidualMode::finite_difference},
  };
  std::vector<ExperimentConfig> out;
  for (const Row& r : layout) {
    ExperimentConfig c = base;
    c.id = ExperimentId::finite_basis;
    c.sheaf_variant = SheafVariant::identity;
    c.basis = r.basis;
    c.coverage = r.coverage;
    c.residual_mode = r.mode;
    out.push_back(c);
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& base, const std::vector<std::size_t>& cycle_lengths) {
  ExperimentReport report;
  switch (base.id) {
    case ExperimentId::formation_transfer: {
      std::vector<FormationResult> results;
      for (const auto& c : formation_rows(base, cycle_lengths)) results.push_back(run_formation_transfer(c));
      report.tables.push_back(formation_table(results));
      Table series;
      series.name = "series_formation_rollout_diff";
      series.columns = {"setting", "seed", "t", "max_abs_diff"};
      for (const auto& r : results) {
        const auto& s = r.per_seed.front();
        for (std::size_t k = 0; k < s.times.size(); k += 10) {
          series.rows.push_back({row_label(r.config), std::to_string(s.seed), format_double(s.times[k]),
                                 format_double(s.diff_series[k])});
        }
      }
      report.series.push_back(series);
      break;
    }
    case ExperimentId::bounded_confidence: {
      std::vector<RegimeResult> results;
      for (const auto& c : bounded_confidence_rows(base)) results.push_back(run_bounded_confidence(c));
      report.tables.push_back(regime_table("table2_bounded_confidence", base.id, results));
      report.tables.push_back(force_check_table("table4_force_checks_bounded_confidence", results));
      Table series;
      series.name = "series_threshold_loss";
      series.columns = {"setting", "seed", "epsilon", "loss"};
      for (const auto& r : results) {
        const auto& s = r.per_seed.front();
        for (const auto& [eps, loss] : s.loss_grid) {
          series.rows.push_back(
              {row_label(r.config), std::to_string(s.seed), format_double(eps), format_double(loss)});
        }
      }
      report.series.push_back(series);
      break;
    }
    case ExperimentId::finite_basis: {
      std::vector<RegimeResult> results;
      for (const auto& c : finite_basis_rows(base)) results.push_back(run_finite_basis(c));
      report.tables.push_back(regime_table("table3_finite_basis", base.id, results));
      report.tables.push_back(force_check_table("table4_force_checks_finite_basis", results));
      Table series;
      series.name = "series_radial_force_gain";
      series.columns = {"setting", "seed", "r", "true_gain", "fitted_gain"};
      const std::vector<double> truth = true_monomial_theta();
      for (const auto& r : results) {
        const auto& s = r.per_seed.front();
        for (int k = 0; k <= 40; ++k) {
          const double rr = 0.05 * k;
          auto gain = [&](const std::vector<double>& th) {
            return th[0] + th[1] * rr * rr + th[2] * rr * rr * rr * rr;
          };
          series.rows.push_back({row_label(r.config), std::to_string(s.seed), format_double(rr),
                                 format_double(gain(truth)), format_double(gain(s.estimate))});
        }
      }
      report.series.push_back(series);
      break;
    }
  }
  return report;
}

}  // namespace sheafid
