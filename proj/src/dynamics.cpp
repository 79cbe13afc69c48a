#include "sheafid/dynamics.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "sheafid/parallel.hpp"

namespace sheafid {

namespace {

// Squared norms overflow past this magnitude, so it counts as divergence.
constexpr double kBlowupBound = 1e150;

bool bounded(const Vec& x) {
  return x.allFinite() && (x.size() == 0 || x.cwiseAbs().maxCoeff() <= kBlowupBound);
}

std::string divergence_message(double t) {
  std::ostringstream os;
  os << "integration diverged (non-finite or unbounded state) at t = " << t;
  return os.str();
}

void add_observation_noise(Trajectory& traj, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (Vec& x : traj.states) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += noise(rng);
  }
}

}  // namespace

void SimConfig::validate() const {
  require(std::isfinite(step) && step > 0.0, ErrorKind::config, "simulation step must be positive");
  require(std::isfinite(horizon) && horizon >= step, ErrorKind::config,
          "simulation horizon must be at least one step");
  require(std::isfinite(alpha) && alpha > 0.0, ErrorKind::config, "diffusivity alpha must be positive");
  require(std::isfinite(noise_std) && noise_std >= 0.0, ErrorKind::config,
          "noise_std must be non-negative");
}

std::size_t SimConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(horizon / step));
}

DivergenceError::DivergenceError(double time, Trajectory partial)
    : Error(ErrorKind::divergence, divergence_message(time)), time_(time), partial_(std::move(partial)) {}

Vec laplacian_apply(const Coboundary& op, const PotentialModel& model, const Vec& x) {
  const Vec y = op.apply(x);
  return op.apply_adjoint(model.force(op.sheaf(), y));
}

Vec sheaf_vector_field(const Coboundary& op, const PotentialModel& model,
                       const NodeField& node_field, double alpha, const Vec& x) {
  Vec f = -alpha * laplacian_apply(op, model, x);
  if (!node_field.is_zero()) f -= node_field.gradient(op.sheaf(), x);
  return f;
}

Trajectory integrate(const Coboundary& op, const PotentialModel& model, const NodeField& node_field,
                     const Vec& x0, const SimConfig& cfg) {
  cfg.validate();
  require(static_cast<std::size_t>(x0.size()) == op.d0(), ErrorKind::structure,
          "initial condition length does not match C^0");
  model.check_compatible(op.sheaf());

  const double h = cfg.step;
  const std::size_t steps = cfg.step_count();
  auto rhs = [&](const Vec& x) { return sheaf_vector_field(op, model, node_field, cfg.alpha, x); };

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.derivs.reserve(steps + 1);

  Vec x = x0;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * h;
    Vec k1 = rhs(x);
    if (!bounded(x) || !k1.allFinite()) throw DivergenceError(t, std::move(traj));
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.derivs.push_back(k1);
    if (k == steps) break;

    const Vec k2 = rhs(x + 0.5 * h * k1);
    const Vec k3 = rhs(x + 0.5 * h * k2);
    const Vec k4 = rhs(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  add_observation_noise(traj, cfg.noise_std, cfg.seed);
  return traj;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over base + golden-ratio stride
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<EnsembleMember> simulate_ensemble(const Coboundary& op, const PotentialModel& model,
                                              const NodeField& node_field,
                                              const std::vector<Vec>& initial_conditions,
                                              const SimConfig& cfg) {
  cfg.validate();
  std::vector<EnsembleMember> out(initial_conditions.size());
  parallel_for(initial_conditions.size(), [&](std::size_t i) {
    SimConfig member = cfg;
    member.seed = derive_seed(cfg.seed, i);
    out[i].seed = member.seed;
    try {
      out[i].trajectory = integrate(op, model, node_field, initial_conditions[i], member);
    } catch (const DivergenceError& err) {
      out[i].trajectory = err.partial();
      out[i].diverged_at = err.time();
    }
  });
  return out;
}

Vec equilibrium_projection(const Coboundary& op, const Vec& b, const Vec& x0, double tol) {
  require(static_cast<std::size_t>(x0.size()) == op.d0(), ErrorKind::structure,
          "initial condition length does not match C^0");
  const Vec base = delta_pseudoinverse_apply(op, b, tol);
  const Mat h0 = global_section_basis(op, tol);
  Vec out = base;
  if (h0.cols() > 0) {
    const Vec diff = x0 - base;
    out += h0 * (h0.transpose() * (op.m1() * diff));
  }
  return out;
}

}  // namespace sheafid
