#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sheafid/error.hpp"
#include "sheafid/potentials.hpp"
#include "sheafid/sheaf.hpp"

namespace sheafid {

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> derivs;  // exact right-hand side at each recorded (clean) state; may be empty

  std::size_t size() const { return times.size(); }
  bool has_derivs() const { return !derivs.empty() && derivs.size() == states.size(); }
  std::size_t dim() const { return states.empty() ? 0 : static_cast<std::size_t>(states.front().size()); }
};

struct SimConfig {
  double alpha = 1.0;
  double step = 0.01;
  double horizon = 10.0;
  std::uint64_t seed = 0;
  double noise_std = 0.0;  // i.i.d. Gaussian noise on recorded states only

  void validate() const;
  std::size_t step_count() const;
};

class DivergenceError : public Error {
 public:
  DivergenceError(double time, Trajectory partial);
  double time() const noexcept { return time_; }
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  double time_;
  Trajectory partial_;
};

// delta* Phi(delta x)
Vec laplacian_apply(const Coboundary& op, const PotentialModel& model, const Vec& x);

// Right-hand side -alpha L(x) - Psi(x).
Vec sheaf_vector_field(const Coboundary& op, const PotentialModel& model,
                       const NodeField& node_field, double alpha, const Vec& x);

// Fixed-step classical RK4. Throws DivergenceError on a non-finite state.
Trajectory integrate(const Coboundary& op, const PotentialModel& model, const NodeField& node_field,
                     const Vec& x0, const SimConfig& cfg);

struct EnsembleMember {
  Trajectory trajectory;            // partial when diverged
  std::uint64_t seed = 0;
  std::optional<double> diverged_at;
};

// Per-member seed derived from cfg.seed and the member index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

std::vector<EnsembleMember> simulate_ensemble(const Coboundary& op, const PotentialModel& model,
                                              const NodeField& node_field,
                                              const std::vector<Vec>& initial_conditions,
                                              const SimConfig& cfg);

// delta+ b + Proj_{H^0}(x0 - delta+ b) in the M1 inner product.
Vec equilibrium_projection(const Coboundary& op, const Vec& b, const Vec& x0,
                           double tol = kDefaultRankTol);

}  // namespace sheafid
