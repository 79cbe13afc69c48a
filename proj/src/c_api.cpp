#include "sheafid/sheafid.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "sheafid/commands.hpp"
#include "sheafid/dynamics.hpp"
#include "sheafid/error.hpp"
#include "sheafid/io.hpp"
#include "sheafid/experiments.hpp"
#include "sheafid/potentials.hpp"
#include "sheafid/sheaf.hpp"
#include "sheafid/sysid.hpp"

struct sheafid_sheaf {
  sheafid::Coboundary op;
};

struct sheafid_potential {
  sheafid::PotentialModel model;
};

struct sheafid_trajectory {
  sheafid::Trajectory traj;
};

struct sheafid_estimate {
  sheafid::EstimationResult result;
};

namespace {

thread_local std::string g_last_error;

sheafid_status status_of(sheafid::ErrorKind k) {
  switch (k) {
    case sheafid::ErrorKind::structure: return SHEAFID_ERR_STRUCTURE;
    case sheafid::ErrorKind::parameter: return SHEAFID_ERR_PARAMETER;
    case sheafid::ErrorKind::usage: return SHEAFID_ERR_USAGE;
    case sheafid::ErrorKind::divergence: return SHEAFID_ERR_DIVERGENCE;
    case sheafid::ErrorKind::config: return SHEAFID_ERR_CONFIG;
    case sheafid::ErrorKind::io: return SHEAFID_ERR_IO;
  }
  return SHEAFID_ERR_INTERNAL;
}

sheafid_status set_error(sheafid_status s, const char* msg) {
  g_last_error = msg;
  return s;
}

template <typename F>
sheafid_status guarded(F&& body) {
  try {
    body();
    return SHEAFID_OK;
  } catch (const sheafid::Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SHEAFID_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SHEAFID_ERR_INTERNAL, e.what());
  }
}

void need(bool ok, const char* what) { sheafid::require(ok, sheafid::ErrorKind::usage, what); }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

sheafid::Vec to_vec(const double* p, size_t n) {
  need(p != nullptr || n == 0, "null vector pointer");
  return n == 0 ? sheafid::Vec() : sheafid::Vec(Eigen::Map<const sheafid::Vec>(p, static_cast<Eigen::Index>(n)));
}

void copy_out(const sheafid::Vec& v, double* out, size_t n) {
  sheafid::require(static_cast<size_t>(v.size()) == n, sheafid::ErrorKind::structure,
                   "output length " + std::to_string(n) + " does not match " + std::to_string(v.size()));
  need(out != nullptr || n == 0, "null output pointer");
  std::copy(v.data(), v.data() + v.size(), out);
}

sheafid_status make_potential(sheafid::PotentialModel m, sheafid_potential** out) {
  return guarded([&] {
    need(out != nullptr, "null output handle");
    *out = new sheafid_potential{std::move(m)};
  });
}

}  // namespace

extern "C" {

const char* sheafid_version(void) { return "0.1.0"; }

const char* sheafid_last_error(void) { return g_last_error.c_str(); }

void sheafid_string_free(char* s) { std::free(s); }

sheafid_status sheafid_sheaf_cycle(size_t n, int rotated, sheafid_sheaf** out) {
  return guarded([&] {
    need(out != nullptr, "null output handle");
    auto variant = rotated ? sheafid::SheafVariant::rotated : sheafid::SheafVariant::identity;
    *out = new sheafid_sheaf{sheafid::Coboundary(sheafid::make_cycle_sheaf(n, variant))};
  });
}

sheafid_status sheafid_sheaf_from_json(const char* text, sheafid_sheaf** out) {
  return guarded([&] {
    need(text != nullptr && out != nullptr, "null argument");
    *out = new sheafid_sheaf{sheafid::Coboundary(sheafid::parse_sheaf(text))};
  });
}

sheafid_status sheafid_sheaf_to_json(const sheafid_sheaf* sheaf, char** out) {
  return guarded([&] {
    need(sheaf != nullptr && out != nullptr, "null argument");
    *out = dup_string(sheafid::serialize_sheaf(sheaf->op.sheaf()));
  });
}

void sheafid_sheaf_free(sheafid_sheaf* sheaf) { delete sheaf; }

sheafid_status sheafid_sheaf_dims(const sheafid_sheaf* sheaf, size_t* dim_c0, size_t* dim_c1) {
  return guarded([&] {
    need(sheaf != nullptr, "null sheaf");
    if (dim_c0) *dim_c0 = sheaf->op.d0();
    if (dim_c1) *dim_c1 = sheaf->op.d1();
  });
}

sheafid_status sheafid_sheaf_cohomology(const sheafid_sheaf* sheaf, size_t* dim_h0, size_t* dim_h1) {
  return guarded([&] {
    need(sheaf != nullptr, "null sheaf");
    const auto s = sheafid::laplacian_spectrum(sheaf->op);
    if (dim_h0) *dim_h0 = s.dim_h0;
    if (dim_h1) *dim_h1 = s.dim_h1;
  });
}

sheafid_status sheafid_sheaf_spectrum(const sheafid_sheaf* sheaf, double* lambda_min_nonzero, double* lambda_max) {
  return guarded([&] {
    need(sheaf != nullptr, "null sheaf");
    const auto s = sheafid::laplacian_spectrum(sheaf->op);
    if (lambda_min_nonzero) *lambda_min_nonzero = s.lambda_min_nonzero;
    if (lambda_max) *lambda_max = s.lambda_max;
  });
}

sheafid_status sheafid_coboundary_apply(const sheafid_sheaf* sheaf, const double* x, size_t nx, double* y,
                                        size_t ny) {
  return guarded([&] {
    need(sheaf != nullptr, "null sheaf");
    copy_out(sheaf->op.apply(to_vec(x, nx)), y, ny);
  });
}

sheafid_status sheafid_adjoint_apply(const sheafid_sheaf* sheaf, const double* y, size_t ny, double* x,
                                     size_t nx) {
  return guarded([&] {
    need(sheaf != nullptr, "null sheaf");
    copy_out(sheaf->op.apply_adjoint(to_vec(y, ny)), x, nx);
  });
}

sheafid_status sheafid_harmonic_basis(const sheafid_sheaf* sheaf, double* out, size_t cap, size_t* dim_h1) {
  return guarded([&] {
    need(sheaf != nullptr, "null sheaf");
    const auto h = sheafid::harmonic_basis(sheaf->op);
    if (dim_h1) *dim_h1 = h.dim();
    if (cap == 0) return;
    const size_t total = static_cast<size_t>(h.basis.size());
    need(out != nullptr && cap >= total, "harmonic basis buffer too small");
    std::copy(h.basis.data(), h.basis.data() + total, out);
  });
}

sheafid_status sheafid_potential_quadratic(sheafid_potential** out) {
  return make_potential(sheafid::PotentialModel::quadratic(), out);
}

sheafid_status sheafid_potential_shifted_quadratic(const double* b, size_t n, sheafid_potential** out) {
  return guarded([&] {
    need(out != nullptr, "null output handle");
    *out = new sheafid_potential{sheafid::PotentialModel::shifted_quadratic(to_vec(b, n))};
  });
}

sheafid_status sheafid_potential_bounded_confidence(double epsilon, sheafid_potential** out) {
  return guarded([&] {
    need(out != nullptr, "null output handle");
    *out = new sheafid_potential{sheafid::PotentialModel::bounded_confidence(epsilon)};
  });
}

sheafid_status sheafid_potential_antagonistic(const size_t* negative_edges, size_t k, sheafid_potential** out) {
  return guarded([&] {
    need(out != nullptr && (negative_edges != nullptr || k == 0), "null argument");
    std::vector<std::size_t> edges(negative_edges, negative_edges + k);
    *out = new sheafid_potential{sheafid::PotentialModel::antagonistic(std::move(edges))};
  });
}

sheafid_status sheafid_potential_monomial(const double* theta, size_t p, sheafid_potential** out) {
  return guarded([&] {
    need(out != nullptr && (theta != nullptr || p == 0), "null argument");
    *out = new sheafid_potential{sheafid::PotentialModel::monomial(std::vector<double>(theta, theta + p))};
  });
}

sheafid_status sheafid_potential_harmonic_augmented(const double* theta, size_t p, const double* c, size_t n,
                                                    sheafid_potential** out) {
  return guarded([&] {
    need(out != nullptr && (theta != nullptr || p == 0), "null argument");
    *out = new sheafid_potential{
        sheafid::PotentialModel::harmonic_augmented(std::vector<double>(theta, theta + p), to_vec(c, n))};
  });
}

void sheafid_potential_free(sheafid_potential* potential) { delete potential; }

sheafid_status sheafid_potential_value(const sheafid_potential* potential, const sheafid_sheaf* sheaf,
                                       const double* y, size_t n, double* value) {
  return guarded([&] {
    need(potential != nullptr && sheaf != nullptr && value != nullptr, "null argument");
    *value = potential->model.value(sheaf->op.sheaf(), to_vec(y, n));
  });
}

sheafid_status sheafid_potential_force(const sheafid_potential* potential, const sheafid_sheaf* sheaf,
                                       const double* y, size_t n, double* force, size_t nf) {
  return guarded([&] {
    need(potential != nullptr && sheaf != nullptr, "null argument");
    copy_out(potential->model.force(sheaf->op.sheaf(), to_vec(y, n)), force, nf);
  });
}

void sheafid_sim_config_default(sheafid_sim_config* cfg) {
  if (!cfg) return;
  const sheafid::SimConfig d;
  cfg->alpha = d.alpha;
  cfg->step = d.step;
  cfg->horizon = d.horizon;
  cfg->seed = d.seed;
  cfg->noise_std = d.noise_std;
}

sheafid_status sheafid_simulate(const sheafid_sheaf* sheaf, const sheafid_potential* potential, const double* x0,
                                size_t n, const sheafid_sim_config* cfg, sheafid_trajectory** out) {
  return guarded([&] {
    need(sheaf != nullptr && potential != nullptr && cfg != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    sheafid::SimConfig sim;
    sim.alpha = cfg->alpha;
    sim.step = cfg->step;
    sim.horizon = cfg->horizon;
    sim.seed = cfg->seed;
    sim.noise_std = cfg->noise_std;
    try {
      *out = new sheafid_trajectory{
          sheafid::integrate(sheaf->op, potential->model, sheafid::NodeField::zero(), to_vec(x0, n), sim)};
    } catch (const sheafid::DivergenceError& e) {
      *out = new sheafid_trajectory{e.partial()};
      throw;
    }
  });
}

void sheafid_trajectory_free(sheafid_trajectory* traj) { delete traj; }

sheafid_status sheafid_trajectory_shape(const sheafid_trajectory* traj, size_t* samples, size_t* dim) {
  return guarded([&] {
    need(traj != nullptr, "null trajectory");
    if (samples) *samples = traj->traj.size();
    if (dim) *dim = traj->traj.dim();
  });
}

sheafid_status sheafid_trajectory_time(const sheafid_trajectory* traj, size_t k, double* t) {
  return guarded([&] {
    need(traj != nullptr && t != nullptr, "null argument");
    need(k < traj->traj.size(), "sample index out of range");
    *t = traj->traj.times[k];
  });
}

sheafid_status sheafid_trajectory_state(const sheafid_trajectory* traj, size_t k, double* x, size_t n) {
  return guarded([&] {
    need(traj != nullptr, "null trajectory");
    need(k < traj->traj.size(), "sample index out of range");
    copy_out(traj->traj.states[k], x, n);
  });
}

sheafid_status sheafid_trajectory_deriv(const sheafid_trajectory* traj, size_t k, double* dx, size_t n) {
  return guarded([&] {
    need(traj != nullptr, "null trajectory");
    need(traj->traj.has_derivs(), "trajectory has no recorded derivatives");
    need(k < traj->traj.size(), "sample index out of range");
    copy_out(traj->traj.derivs[k], dx, n);
  });
}

sheafid_status sheafid_identify(const sheafid_sheaf* sheaf, const sheafid_potential* family,
                                const sheafid_trajectory* const* trajs, size_t count, int finite_difference,
                                double ridge, sheafid_estimate** out) {
  return guarded([&] {
    need(sheaf != nullptr && family != nullptr && out != nullptr, "null argument");
    need(trajs != nullptr && count > 0, "no trajectories given");
    sheafid::ResidualDataset data;
    const auto zero = sheafid::NodeField::zero();
    for (size_t i = 0; i < count; ++i) {
      need(trajs[i] != nullptr, "null trajectory");
      data.append(finite_difference ? sheafid::residuals_fd(sheaf->op, trajs[i]->traj, zero)
                                    : sheafid::residuals_exact(sheaf->op, trajs[i]->traj, zero));
    }
    const auto& m = family->model;
    sheafid::require(m.is_parametric(), sheafid::ErrorKind::usage, "potential family has no free parameters");
    auto result = m.kind() == sheafid::PotentialKind::bounded_confidence
                      ? sheafid::fit_threshold(sheaf->op, data)
                      : sheafid::fit_linear(sheaf->op, m, data, ridge);
    *out = new sheafid_estimate{std::move(result)};
  });
}

void sheafid_estimate_free(sheafid_estimate* est) { delete est; }

sheafid_status sheafid_estimate_parameters(const sheafid_estimate* est, double* out, size_t cap, size_t* count) {
  return guarded([&] {
    need(est != nullptr, "null estimate");
    const auto& th = est->result.theta;
    if (count) *count = th.size();
    need(out != nullptr || cap == 0, "null output pointer");
    std::copy(th.begin(), th.begin() + static_cast<std::ptrdiff_t>(std::min(cap, th.size())), out);
  });
}

sheafid_status sheafid_estimate_info(const sheafid_estimate* est, double* lambda_min, double* lambda_max,
                                     int* identifiable, double* objective) {
  return guarded([&] {
    need(est != nullptr, "null estimate");
    if (lambda_min) *lambda_min = est->result.report.lambda_min;
    if (lambda_max) *lambda_max = est->result.report.lambda_max;
    if (identifiable) *identifiable = est->result.report.identifiable ? 1 : 0;
    if (objective) *objective = est->result.objective_value;
  });
}

sheafid_status sheafid_command_from_name(const char* name, sheafid_command* out) {
  return guarded([&] {
    need(name != nullptr && out != nullptr, "null argument");
    const auto c = sheafid::command_from_string(name);
    need(c.has_value(), "unknown command");
    *out = static_cast<sheafid_command>(*c);
  });
}

int sheafid_run_command(const sheafid_command_options* opts, char** summary, char** error) {
  sheafid::CommandResult res;
  if (!opts || opts->command < SHEAFID_CMD_COHOMOLOGY || opts->command > SHEAFID_CMD_EXPERIMENT) {
    res.exit_code = sheafid::kExitUsage;
    res.error = "invalid command options";
  } else {
    sheafid::CommandOptions o;
    o.command = static_cast<sheafid::Command>(opts->command);
    if (opts->config_path) o.config_path = opts->config_path;
    if (opts->output_dir) o.output_dir = std::string(opts->output_dir);
    if (opts->has_seed) o.seed = opts->seed;
    res = sheafid::run_command(o);
  }
  try {
    if (summary) *summary = dup_string(res.summary);
    if (error) *error = dup_string(res.error);
  } catch (const std::bad_alloc&) {
    return sheafid::kExitUsage;
  }
  if (res.exit_code != 0) g_last_error = res.error;
  return res.exit_code;
}

}  // extern "C"
