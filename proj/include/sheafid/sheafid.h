#ifndef SHEAFID_SHEAFID_H
#define SHEAFID_SHEAFID_H

/* C interface of the sheafid shared library.
 *
 * Objects are opaque handles created by sheafid_*_create-style functions and
 * released with the matching *_free. Every fallible call returns a
 * sheafid_status; on failure sheafid_last_error() describes the problem
 * (thread-local, valid until the next failing call on the same thread).
 * Strings returned through char** are owned by the caller and released with
 * sheafid_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SHEAFID_API __declspec(dllexport)
#elif defined(SHEAFID_BUILDING)
#define SHEAFID_API __attribute__((visibility("default")))
#else
#define SHEAFID_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sheafid_status {
  SHEAFID_OK = 0,
  SHEAFID_ERR_STRUCTURE = 1,  /* malformed sheaf, shape mismatch */
  SHEAFID_ERR_PARAMETER = 2,  /* invalid model parameters */
  SHEAFID_ERR_USAGE = 3,      /* bad arguments, empty data */
  SHEAFID_ERR_DIVERGENCE = 4, /* non-finite state during integration */
  SHEAFID_ERR_CONFIG = 5,
  SHEAFID_ERR_IO = 6,
  SHEAFID_ERR_INTERNAL = 7
} sheafid_status;

typedef struct sheafid_sheaf sheafid_sheaf;
typedef struct sheafid_potential sheafid_potential;
typedef struct sheafid_trajectory sheafid_trajectory;
typedef struct sheafid_estimate sheafid_estimate;

SHEAFID_API const char* sheafid_version(void);
SHEAFID_API const char* sheafid_last_error(void);
SHEAFID_API void sheafid_string_free(char* s);

/* Sheaves */
SHEAFID_API sheafid_status sheafid_sheaf_cycle(size_t n, int rotated, sheafid_sheaf** out);
SHEAFID_API sheafid_status sheafid_sheaf_from_json(const char* text, sheafid_sheaf** out);
SHEAFID_API sheafid_status sheafid_sheaf_to_json(const sheafid_sheaf* sheaf, char** out);
SHEAFID_API void sheafid_sheaf_free(sheafid_sheaf* sheaf);
SHEAFID_API sheafid_status sheafid_sheaf_dims(const sheafid_sheaf* sheaf, size_t* dim_c0, size_t* dim_c1);
SHEAFID_API sheafid_status sheafid_sheaf_cohomology(const sheafid_sheaf* sheaf, size_t* dim_h0, size_t* dim_h1);
/* Smallest nonzero and largest eigenvalue of delta* delta. */
SHEAFID_API sheafid_status sheafid_sheaf_spectrum(const sheafid_sheaf* sheaf, double* lambda_min_nonzero,
                                                  double* lambda_max);
SHEAFID_API sheafid_status sheafid_coboundary_apply(const sheafid_sheaf* sheaf, const double* x, size_t nx,
                                                    double* y, size_t ny);
SHEAFID_API sheafid_status sheafid_adjoint_apply(const sheafid_sheaf* sheaf, const double* y, size_t ny,
                                                 double* x, size_t nx);
/* Column-major dim_c1 x dim_h1 basis of ker delta*; pass cap = 0 to query dim_h1. */
SHEAFID_API sheafid_status sheafid_harmonic_basis(const sheafid_sheaf* sheaf, double* out, size_t cap,
                                                  size_t* dim_h1);

/* Edge potentials. Vectors b and c are flat 1-cochains. */
SHEAFID_API sheafid_status sheafid_potential_quadratic(sheafid_potential** out);
SHEAFID_API sheafid_status sheafid_potential_shifted_quadratic(const double* b, size_t n, sheafid_potential** out);
SHEAFID_API sheafid_status sheafid_potential_bounded_confidence(double epsilon, sheafid_potential** out);
SHEAFID_API sheafid_status sheafid_potential_antagonistic(const size_t* negative_edges, size_t k,
                                                          sheafid_potential** out);
SHEAFID_API sheafid_status sheafid_potential_monomial(const double* theta, size_t p, sheafid_potential** out);
SHEAFID_API sheafid_status sheafid_potential_harmonic_augmented(const double* theta, size_t p, const double* c,
                                                                size_t n, sheafid_potential** out);
SHEAFID_API void sheafid_potential_free(sheafid_potential* potential);
SHEAFID_API sheafid_status sheafid_potential_value(const sheafid_potential* potential, const sheafid_sheaf* sheaf,
                                                   const double* y, size_t n, double* value);
SHEAFID_API sheafid_status sheafid_potential_force(const sheafid_potential* potential, const sheafid_sheaf* sheaf,
                                                   const double* y, size_t n, double* force, size_t nf);

/* Simulation */
typedef struct sheafid_sim_config {
  double alpha;
  double step;
  double horizon;
  uint64_t seed;
  double noise_std;
} sheafid_sim_config;

SHEAFID_API void sheafid_sim_config_default(sheafid_sim_config* cfg);
/* On SHEAFID_ERR_DIVERGENCE *out still receives the partial trajectory. */
SHEAFID_API sheafid_status sheafid_simulate(const sheafid_sheaf* sheaf, const sheafid_potential* potential,
                                            const double* x0, size_t n, const sheafid_sim_config* cfg,
                                            sheafid_trajectory** out);
SHEAFID_API void sheafid_trajectory_free(sheafid_trajectory* traj);
SHEAFID_API sheafid_status sheafid_trajectory_shape(const sheafid_trajectory* traj, size_t* samples, size_t* dim);
SHEAFID_API sheafid_status sheafid_trajectory_time(const sheafid_trajectory* traj, size_t k, double* t);
SHEAFID_API sheafid_status sheafid_trajectory_state(const sheafid_trajectory* traj, size_t k, double* x, size_t n);
SHEAFID_API sheafid_status sheafid_trajectory_deriv(const sheafid_trajectory* traj, size_t k, double* dx, size_t n);

/* Identification: linear families by least squares, bounded confidence by
 * threshold search. finite_difference = 0 uses the recorded derivatives. */
SHEAFID_API sheafid_status sheafid_identify(const sheafid_sheaf* sheaf, const sheafid_potential* family,
                                            const sheafid_trajectory* const* trajs, size_t count,
                                            int finite_difference, double ridge, sheafid_estimate** out);
SHEAFID_API void sheafid_estimate_free(sheafid_estimate* est);
/* Copies up to cap parameters; *count receives the parameter count. */
SHEAFID_API sheafid_status sheafid_estimate_parameters(const sheafid_estimate* est, double* out, size_t cap,
                                                       size_t* count);
SHEAFID_API sheafid_status sheafid_estimate_info(const sheafid_estimate* est, double* lambda_min,
                                                 double* lambda_max, int* identifiable, double* objective);

/* Commands (the CLI front end) */
typedef enum sheafid_command {
  SHEAFID_CMD_COHOMOLOGY = 0,
  SHEAFID_CMD_SIMULATE = 1,
  SHEAFID_CMD_IDENTIFY = 2,
  SHEAFID_CMD_EXPERIMENT = 3
} sheafid_command;

typedef struct sheafid_command_options {
  sheafid_command command;
  const char* config_path; /* NULL or "" for defaults */
  const char* output_dir;  /* NULL keeps the config value */
  int has_seed;
  uint64_t seed;
} sheafid_command_options;

SHEAFID_API sheafid_status sheafid_command_from_name(const char* name, sheafid_command* out);
/* Returns the process exit code: 0 success, 1 usage/config error, 2 divergence.
 * summary and error (either may be NULL) receive caller-owned strings. */
SHEAFID_API int sheafid_run_command(const sheafid_command_options* opts, char** summary, char** error);

#ifdef __cplusplus
}
#endif

#endif
