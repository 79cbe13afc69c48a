/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "sheafid/sheafid.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static void test_sheaf(void) {
  sheafid_sheaf* a = NULL;
  sheafid_sheaf* b = NULL;
  size_t h0 = 9, h1 = 9, d0 = 0, d1 = 0;
  EXPECT(sheafid_sheaf_cycle(3, 0, &a) == SHEAFID_OK);
  EXPECT(sheafid_sheaf_cycle(3, 1, &b) == SHEAFID_OK);
  EXPECT(sheafid_sheaf_dims(a, &d0, &d1) == SHEAFID_OK && d0 == 6 && d1 == 6);
  EXPECT(sheafid_sheaf_cohomology(a, &h0, &h1) == SHEAFID_OK && h0 == 2 && h1 == 2);
  EXPECT(sheafid_sheaf_cohomology(b, &h0, &h1) == SHEAFID_OK && h0 == 0 && h1 == 0);

  double lo = 0, hi = 0;
  EXPECT(sheafid_sheaf_spectrum(a, &lo, &hi) == SHEAFID_OK);
  EXPECT(fabs(lo - 3.0) < 1e-10 && fabs(hi - 3.0) < 1e-10);

  /* Constant section is killed, constant edge cochain is harmonic. */
  double x[6] = {1, 2, 1, 2, 1, 2}, y[6], back[6];
  EXPECT(sheafid_coboundary_apply(a, x, 6, y, 6) == SHEAFID_OK);
  for (int i = 0; i < 6; ++i) EXPECT(y[i] == 0.0);
  EXPECT(sheafid_adjoint_apply(a, x, 6, back, 6) == SHEAFID_OK);
  for (int i = 0; i < 6; ++i) EXPECT(fabs(back[i]) < 1e-14);
  EXPECT(sheafid_coboundary_apply(a, x, 5, y, 6) == SHEAFID_ERR_STRUCTURE);
  EXPECT(strlen(sheafid_last_error()) > 0);

  size_t k = 0;
  EXPECT(sheafid_harmonic_basis(a, NULL, 0, &k) == SHEAFID_OK && k == 2);
  double basis[12];
  EXPECT(sheafid_harmonic_basis(a, basis, 12, &k) == SHEAFID_OK);
  EXPECT(sheafid_harmonic_basis(a, basis, 5, &k) == SHEAFID_ERR_USAGE);

  char* json = NULL;
  EXPECT(sheafid_sheaf_to_json(b, &json) == SHEAFID_OK && json != NULL);
  sheafid_sheaf* c = NULL;
  EXPECT(sheafid_sheaf_from_json(json, &c) == SHEAFID_OK);
  char* json2 = NULL;
  EXPECT(sheafid_sheaf_to_json(c, &json2) == SHEAFID_OK && strcmp(json, json2) == 0);
  sheafid_string_free(json);
  sheafid_string_free(json2);
  EXPECT(sheafid_sheaf_from_json("{\"vertex_count\": 1, \"bogus\": 2}", &c) == SHEAFID_ERR_STRUCTURE);
  EXPECT(sheafid_sheaf_cycle(1, 0, &c) != SHEAFID_OK);

  sheafid_sheaf_free(a);
  sheafid_sheaf_free(b);
}

static void test_potentials(void) {
  sheafid_sheaf* a = NULL;
  sheafid_potential* bc = NULL;
  sheafid_potential* mono = NULL;
  sheafid_sheaf_cycle(3, 0, &a);
  EXPECT(sheafid_potential_bounded_confidence(1.0, &bc) == SHEAFID_OK);
  EXPECT(sheafid_potential_bounded_confidence(0.0, &bc) == SHEAFID_ERR_PARAMETER);
  double theta[3] = {1.0, 0.25, 0.03};
  EXPECT(sheafid_potential_monomial(theta, 3, &mono) == SHEAFID_OK);

  double y[6] = {0.6, 0.8, 2, 0, 0, 0}, f[6], v = 0;
  EXPECT(sheafid_potential_value(bc, a, y, 6, &v) == SHEAFID_OK);
  EXPECT(fabs(v - 2.0 / 6.0) < 1e-12); /* edges 0 and 1 sit at or past the cutoff */
  EXPECT(sheafid_potential_force(mono, a, y, 6, f, 6) == SHEAFID_OK);
  EXPECT(fabs(f[0] - 1.28 * 0.6) < 1e-12 && fabs(f[1] - 1.28 * 0.8) < 1e-12);
  EXPECT(sheafid_potential_force(mono, a, y, 4, f, 6) == SHEAFID_ERR_STRUCTURE);

  sheafid_potential_free(bc);
  sheafid_potential_free(mono);
  sheafid_sheaf_free(a);
}

static void test_simulate_identify(void) {
  sheafid_sheaf* a = NULL;
  sheafid_potential* truth = NULL;
  sheafid_potential* family = NULL;
  sheafid_sheaf_cycle(3, 0, &a);
  double theta[3] = {1.0, 0.25, 0.03}, zero[3] = {0, 0, 0};
  sheafid_potential_monomial(theta, 3, &truth);
  sheafid_potential_monomial(zero, 3, &family);

  sheafid_sim_config cfg;
  sheafid_sim_config_default(&cfg);
  EXPECT(cfg.step == 0.01 && cfg.alpha == 1.0 && cfg.noise_std == 0.0);
  cfg.horizon = 2.0;

  sheafid_trajectory* trajs[3] = {NULL, NULL, NULL};
  double starts[3][6] = {{0.1, -0.2, 0.3, 0.0, -0.1, 0.2},
                         {0.5, 0.4, -0.6, 0.2, 0.1, -0.3},
                         {1.2, -0.9, 0.0, 0.8, -1.1, 0.4}};
  for (int i = 0; i < 3; ++i) EXPECT(sheafid_simulate(a, truth, starts[i], 6, &cfg, &trajs[i]) == SHEAFID_OK);
  size_t samples = 0, dim = 0;
  EXPECT(sheafid_trajectory_shape(trajs[0], &samples, &dim) == SHEAFID_OK && samples == 201 && dim == 6);
  double t = 0, xs[6], dx[6];
  EXPECT(sheafid_trajectory_time(trajs[0], 200, &t) == SHEAFID_OK && fabs(t - 2.0) < 1e-12);
  EXPECT(sheafid_trajectory_state(trajs[0], 0, xs, 6) == SHEAFID_OK && xs[2] == 0.3);
  EXPECT(sheafid_trajectory_deriv(trajs[0], 0, dx, 6) == SHEAFID_OK);
  EXPECT(sheafid_trajectory_state(trajs[0], 201, xs, 6) == SHEAFID_ERR_USAGE);

  sheafid_estimate* est = NULL;
  EXPECT(sheafid_identify(a, family, (const sheafid_trajectory* const*)trajs, 3, 0, 0.0, &est) == SHEAFID_OK);
  double got[3];
  size_t count = 0;
  EXPECT(sheafid_estimate_parameters(est, got, 3, &count) == SHEAFID_OK && count == 3);
  for (int i = 0; i < 3; ++i) EXPECT(fabs(got[i] - theta[i]) < 1e-9);
  double lmin = 0, lmax = 0, obj = 1;
  int ident = 0;
  EXPECT(sheafid_estimate_info(est, &lmin, &lmax, &ident, &obj) == SHEAFID_OK);
  EXPECT(ident == 1 && lmin > 0 && lmax >= lmin && obj < 1e-18);
  sheafid_estimate_free(est);
  EXPECT(sheafid_identify(a, family, (const sheafid_trajectory* const*)trajs, 0, 0, 0.0, &est) == SHEAFID_ERR_USAGE);

  /* Antagonistic cutset diverges but still hands back the partial path. */
  sheafid_potential* bad = NULL;
  size_t neg[3] = {0, 1, 2};
  EXPECT(sheafid_potential_antagonistic(neg, 3, &bad) == SHEAFID_OK);
  cfg.horizon = 200.0;
  sheafid_trajectory* partial = NULL;
  EXPECT(sheafid_simulate(a, bad, starts[1], 6, &cfg, &partial) == SHEAFID_ERR_DIVERGENCE);
  EXPECT(partial != NULL);
  if (partial) {
    EXPECT(sheafid_trajectory_shape(partial, &samples, &dim) == SHEAFID_OK && samples > 1 && samples < 20001);
    sheafid_trajectory_free(partial);
  }

  for (int i = 0; i < 3; ++i) sheafid_trajectory_free(trajs[i]);
  sheafid_potential_free(bad);
  sheafid_potential_free(truth);
  sheafid_potential_free(family);
  sheafid_sheaf_free(a);
}

static void test_commands(void) {
  sheafid_command cmd;
  EXPECT(sheafid_command_from_name("cohomology", &cmd) == SHEAFID_OK && cmd == SHEAFID_CMD_COHOMOLOGY);
  EXPECT(sheafid_command_from_name("train", &cmd) == SHEAFID_ERR_USAGE);
  sheafid_command_options opts;
  memset(&opts, 0, sizeof opts);
  opts.command = SHEAFID_CMD_IDENTIFY;
  char* summary = NULL;
  char* error = NULL;
  /* identify without a config is a usage error. */
  EXPECT(sheafid_run_command(&opts, &summary, &error) == 1);
  EXPECT(error != NULL && strlen(error) > 0);
  sheafid_string_free(summary);
  sheafid_string_free(error);
  EXPECT(sheafid_run_command(NULL, NULL, NULL) == 1);
}

int main(void) {
  EXPECT(strlen(sheafid_version()) > 0);
  test_sheaf();
  test_potentials();
  test_simulate_identify();
  test_commands();
  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
