/* Exercises the shared-library C interface end to end. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "rdstab.h"

static int failures = 0;

static void check(int cond, const char* what) {
  if (!cond) {
    fprintf(stderr, "FAIL: %s\n", what);
    failures++;
  }
}

int main(void) {
  check(rdstab_abi_version() == 1u, "abi version");

  rdstab_session* s = rdstab_session_new();
  check(s != NULL, "session allocation");

  check(rdstab_run(s, "synth", "/tmp/rdstab_capi_out", NULL) != RDSTAB_OK,
        "running without a configuration must fail");

  check(rdstab_load_preset(s, "repro-sec5-h1") == RDSTAB_OK, "load preset");
  check(rdstab_load_preset(s, "no-such-preset") == RDSTAB_ERR_ARGUMENT,
        "unknown preset is an argument error");
  check(rdstab_load_preset(s, "repro-sec5-h1") == RDSTAB_OK, "reload preset");
  check(rdstab_set(s, "plant.grid_resolution", "501") == RDSTAB_OK, "override");
  check(rdstab_set(s, "plant.bogus", "1") == RDSTAB_ERR_ARGUMENT, "unknown key");

  {
    double lam[5];
    check(rdstab_eigenvalues(s, 5, lam) == RDSTAB_OK, "eigenvalues");
    double l1 = M_PI * M_PI / 4.0 + 1.0;
    check(fabs(lam[0] - l1) / l1 < 1e-8, "lambda_1 value");
    check(lam[4] > lam[3] && lam[3] > lam[2], "ordering");
  }

  {
    double K[4], L[4];
    int n0 = 0;
    check(rdstab_gains(s, K, L, 4, &n0) == RDSTAB_OK, "gains");
    check(n0 == 1, "N0");
    check(fabs(K[0] + 0.8250) <= 5e-4, "feedback gain value");
    check(fabs(L[0] - 1.2958) <= 5e-4, "observer gain value");
  }

  {
    int feasible = 0;
    double margin = 1.0;
    check(rdstab_certificate(s, "t3", 3, &feasible, &margin) == RDSTAB_OK,
          "certificate search");
    check(feasible == 1, "sector certificate feasible at N=3");
    check(margin <= 1e-9, "certificate margin sign");
  }

  check(rdstab_run(s, "synth", "/tmp/rdstab_capi_out", NULL) == RDSTAB_OK, "run synth");
  check(strlen(rdstab_summary_json(s)) > 2, "summary json present");
  check(rdstab_exit_code(s) == 0, "exit code");

  rdstab_session_free(s);
  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
