/* rdstab - reaction-diffusion boundary stabilization toolkit, C API.
 *
 * Opaque-session interface over the pipeline: load a configuration (file,
 * text, or shipped preset), optionally override keys, run a command, and read
 * back the JSON summary. Granular numeric accessors cover the common
 * library-embedding cases. All functions return RDSTAB_OK on success;
 * rdstab_last_error() holds the failure message of the last call.
 */
#ifndef RDSTAB_H
#define RDSTAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct rdstab_session rdstab_session;

typedef enum rdstab_status {
  RDSTAB_OK = 0,
  RDSTAB_ERR_ARGUMENT = 1,  /* bad argument or configuration value */
  RDSTAB_ERR_PARSE = 2,     /* unreadable configuration or JSON */
  RDSTAB_ERR_NUMERIC = 3,   /* solver failure or violated numeric precondition */
  RDSTAB_ERR_IO = 4,        /* file system failure */
  RDSTAB_ERR_INTERNAL = 5
} rdstab_status;

unsigned rdstab_abi_version(void); /* 1 */

rdstab_session* rdstab_session_new(void);
void rdstab_session_free(rdstab_session* s);

rdstab_status rdstab_load_config_file(rdstab_session* s, const char* path);
rdstab_status rdstab_load_config_text(rdstab_session* s, const char* text);
rdstab_status rdstab_load_preset(rdstab_session* s, const char* name);

/* dotted-key override, e.g. rdstab_set(s, "gains.delta", "0.4") */
rdstab_status rdstab_set(rdstab_session* s, const char* key, const char* value);

/* command: eig | synth | check | simulate | sweep | repro.
 * cert_file may be NULL; it routes `check` to verify an existing certificate.
 * Output files are written under out_dir. */
rdstab_status rdstab_run(rdstab_session* s, const char* command, const char* out_dir,
                         const char* cert_file);

/* JSON summary of the last successful run; valid until the next call */
const char* rdstab_summary_json(const rdstab_session* s);

/* message for the last failed call on this session */
const char* rdstab_last_error(const rdstab_session* s);

/* process-style exit code of the last run (repro: nonzero iff a check failed) */
int rdstab_exit_code(const rdstab_session* s);

/* -- granular helpers (use the currently loaded configuration) ------------ */

/* first n eigenvalues of the plant operator */
rdstab_status rdstab_eigenvalues(rdstab_session* s, int n, double* out);

/* feedback/observer gains; K and L must hold at least max_n entries */
rdstab_status rdstab_gains(rdstab_session* s, double* K, double* L, int max_n,
                           int* n0_out);

/* runs the certificate search for `theorem` ("t1"|"t2"|"t3"|"c4") at observer
 * dimension N; feasible_out gets 0/1, margin_out the largest Theta1 eigenvalue */
rdstab_status rdstab_certificate(rdstab_session* s, const char* theorem, int N,
                                 int* feasible_out, double* margin_out);

#ifdef __cplusplus
}
#endif

#endif /* RDSTAB_H */
