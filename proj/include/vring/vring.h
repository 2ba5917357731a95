#ifndef VRING_H
#define VRING_H

/* C API of the vring shared library.
 *
 * Opaque handles + integer status codes; every entry point is
 * exception-safe and thread-compatible (one handle per thread). On failure
 * the thread-local message from vring_last_error() describes the cause.
 *
 * Status values match the CLI exit convention: 0 success, 1 criterion
 * failure, 2 configuration/input error, 3 runtime error.
 */

#include <stddef.h>

#ifdef _WIN32
#define VRING_API __declspec(dllexport)
#else
#define VRING_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vring_status {
  VRING_OK = 0,
  VRING_ERR_CRITERION = 1,
  VRING_ERR_CONFIG = 2,
  VRING_ERR_RUNTIME = 3
} vring_status;

typedef struct vring_experiment vring_experiment;

VRING_API const char* vring_version(void);

/* Thread-local message describing the most recent failure. */
VRING_API const char* vring_last_error(void);

/* Worker threads for the O(N^2) particle sums; results are identical for
 * any count. workers <= 0 restores the hardware default. */
VRING_API void vring_set_workers(int workers);

/* --- experiments ---------------------------------------------------------- */

/* Parse a config file with optional "key=value" overrides (dotted paths). */
VRING_API vring_status vring_experiment_create(const char* config_path,
                                               const char* const* overrides,
                                               size_t n_overrides,
                                               vring_experiment** out);

VRING_API void vring_experiment_destroy(vring_experiment* exp);

/* Run the experiment, writing trajectories.csv / diagnostics.csv /
 * invariants.csv / manifest.json / plotspec.json into out_dir.
 * Returns VRING_ERR_CRITERION when the run completes but a manifest
 * criterion fails. */
VRING_API vring_status vring_experiment_run(vring_experiment* exp,
                                            const char* out_dir);

/* Manifest of the last run as a JSON string owned by the handle; NULL before
 * the first run. */
VRING_API const char* vring_experiment_manifest(const vring_experiment* exp);

/* 1 when every criterion of the last run passed, 0 otherwise. */
VRING_API int vring_experiment_all_passed(const vring_experiment* exp);

/* --- one-shot entry points ------------------------------------------------- */

/* Kernel oracle suite. Writes a human-readable table into *report_out
 * (malloc'd, caller frees with vring_string_free). VRING_ERR_CRITERION when
 * a check fails. */
VRING_API vring_status vring_validate_kernel(char** report_out);

/* Recompute invariant series for a trajectory CSV.
 * kind: "YEps", "LimitTilde" or "Marchioro". Writes the invariants CSV to
 * out_csv_path. */
VRING_API vring_status vring_invariants_from_csv(const char* traj_csv_path,
                                                 const char* kind,
                                                 double gamma, double epsilon,
                                                 double z_star, double r_star,
                                                 const char* out_csv_path);

/* Recompute invariants.csv next to a manifest from its trajectory CSVs. */
VRING_API vring_status vring_replay(const char* manifest_path);

VRING_API void vring_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* VRING_H */
