/* smlab: finite spaces of homogeneous type, dyadic systems, lattice maximal
 * operators, spectral multiplier calculus and kernel-estimate fitters behind
 * a C ABI. Handles are opaque; every call returns a status code and leaves a
 * thread-local message readable through smlab_last_error(). Strings returned
 * through char** are library-allocated; release them with smlab_string_free.
 */
#ifndef SMLAB_H
#define SMLAB_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum smlab_status {
  SMLAB_OK = 0,
  SMLAB_ERR_INVALID_ARGUMENT = 1,
  SMLAB_ERR_PARSE = 2,
  SMLAB_ERR_IO = 3,
  SMLAB_ERR_NUMERIC = 4,
  SMLAB_ERR_TASK_FAILED = 5,
  SMLAB_ERR_UNKNOWN = 6
} smlab_status;

const char* smlab_version(void);
/* Message for the last failing call on this thread; empty string otherwise. */
const char* smlab_last_error(void);
void smlab_string_free(char* s);

/* ---- spaces ------------------------------------------------------------ */

typedef struct smlab_space smlab_space;

/* kind: "cycle" (n), "path" (n), "torus" (n = side, dim = dimensions),
 * "cloud" (n points, dim coordinates, seeded). */
smlab_status smlab_space_model(const char* kind, int n, int dim, uint64_t seed,
                               smlab_space** out);
smlab_status smlab_space_load(const char* path, smlab_space** out);
/* Space described by the [space] section of a scenario config. */
smlab_status smlab_space_from_config(const char* config_path, smlab_space** out);
smlab_status smlab_space_save(const smlab_space* space, const char* path);
void smlab_space_free(smlab_space* space);

int smlab_space_size(const smlab_space* space);
/* Closed-ball point indices; fails when cap is too small. */
smlab_status smlab_space_ball(const smlab_space* space, int x, double r, int* out_indices,
                              int cap, int* out_count);
smlab_status smlab_space_volume(const smlab_space* space, int x, double r, double* out);
/* Doubling constant, fitted dimension, companion constant, comparability. */
smlab_status smlab_space_doubling(const smlab_space* space, double* C_D, double* dim,
                                  double* C_d, double* C_cmp);
/* Validation + doubling diagnostics of a space file, as JSON. */
smlab_status smlab_space_check(const char* path, char** report_json);

/* ---- dyadic systems ------------------------------------------------------ */

typedef struct smlab_dyadic smlab_dyadic;

smlab_status smlab_dyadic_build(const smlab_space* space, double delta, uint64_t seed,
                                smlab_dyadic** out);
smlab_status smlab_dyadic_save(const smlab_dyadic* sys, const smlab_space* space,
                               const char* path);
smlab_status smlab_dyadic_load(const smlab_space* space, const char* path,
                               smlab_dyadic** out);
/* pass = 1 when partition/nesting/measure checks and thresholds hold. */
smlab_status smlab_dyadic_verify(const smlab_dyadic* sys, const smlab_space* space,
                                 double c1_min, double C1_max, int* pass,
                                 char** report_json);
void smlab_dyadic_free(smlab_dyadic* sys);

/* ---- scenarios ----------------------------------------------------------- */

/* Runs the config's task list in order. task_filter of NULL runs everything;
 * otherwise only tasks of that type (plus their prerequisites) execute.
 * out_dir of NULL writes no files. seed_override of NULL keeps config seeds.
 * all_pass reflects the conjunction of task pass flags. */
smlab_status smlab_scenario_run(const char* config_path, const char* task_filter,
                                const char* out_dir, int threads,
                                const uint64_t* seed_override, int* all_pass,
                                char** summary_json);

/* Applies a named multiplier (e.g. "heat:1") of the config's operator to a
 * VectorField CSV, writing the image as CSV. */
smlab_status smlab_spectral_apply(const char* config_path, const char* multiplier_spec,
                                  const char* field_csv_in, const char* field_csv_out);

/* Merges task report JSON files into a summary CSV. */
smlab_status smlab_report_merge(const char* const* report_paths, int count,
                                char** csv_out);

#ifdef __cplusplus
}
#endif

#endif /* SMLAB_H */
