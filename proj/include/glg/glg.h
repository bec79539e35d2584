#ifndef GLG_GLG_H
#define GLG_GLG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible entry point. On any nonzero
 * status, glg_last_error() describes what went wrong. */
typedef enum glg_status {
  GLG_OK = 0,
  GLG_ERR_INVALID_ARG = 1,
  GLG_ERR_DIM_MISMATCH = 2,
  GLG_ERR_INDEX_RANGE = 3,
  GLG_ERR_DEGENERATE = 4,
  GLG_ERR_PARSE = 5,
  GLG_ERR_DATA_MISSING = 6,
  GLG_ERR_SINGLE_CLASS = 7,
  GLG_ERR_NOT_PSD = 8,
  GLG_ERR_INTERNAL = 9
} glg_status;

/* Opaque dense row-major double matrix. */
typedef struct glg_matrix glg_matrix;

/* Creates a rows×cols matrix; data may be NULL for a zero matrix, otherwise
 * it is copied row-major. Returns NULL on allocation failure or bad sizes. */
glg_matrix* glg_matrix_create(size_t rows, size_t cols, const double* data);
void glg_matrix_destroy(glg_matrix* m);
size_t glg_matrix_rows(const glg_matrix* m);
size_t glg_matrix_cols(const glg_matrix* m);
/* Copies the matrix out row-major; out must hold rows*cols doubles. */
glg_status glg_matrix_copy_data(const glg_matrix* m, double* out);

/* Message for the most recent failure on this thread. Never NULL. */
const char* glg_last_error(void);

/* Frees strings returned through char** out-parameters. */
void glg_string_destroy(char* s);

/* Column standardization to zero mean and unit variance. */
glg_status glg_zscore(const glg_matrix* x, glg_matrix** out);

/* Principal-angle cosines between the spans of two equally tall data
 * matrices; *out is 1×min(cols). */
glg_status glg_domain_distance(const glg_matrix* xs, const glg_matrix* xt, glg_matrix** out);

/* Learns positive linear maps for the domain pair, applies them, and embeds
 * both domains through the geodesic flow kernel. config_json may be NULL or
 * a JSON object overriding fit parameters (same keys as the CLI "glg"
 * config block, e.g. {"seed": 7, "gfk_dim": 0}). */
glg_status glg_adapt(const glg_matrix* xs, const glg_matrix* xt, const char* config_json,
                     glg_matrix** xs_out, glg_matrix** xt_out);

/* Checks the benchmark data directory: file presence, checksums (unless
 * strict is 0), and parseability. *report_json receives a JSON report that
 * the caller frees with glg_string_destroy. Returns GLG_OK only when every
 * required file is usable. */
glg_status glg_prepare(const char* data_dir, int strict, char** report_json);

/* Runs one benchmark cell (task × model) for `runs` seeded repetitions and
 * returns the aggregate report as JSON. config_json may be NULL or a JSON
 * object overriding fit parameters. */
glg_status glg_run_task(const char* task, const char* model, int runs, uint64_t seed,
                        const char* data_dir, const char* config_json, char** report_json);

/* Runs every cell described by the JSON config file, writing per-cell
 * reports and a summary table into the configured output directory.
 * *summary receives the summary table text. Fails with GLG_ERR_INTERNAL if
 * any cell failed (the other cells are still written). */
glg_status glg_run_all(const char* config_path, char** summary);

/* Two-sample distribution check for one task before and after the geodesic
 * embedding; *report_json receives the verdicts. */
glg_status glg_mmd(const char* task, uint64_t seed, const char* data_dir, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* GLG_GLG_H */
