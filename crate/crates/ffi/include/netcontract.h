#ifndef NETCONTRACT_H
#define NETCONTRACT_H

#include <stdbool.h>
#include <stddef.h>

/**
 * Result codes. Values 2 to 5 match the command-line exit codes.
 */
typedef enum NcStatus {
  NC_STATUS_OK = 0,
  NC_STATUS_VALIDATION = 2,
  NC_STATUS_ASSUMPTION = 3,
  NC_STATUS_NUMERIC = 4,
  NC_STATUS_CONSISTENCY = 5,
  NC_STATUS_NULL_POINTER = 10,
  NC_STATUS_INVALID_ARGUMENT = 11,
  NC_STATUS_BUFFER_TOO_SMALL = 12,
  NC_STATUS_PANIC = 13,
} NcStatus;

/**
 * Which per-agent vector of a solution to copy out.
 */
typedef enum NcField {
  NC_FIELD_V = 0,
  NC_FIELD_Z = 1,
  NC_FIELD_EFFORT = 2,
  NC_FIELD_CERTAINTY_EQUIVALENT = 3,
} NcField;

/**
 * Opaque model handle.
 */
typedef struct NcModel NcModel;

/**
 * Opaque solution handle.
 */
typedef struct NcSolution NcSolution;

typedef struct NcAssumptionReport {
  double rho1;
  double rho2;
  bool a1_holds;
  bool a2_holds;
  bool generalized;
} NcAssumptionReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or null. The pointer stays valid until
 * the next failing call on the same thread.
 */
const char *nc_last_error_message(void);

/**
 * Parses a model from a NUL-terminated JSON document.
 *
 * # Safety
 * `json` must be a valid C string and `out` a writable pointer.
 */
enum NcStatus nc_model_from_json(const char *json, struct NcModel **out);

/**
 * # Safety
 * `model` must come from [`nc_model_from_json`] and not be used afterwards.
 */
void nc_model_free(struct NcModel *model);

/**
 * Number of agents, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t nc_model_agent_count(const struct NcModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum NcStatus nc_check_assumptions(const struct NcModel *model, struct NcAssumptionReport *out);

/**
 * Solves for the optimal contract. With `unsafe_mode` the spectral gates are
 * skipped.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum NcStatus nc_solve(const struct NcModel *model, bool unsafe_mode, struct NcSolution **out);

/**
 * # Safety
 * `solution` must come from [`nc_solve`] and not be used afterwards.
 */
void nc_solution_free(struct NcSolution *solution);

/**
 * Principal's expected profit, NaN for a null handle.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
double nc_solution_profit(const struct NcSolution *solution);

/**
 * Copies one per-agent vector into `buf`, which must hold `len >= n` values.
 *
 * # Safety
 * `solution` must be a live handle and `buf` valid for `len` writes.
 */
enum NcStatus nc_solution_copy(const struct NcSolution *solution,
                               enum NcField field,
                               double *buf,
                               size_t len);

/**
 * Serializes a solution to JSON. Release the string with [`nc_string_free`].
 *
 * # Safety
 * `solution` must be a live handle and `out` writable.
 */
enum NcStatus nc_solution_to_json(const struct NcSolution *solution, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void nc_string_free(char *s);

/**
 * Nash efforts under the piece rates `v` (length `n`), written to `out`.
 *
 * # Safety
 * `model` must be a live handle, `v` valid for `n` reads and `out` for `n` writes.
 */
enum NcStatus nc_nash_efforts(const struct NcModel *model, const double *v, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETCONTRACT_H */
