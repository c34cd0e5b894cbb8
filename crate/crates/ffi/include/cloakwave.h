/* C interface to the cloakwave verification toolkit. */

#ifndef CLOAKWAVE_H
#define CLOAKWAVE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum CwStatus {
  CW_OK = 0,
  CW_NULL_POINTER = 1,
  CW_INVALID_UTF8 = 2,
  CW_CONFIG_ERROR = 3,
  CW_DOMAIN_ERROR = 4,
  CW_SIGNATURE_ERROR = 5,
  CW_SINGULAR_METRIC = 6,
  CW_CHART_ERROR = 7,
  CW_STABILITY_ERROR = 8,
  CW_GRID_ERROR = 9,
  CW_DATA_ERROR = 10,
  CW_PRECONDITION_ERROR = 11,
  CW_IO_ERROR = 12,
  CW_VERDICT_FAILED = 13,
  CW_PANIC = 14,
} CwStatus;

/**
 * Opaque validated scenario configuration.
 */
typedef struct CwScenario CwScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread; do not free
 * it.
 */
const char *cw_last_error_message(void);

/**
 * Build a scenario from a JSON configuration string.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer; the
 * returned handle must be released with [`cw_scenario_free`].
 */
enum CwStatus cw_scenario_new_from_json(const char *json, struct CwScenario **out);

/**
 * Build a scenario with the default parameters of the named geometry
 * ("hyperboloid", "kruskal" or "flrw-bounce").
 *
 * # Safety
 * `name` must be NUL-terminated; `out` must be valid.
 */
enum CwStatus cw_scenario_default(const char *name, struct CwScenario **out);

/**
 * Release a scenario handle. NULL is accepted.
 *
 * # Safety
 * `scenario` must come from a constructor of this library and must not be
 * used afterwards.
 */
void cw_scenario_free(struct CwScenario *scenario);

/**
 * Release a string returned by this library. NULL is accepted.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void cw_string_free(char *s);

/**
 * Run the reachability verification; the JSON report lands in `out_json`
 * and the suite verdict in `out_pass` (may be NULL).
 *
 * # Safety
 * `scenario` and `out_json` must be valid; free the string with
 * [`cw_string_free`].
 */
enum CwStatus cw_run_causality(const struct CwScenario *scenario, char **out_json, bool *out_pass);

/**
 * Run the scalar-curvature witness; same output contract as
 * [`cw_run_causality`].
 *
 * # Safety
 * As [`cw_run_causality`].
 */
enum CwStatus cw_run_witness(const struct CwScenario *scenario, char **out_json, bool *out_pass);

/**
 * Run the Dirichlet-to-Neumann comparison; same output contract as
 * [`cw_run_causality`].
 *
 * # Safety
 * As [`cw_run_causality`].
 */
enum CwStatus cw_run_compare_dn(const struct CwScenario *scenario, char **out_json, bool *out_pass);

/**
 * Run the exterior source-to-solution comparison; same output contract as
 * [`cw_run_causality`].
 *
 * # Safety
 * As [`cw_run_causality`].
 */
enum CwStatus cw_run_compare_sts(const struct CwScenario *scenario,
                                 char **out_json,
                                 bool *out_pass);

/**
 * Scalar curvature of the scenario's base metric (`blended` = false) or
 * blended metric (`blended` = true) at a chart point.
 *
 * # Safety
 * `coords` must point to `len` doubles; `out` must be valid. Only the
 * hyperboloid scenario carries a blend.
 */
enum CwStatus cw_scalar_curvature(const struct CwScenario *scenario,
                                  bool blended,
                                  const double *coords,
                                  uintptr_t len,
                                  double fd_step,
                                  double *out);

/**
 * Conformal time of the bounce cosmology; stateless helper.
 */
double cw_conformal_time(double h_rate, double t);

/**
 * Solve the implicit Kruskal radius relation. Returns a status; the radius
 * lands in `out`.
 *
 * # Safety
 * `out` must be valid.
 */
enum CwStatus cw_kruskal_r(double t_coord, double r_coord, double r_s, double *out);

/**
 * Library version as a static string; do not free.
 */
const char *cw_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLOAKWAVE_H */
