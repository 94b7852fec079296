#ifndef ULAB_H
#define ULAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UlabStatus {
  ULAB_STATUS_OK = 0,
  /**
   * The run completed and at least one check failed.
   */
  ULAB_STATUS_CHECK_FAILED = 1,
  /**
   * The scenario or a parameter was rejected.
   */
  ULAB_STATUS_VALIDATION = 2,
  ULAB_STATUS_NULL_POINTER = 3,
  ULAB_STATUS_INVALID_UTF8 = 4,
  ULAB_STATUS_INDEX_OUT_OF_RANGE = 5,
  ULAB_STATUS_INTERNAL = 6,
  ULAB_STATUS_PANIC = 7,
} UlabStatus;

/**
 * A finished report.
 */
typedef struct UlabReport UlabReport;

/**
 * A validated scenario.
 */
typedef struct UlabScenario UlabScenario;

/**
 * One check of a report. `certificate_status` is 0 for none, 1 exact,
 * 2 proof, 3 evidence.
 */
typedef struct UlabCheck {
  double abs_err;
  double tol;
  bool pass;
  uint8_t certificate_status;
} UlabCheck;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Crate version as a static NUL-terminated string.
 */
const char *ulab_version(void);

/**
 * Message for the last failing call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *ulab_last_error_message(void);

/**
 * Parses and validates a scenario.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum UlabStatus ulab_scenario_from_json(const char *json, struct UlabScenario **out);

/**
 * # Safety
 * `scenario` must come from [`ulab_scenario_from_json`] or be null.
 */
void ulab_scenario_free(struct UlabScenario *scenario);

/**
 * Runs a validated scenario. Returns `CheckFailed` when the report does not
 * pass; the report is produced either way.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
enum UlabStatus ulab_scenario_run(const struct UlabScenario *scenario, struct UlabReport **out);

/**
 * Parses, validates and runs a scenario in one call.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum UlabStatus ulab_run_scenario_json(const char *json, struct UlabReport **out);

/**
 * # Safety
 * `report` must come from this library or be null.
 */
void ulab_report_free(struct UlabReport *report);

/**
 * # Safety
 * `report` must be a live handle and `out` a writable pointer.
 */
enum UlabStatus ulab_report_pass(const struct UlabReport *report, bool *out);

/**
 * # Safety
 * `report` must be a live handle and `out` a writable pointer.
 */
enum UlabStatus ulab_report_check_count(const struct UlabReport *report, size_t *out);

/**
 * # Safety
 * `report` must be a live handle and `out` a writable pointer.
 */
enum UlabStatus ulab_report_check(const struct UlabReport *report,
                                  size_t index,
                                  struct UlabCheck *out);

/**
 * Report JSON; release with [`ulab_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` a writable pointer.
 */
enum UlabStatus ulab_report_to_json(const struct UlabReport *report, char **out);

/**
 * Fixture and scenario-kind listing as JSON; release with
 * [`ulab_string_free`]. `dir` may be null.
 *
 * # Safety
 * `dir` must be null or a NUL-terminated string; `out` a writable pointer.
 */
enum UlabStatus ulab_list_fixtures_json(const char *dir, char **out);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void ulab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ULAB_H */
