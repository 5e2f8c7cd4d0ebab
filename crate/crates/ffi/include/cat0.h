#ifndef CAT0_H
#define CAT0_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum Cat0Status {
  CAT0_STATUS_OK = 0,
  /**
   * The command ran but could not certify an answer (for example no unique center).
   */
  CAT0_STATUS_INCOMPLETE = 1,
  CAT0_STATUS_NULL_ARGUMENT = 2,
  CAT0_STATUS_INVALID_UTF8 = 3,
  CAT0_STATUS_INVALID_JSON = 4,
  CAT0_STATUS_LOAD = 5,
  CAT0_STATUS_DOMAIN = 6,
  CAT0_STATUS_ARGUMENT = 7,
  CAT0_STATUS_PRECONDITION = 8,
  CAT0_STATUS_NO_UNIQUE_CENTER = 9,
  CAT0_STATUS_NO_CONVERGENCE = 10,
  CAT0_STATUS_UNSUPPORTED = 11,
  CAT0_STATUS_UNKNOWN_COMMAND = 12,
  CAT0_STATUS_UNKNOWN_TABLE = 13,
  /**
   * A panic was caught at the boundary.
   */
  CAT0_STATUS_PANIC = 14,
} Cat0Status;

/**
 * A parsed scenario document with its queries.
 */
typedef struct Cat0Scenario Cat0Scenario;

/**
 * A model space for direct geometric queries.
 */
typedef struct Cat0Space Cat0Space;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or null. The pointer stays valid
 * until the next call into the library from the same thread.
 */
const char *cat0_last_error(void);

/**
 * Library version as a static string.
 */
const char *cat0_version(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void cat0_string_free(char *s);

/**
 * Parses a scenario document.
 *
 * # Safety
 * `document` must be a NUL-terminated string; `out` must be writable.
 */
enum Cat0Status cat0_scenario_parse(const char *document, struct Cat0Scenario **out);

/**
 * # Safety
 * `scenario` must come from `cat0_scenario_parse` and must not be used afterwards.
 */
void cat0_scenario_free(struct Cat0Scenario *scenario);

/**
 * Number of ids in omega, or 0 for a null handle.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
size_t cat0_scenario_len(const struct Cat0Scenario *scenario);

/**
 * Number of classes of the generated equivalence relation, or 0 for a null handle.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
size_t cat0_scenario_class_count(const struct Cat0Scenario *scenario);

/**
 * Overrides one tolerance by key, with the same keys and value syntax as the scenario file.
 *
 * # Safety
 * `scenario` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum Cat0Status cat0_scenario_set_tolerance(struct Cat0Scenario *scenario,
                                            const char *key,
                                            const char *value);

/**
 * Overrides the scenario seed.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum Cat0Status cat0_scenario_set_seed(struct Cat0Scenario *scenario, uint64_t seed);

/**
 * Runs a command (`"dichotomy"`, `"tits"`, ...) and returns its JSON report through
 * `report_json`. Returns `Incomplete` when the report is valid but uncertified.
 *
 * # Safety
 * `scenario` must be a live handle, `command` a NUL-terminated string, `report_json` writable.
 */
enum Cat0Status cat0_run(const struct Cat0Scenario *scenario,
                         const char *command,
                         char **report_json);

/**
 * Runs a command and returns one of its tables as CSV.
 *
 * # Safety
 * As for `cat0_run`; `table` must be a NUL-terminated string.
 */
enum Cat0Status cat0_run_table(const struct Cat0Scenario *scenario,
                               const char *command,
                               const char *table,
                               char **csv);

/**
 * Parses a space literal such as `{"euclidean": 2}` or `{"tree": "tripod"}`.
 *
 * # Safety
 * `literal` must be a NUL-terminated string; `out` must be writable.
 */
enum Cat0Status cat0_space_parse(const char *literal, struct Cat0Space **out);

/**
 * # Safety
 * `space` must come from `cat0_space_parse` and must not be used afterwards.
 */
void cat0_space_free(struct Cat0Space *space);

/**
 * Distance between two point literals.
 *
 * # Safety
 * `space` must be a live handle, `p` and `q` NUL-terminated strings, `out` writable.
 */
enum Cat0Status cat0_space_distance(const struct Cat0Space *space,
                                    const char *p,
                                    const char *q,
                                    double *out);

/**
 * Busemann function b_{x0, xi}(x).
 *
 * # Safety
 * `space` must be a live handle, the literals NUL-terminated strings, `out` writable.
 */
enum Cat0Status cat0_space_busemann(const struct Cat0Space *space,
                                    const char *x0,
                                    const char *xi,
                                    const char *x,
                                    double *out);

/**
 * Tits angle between two boundary literals.
 *
 * # Safety
 * `space` must be a live handle, the literals NUL-terminated strings, `out` writable.
 */
enum Cat0Status cat0_space_tits_angle(const struct Cat0Space *space,
                                      const char *xi,
                                      const char *eta,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAT0_H */
