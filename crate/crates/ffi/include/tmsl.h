/* C interface to tmsl: noisy Turing machine codes. */

#ifndef TMSL_H
#define TMSL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TmslStatus {
  TMSL_STATUS_OK = 0,
  TMSL_STATUS_NULL_POINTER = 1,
  TMSL_STATUS_INVALID_UTF8 = 2,
  TMSL_STATUS_INVALID_INPUT = 3,
  TMSL_STATUS_WINDOW_OVERFLOW = 4,
  TMSL_STATUS_BUDGET = 5,
  TMSL_STATUS_RESOURCE = 6,
  TMSL_STATUS_INTERNAL = 7,
} TmslStatus;

/**
 * Opaque machine handle.
 */
typedef struct TmslMachine TmslMachine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a machine spec. On success `*out` holds a new handle.
 *
 * # Safety
 * `json` must be a valid C string and `out` a valid pointer.
 */
enum TmslStatus tmsl_machine_from_json(const char *json, struct TmslMachine **out);

/**
 * Built-in detect-A machine, `variant` 0 or 1.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TmslStatus tmsl_machine_detect_a(uint32_t variant, struct TmslMachine **out);

/**
 * # Safety
 * `m` must come from this library and not be used afterwards. Null is ignored.
 */
void tmsl_machine_free(struct TmslMachine *m);

/**
 * Canonical JSON of a machine.
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
enum TmslStatus tmsl_machine_to_json(const struct TmslMachine *m, char **out);

/**
 * Index of the state `name`, for comparing run results.
 *
 * # Safety
 * `m` must be a live handle, `name` a C string and `out` a valid pointer.
 */
enum TmslStatus tmsl_machine_state_index(const struct TmslMachine *m,
                                         const char *name,
                                         uint32_t *out);

/**
 * Final state index after `t` steps of the machine on `input`.
 *
 * # Safety
 * `m` must be a live handle, `input` a C string and `out` a valid pointer.
 */
enum TmslStatus tmsl_tm_run(const struct TmslMachine *m,
                            const char *input,
                            size_t t,
                            uint32_t *out);

/**
 * Simulated state after `t` cycles of the staged UTM.
 *
 * # Safety
 * As for `tmsl_tm_run`.
 */
enum TmslStatus tmsl_utm_run_cycles(const struct TmslMachine *m,
                                    const char *input,
                                    size_t t,
                                    uint32_t *out);

/**
 * Geometry report as JSON. `problem_json` may be null for the detect-A
 * problem; its inputs, distribution and timeout are used.
 *
 * # Safety
 * `m` must be a live handle, `problem_json` null or a C string, `out` valid.
 */
enum TmslStatus tmsl_geometry_report_json(const struct TmslMachine *m,
                                          const char *problem_json,
                                          size_t k_max,
                                          char **out);

/**
 * Weight-one syndrome table for the 1-based `coordinate`, as CSV.
 *
 * # Safety
 * As for `tmsl_geometry_report_json`.
 */
enum TmslStatus tmsl_weight_one_table_csv(const struct TmslMachine *m,
                                          const char *problem_json,
                                          size_t coordinate,
                                          char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void tmsl_string_free(char *s);

/**
 * Message of the last failure on this thread, empty after a success.
 * Valid until the next tmsl call on the same thread.
 */
const char *tmsl_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TMSL_H */
