/* C interface of lfsim: sampled-leader minimum-energy following. */

#ifndef LFSIM_H
#define LFSIM_H

/* Generated by cbindgen from lfsim-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an interface call.
 */
typedef enum {
  LfsimStatus_Ok = 0,
  LfsimStatus_NullArgument = 1,
  LfsimStatus_Utf8Error = 2,
  LfsimStatus_ParseError = 3,
  LfsimStatus_ValidationError = 4,
  LfsimStatus_RuntimeError = 5,
  LfsimStatus_IoError = 6,
  LfsimStatus_BufferTooSmall = 7,
  LfsimStatus_OutOfRange = 8,
} LfsimStatus;

/**
 * Designed arrival-time plan (opaque).
 */
typedef struct LfsimPlan LfsimPlan;

/**
 * Finished simulation run (opaque).
 */
typedef struct LfsimRun LfsimRun;

/**
 * Loaded scenario configuration (opaque).
 */
typedef struct LfsimScenario LfsimScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be NULL (query mode).
 */
uintptr_t lfsim_last_error(char *buf, uintptr_t len);

/**
 * Loads one of the built-in scenarios (`msd`, `waypoints`, `aircraft`).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be a valid pointer.
 */
LfsimStatus lfsim_scenario_builtin(const char *name, LfsimScenario **out);

/**
 * Parses a scenario from TOML text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 */
LfsimStatus lfsim_scenario_from_str(const char *text, LfsimScenario **out);

/**
 * Loads a scenario from a TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
LfsimStatus lfsim_scenario_from_file(const char *path, LfsimScenario **out);

/**
 * # Safety
 * `s` must be a handle from a scenario constructor, not yet freed, or NULL.
 */
void lfsim_scenario_free(LfsimScenario *s);

/**
 * Simulates the scenario. `steps_per_epoch = 0` keeps the configured value.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be a valid pointer.
 */
LfsimStatus lfsim_run(const LfsimScenario *s, uintptr_t steps_per_epoch, LfsimRun **out);

/**
 * # Safety
 * `r` must be a handle from `lfsim_run`, not yet freed, or NULL.
 */
void lfsim_run_free(LfsimRun *r);

/**
 * # Safety
 * `r` must be a live run handle.
 */
uintptr_t lfsim_run_follower_count(const LfsimRun *r);

/**
 * # Safety
 * `r` must be a live run handle.
 */
uintptr_t lfsim_run_grid_len(const LfsimRun *r);

/**
 * # Safety
 * `r` must be a live run handle.
 */
uintptr_t lfsim_run_epoch_count(const LfsimRun *r);

/**
 * # Safety
 * `r` must be a live run handle.
 */
uintptr_t lfsim_run_state_dim(const LfsimRun *r);

/**
 * # Safety
 * `r` must be a live run handle.
 */
uintptr_t lfsim_run_input_dim(const LfsimRun *r);

/**
 * Copies the shared time grid.
 *
 * # Safety
 * `r` must be a live run handle; `buf` must hold `len` doubles.
 */
LfsimStatus lfsim_run_times(const LfsimRun *r, double *buf, uintptr_t len);

/**
 * Copies follower states, row-major over `grid_len x state_dim`.
 *
 * # Safety
 * `r` must be a live run handle; `buf` must hold `len` doubles.
 */
LfsimStatus lfsim_run_states(const LfsimRun *r, uintptr_t follower, double *buf, uintptr_t len);

/**
 * Copies follower inputs, row-major over `grid_len x input_dim`.
 *
 * # Safety
 * `r` must be a live run handle; `buf` must hold `len` doubles.
 */
LfsimStatus lfsim_run_inputs(const LfsimRun *r, uintptr_t follower, double *buf, uintptr_t len);

/**
 * Copies one follower's per-epoch arrival errors.
 *
 * # Safety
 * `r` must be a live run handle; `buf` must hold `len` doubles.
 */
LfsimStatus lfsim_run_arrival_errors(const LfsimRun *r,
                                     uintptr_t follower,
                                     double *buf,
                                     uintptr_t len);

/**
 * Largest arrival error over all followers and epochs.
 *
 * # Safety
 * `r` must be a live run handle; `out` must be a valid pointer.
 */
LfsimStatus lfsim_run_max_arrival_error(const LfsimRun *r, double *out);

/**
 * Largest absolute physical input over all followers and epochs.
 *
 * # Safety
 * `r` must be a live run handle; `out` must be a valid pointer.
 */
LfsimStatus lfsim_run_max_abs_input(const LfsimRun *r, double *out);

/**
 * Writes the trajectory CSV of a finished run.
 *
 * # Safety
 * `r` must be a live run handle; `path` a NUL-terminated string.
 */
LfsimStatus lfsim_run_write_csv(const LfsimRun *r, const char *path);

/**
 * Writes the per-epoch metrics summary of a finished run.
 *
 * # Safety
 * `r` must be a live run handle; `path` a NUL-terminated string.
 */
LfsimStatus lfsim_run_write_metrics(const LfsimRun *r, const char *path);

/**
 * Designs the arrival-time plan of a scenario whose schedule requests it.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be a valid pointer.
 */
LfsimStatus lfsim_design(const LfsimScenario *s, LfsimPlan **out);

/**
 * # Safety
 * `p` must be a handle from `lfsim_design`, not yet freed, or NULL.
 */
void lfsim_plan_free(LfsimPlan *p);

/**
 * Number of designed arrival instants (including the start time zero).
 *
 * # Safety
 * `p` must be a live plan handle.
 */
uintptr_t lfsim_plan_len(const LfsimPlan *p);

/**
 * Copies the cumulative arrival times.
 *
 * # Safety
 * `p` must be a live plan handle; `buf` must hold `len` doubles.
 */
LfsimStatus lfsim_plan_times(const LfsimPlan *p, double *buf, uintptr_t len);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LFSIM_H */
