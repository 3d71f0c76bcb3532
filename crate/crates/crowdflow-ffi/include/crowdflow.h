#ifndef CROWDFLOW_H
#define CROWDFLOW_H

/* Generated by cbindgen from crowdflow-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_ARGUMENT = 1,
  CF_STATUS_INVALID_UTF8 = 2,
  CF_STATUS_INVALID_CONFIG = 3,
  CF_STATUS_IO = 4,
  /**
   * Numerical failure (CFL violation, non-finite density, solver).
   */
  CF_STATUS_NUMERIC = 5,
  /**
   * Output buffer too small.
   */
  CF_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * A panic was caught at the boundary.
   */
  CF_STATUS_PANIC = 7,
} CfStatus;

/**
 * Scenario handle (opaque).
 */
typedef struct CfScenario CfScenario;

/**
 * Simulation handle (opaque).
 */
typedef struct CfSimulation CfSimulation;

/**
 * Message for the most recent error on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *cf_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *cf_version(void);

/**
 * Load and validate a scenario TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must point to writable
 * storage for one pointer.
 */
CfStatus cf_scenario_load_file(const char *path, CfScenario **out);

/**
 * Parse and validate a scenario from TOML text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must point to writable
 * storage for one pointer.
 */
CfStatus cf_scenario_parse(const char *text, CfScenario **out);

/**
 * Release a scenario handle.
 *
 * # Safety
 * `scenario` must come from a `cf_scenario_*` constructor and not have
 * been freed already; NULL is ignored.
 */
void cf_scenario_free(CfScenario *scenario);

/**
 * Build the mesh and fields and create a simulation at t = 0.
 *
 * # Safety
 * `scenario` must be a live scenario handle; `out` must point to writable
 * storage for one pointer.
 */
CfStatus cf_simulation_create(const CfScenario *scenario, CfSimulation **out);

/**
 * Release a simulation handle.
 *
 * # Safety
 * `sim` must come from `cf_simulation_create` and not have been freed
 * already; NULL is ignored.
 */
void cf_simulation_free(CfSimulation *sim);

/**
 * Advance one step; writes the step size into `dt_out` when non-NULL.
 *
 * # Safety
 * `sim` must be a live simulation handle.
 */
CfStatus cf_simulation_step(CfSimulation *sim, double *dt_out);

/**
 * Run until `t_end` (in crossing-time units), stopping early once the
 * crowd has fully drained.
 *
 * # Safety
 * `sim` must be a live simulation handle.
 */
CfStatus cf_simulation_advance(CfSimulation *sim, double t_end);

/**
 * Current time in crossing-time units.
 *
 * # Safety
 * `sim` must be a live simulation handle.
 */
double cf_simulation_time(const CfSimulation *sim);

/**
 * Number of mesh elements.
 *
 * # Safety
 * `sim` must be a live simulation handle.
 */
size_t cf_simulation_element_count(const CfSimulation *sim);

/**
 * Pedestrians currently on the walkway.
 *
 * # Safety
 * `sim` must be a live simulation handle.
 */
double cf_simulation_walkway_count(const CfSimulation *sim);

/**
 * Pedestrians that have walked out (cumulative egress).
 *
 * # Safety
 * `sim` must be a live simulation handle.
 */
double cf_simulation_egressed_count(const CfSimulation *sim);

/**
 * Pedestrians still waiting in the reservoir (0 without an entrance).
 *
 * # Safety
 * `sim` must be a live simulation handle.
 */
double cf_simulation_reservoir_count(const CfSimulation *sim);

/**
 * Pedestrians inside the entering region.
 *
 * # Safety
 * `sim` must be a live simulation handle.
 */
double cf_simulation_buffer_count(const CfSimulation *sim);

/**
 * Scaled egress time, or +inf if the crowd has not fully left yet.
 *
 * # Safety
 * `sim` must be a live simulation handle.
 */
double cf_simulation_egress_time(const CfSimulation *sim);

/**
 * Copy the per-element dimensional pedestrian density (ped/m^2) into
 * `buf`. `len` must be at least the element count.
 *
 * # Safety
 * `sim` must be a live simulation handle and `buf` writable for `len`
 * doubles.
 */
CfStatus cf_simulation_density(const CfSimulation *sim, double *buf, size_t len);

/**
 * Copy the element centroids as interleaved (x, y) pairs in scaled units.
 * `len` must be at least twice the element count.
 *
 * # Safety
 * `sim` must be a live simulation handle and `buf` writable for `len`
 * doubles.
 */
CfStatus cf_simulation_centroids(const CfSimulation *sim, double *buf, size_t len);

/**
 * One-shot pipeline: load a scenario, run it to its configured end, write
 * all artifacts into `out_dir` (same layout as the CLI `run` command).
 *
 * # Safety
 * `config_path` and `out_dir` must be NUL-terminated strings.
 */
CfStatus cf_run_scenario(const char *config_path, const char *out_dir);

#endif  /* CROWDFLOW_H */
