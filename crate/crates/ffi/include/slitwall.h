#ifndef SLITWALL_H
#define SLITWALL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SwStatus {
  SW_STATUS_OK = 0,
  SW_STATUS_NULL_POINTER = 1,
  SW_STATUS_INVALID_ARGUMENT = 2,
  SW_STATUS_CONFIG = 3,
  SW_STATUS_GRID_TOO_SMALL = 4,
  SW_STATUS_GRID_TOO_COARSE = 5,
  SW_STATUS_NUMERICAL = 6,
  SW_STATUS_IO = 7,
  SW_STATUS_INTERNAL = 8,
  SW_STATUS_BUFFER_TOO_SMALL = 9,
  SW_STATUS_PANIC = 10,
} SwStatus;

/**
 * Opaque result of running a scenario's pipeline.
 */
typedef struct SwBranchPair SwBranchPair;

/**
 * Opaque validated scenario.
 */
typedef struct SwScenario SwScenario;

/**
 * Opaque parameter-sweep result.
 */
typedef struct SwSweepResult SwSweepResult;

/**
 * Opaque single-particle state on a grid.
 */
typedef struct SwWaveFunction SwWaveFunction;

typedef struct SwVisibility {
  double visibility;
  double phase_alpha;
  double applied_k;
} SwVisibility;

typedef struct SwKennard {
  double sigma_q;
  double sigma_p;
  double product;
  /**
   * 0 satisfied, 1 violated, 2 moments unresolved.
   */
  int32_t status;
} SwKennard;

typedef struct SwSweepRow {
  double param;
  double sigma_q;
  double delta_p_support;
  double uncertainty_product;
  double visibility;
  double accuracy;
  double accuracy_exact;
  /**
   * 0 ok, 1 moments unresolved, 2 Kennard violated, 3 failed.
   */
  int32_t status;
} SwSweepRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static nul-terminated string.
 */
const char *sw_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next `sw_*` call on the same thread.
 */
const char *sw_last_error_message(void);

/**
 * Position-space Gaussian `exp(-(x-c)²/4σ² + i·chirp·(x-c)²/2)` on a grid
 * of `n_points` samples over `length`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SwStatus sw_wavefunction_gaussian(double length,
                                       size_t n_points,
                                       double center,
                                       double sigma,
                                       double chirp,
                                       struct SwWaveFunction **out);

/**
 * Builds any library state from its JSON description, for example
 * `{"kind": "top_hat_momentum", "width": 1.9}`.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid handle slot.
 */
enum SwStatus sw_wavefunction_from_json(double length,
                                        size_t n_points,
                                        const char *json,
                                        struct SwWaveFunction **out);

/**
 * # Safety
 * `wf` must be null or a handle from this library not yet freed.
 */
void sw_wavefunction_free(struct SwWaveFunction *wf);

/**
 * Number of grid samples.
 *
 * # Safety
 * `wf` must be a live handle.
 */
size_t sw_wavefunction_len(const struct SwWaveFunction *wf);

/**
 * # Safety
 * `wf` must be a live handle and `out` writable.
 */
enum SwStatus sw_wavefunction_visibility(const struct SwWaveFunction *wf,
                                         double k,
                                         struct SwVisibility *out);

/**
 * # Safety
 * `wf` must be a live handle and `out` writable.
 */
enum SwStatus sw_wavefunction_kennard(const struct SwWaveFunction *wf, struct SwKennard *out);

/**
 * Reads and validates a scenario file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid handle slot.
 */
enum SwStatus sw_scenario_load(const char *path, struct SwScenario **out);

/**
 * Parses and validates scenario JSON text.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid handle slot.
 */
enum SwStatus sw_scenario_from_json(const char *json, struct SwScenario **out);

/**
 * Replaces the Monte Carlo seed.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum SwStatus sw_scenario_set_seed(struct SwScenario *scenario, uint64_t seed);

/**
 * # Safety
 * `scenario` must be null or a live handle.
 */
void sw_scenario_free(struct SwScenario *scenario);

/**
 * Runs free flight, slits, kicks and the final flight to the screen.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid handle slot.
 */
enum SwStatus sw_scenario_run(const struct SwScenario *scenario, struct SwBranchPair **out);

/**
 * # Safety
 * `pair` must be null or a live handle.
 */
void sw_branch_pair_free(struct SwBranchPair *pair);

/**
 * Visibility of the initial wall state at the kick actually applied.
 *
 * # Safety
 * `pair` must be a live handle and `out` writable.
 */
enum SwStatus sw_branch_pair_visibility(const struct SwBranchPair *pair, struct SwVisibility *out);

/**
 * Normalized screen density, one value per position sample.
 *
 * # Safety
 * `pair` must be a live handle, `buf` valid for `len` values, `needed`
 * null or writable.
 */
enum SwStatus sw_branch_pair_screen(const struct SwBranchPair *pair,
                                    double *buf,
                                    size_t len,
                                    size_t *needed);

/**
 * Wall momentum density conditioned on the particle landing at `q`.
 *
 * # Safety
 * As for [`sw_branch_pair_screen`].
 */
enum SwStatus sw_branch_pair_conditional(const struct SwBranchPair *pair,
                                         double q,
                                         double *buf,
                                         size_t len,
                                         size_t *needed);

/**
 * Runs the scenario's configured sweep.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid handle slot.
 */
enum SwStatus sw_sweep_run(const struct SwScenario *scenario, struct SwSweepResult **out);

/**
 * # Safety
 * `result` must be a live handle.
 */
size_t sw_sweep_len(const struct SwSweepResult *result);

/**
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
enum SwStatus sw_sweep_row(const struct SwSweepResult *result,
                           size_t index,
                           struct SwSweepRow *out);

/**
 * Writes `sweep.csv` (with its metadata line) into `dir`.
 *
 * # Safety
 * `result` must be a live handle and `dir` a nul-terminated string.
 */
enum SwStatus sw_sweep_write_csv(const struct SwSweepResult *result, const char *dir);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
void sw_sweep_free(struct SwSweepResult *result);

/**
 * Recoil speed `2h/(Mλ)` in m/s of a target of `mass` kg that reflects a
 * photon of `wavelength` m.
 *
 * # Safety
 * `out` must be writable.
 */
enum SwStatus sw_recoil_velocity(double wavelength, double mass, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLITWALL_H */
