#ifndef ALSIM_H
#define ALSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes. Zero is success.
 */
typedef enum {
  ALSIM_STATUS_OK = 0,
  /**
   * A null pointer, invalid UTF-8 or an out-of-range index.
   */
  ALSIM_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The configuration could not be parsed or failed validation.
   */
  ALSIM_STATUS_INVALID_CONFIG = 2,
  ALSIM_STATUS_IO = 3,
  ALSIM_STATUS_CORPUS = 4,
  ALSIM_STATUS_STRATEGY = 5,
  ALSIM_STATUS_STORE = 6,
  /**
   * One or more seed runs failed or were interrupted; they can be resumed.
   */
  ALSIM_STATUS_RUN_FAILED = 7,
  ALSIM_STATUS_INTERNAL = 8,
} AlsimStatus;

/**
 * A validated experiment configuration.
 */
typedef struct AlsimConfig AlsimConfig;

/**
 * Per-seed and aggregated learning curves of a finished experiment.
 */
typedef struct AlsimExperiment AlsimExperiment;

/**
 * One point of a per-seed learning curve.
 */
typedef struct {
  uint64_t step_index;
  uint64_t labeled_count;
  double dev_macro_f1;
  double test_macro_f1;
  double dev_accuracy;
  double test_accuracy;
} AlsimCurvePoint;

/**
 * Cross-seed statistics of one metric at one step.
 */
typedef struct {
  uint64_t step_index;
  uint64_t labeled_count;
  double mean;
  double min;
  double max;
  double std;
} AlsimAggregatePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *alsim_last_error(void);

/**
 * Library version as a static string.
 */
const char *alsim_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void alsim_string_free(char *s);

/**
 * Loads and validates a configuration file (includes are followed).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
AlsimStatus alsim_config_load(const char *path, AlsimConfig **out_config);

/**
 * Applies a `section.key=value` override in place. On failure the
 * configuration is unchanged.
 *
 * # Safety
 * `config` must be a live handle; `assignment` a NUL-terminated string.
 */
AlsimStatus alsim_config_set(AlsimConfig *config, const char *assignment);

/**
 * Hex digest identifying the experiment (every section except tracking).
 *
 * # Safety
 * `config` must be a live handle; `out_hex` must be writable. The string is
 * released with [`alsim_string_free`].
 */
AlsimStatus alsim_config_fingerprint(const AlsimConfig *config, char **out_hex);

/**
 * # Safety
 * `config` must be null or a live handle, freed at most once.
 */
void alsim_config_free(AlsimConfig *config);

/**
 * Runs (or loads from the store) the configured experiment with the built-in
 * strategies. `store_dir` may be null to use the configured store.
 *
 * # Safety
 * `config` must be a live handle; `store_dir` null or NUL-terminated;
 * `out_experiment` writable.
 */
AlsimStatus alsim_experiment_run(const AlsimConfig *config,
                                 const char *store_dir,
                                 bool resume,
                                 AlsimExperiment **out_experiment);

/**
 * # Safety
 * `experiment` must be null or a live handle, freed at most once.
 */
void alsim_experiment_free(AlsimExperiment *experiment);

/**
 * Run id of the aggregate, owned by the handle.
 *
 * # Safety
 * `experiment` must be a live handle.
 */
const char *alsim_experiment_aggregate_run_id(const AlsimExperiment *experiment);

/**
 * # Safety
 * `experiment` must be a live handle; `out_count` writable.
 */
AlsimStatus alsim_experiment_seed_count(const AlsimExperiment *experiment, size_t *out_count);

/**
 * Seed value and number of curve points of seed run `seed_index`.
 *
 * # Safety
 * `experiment` must be a live handle; out-parameters writable.
 */
AlsimStatus alsim_experiment_seed(const AlsimExperiment *experiment,
                                  size_t seed_index,
                                  uint64_t *out_seed,
                                  size_t *out_points);

/**
 * # Safety
 * `experiment` must be a live handle; `out_point` writable.
 */
AlsimStatus alsim_experiment_point(const AlsimExperiment *experiment,
                                   size_t seed_index,
                                   size_t point_index,
                                   AlsimCurvePoint *out_point);

/**
 * # Safety
 * `experiment` must be a live handle; `out_count` writable.
 */
AlsimStatus alsim_experiment_aggregate_count(const AlsimExperiment *experiment, size_t *out_count);

/**
 * Statistics of `metric` (`dev_macro_f1`, `test_macro_f1`, `dev_accuracy`
 * or `test_accuracy`) at aggregate step `index`.
 *
 * # Safety
 * `experiment` must be a live handle; `metric` NUL-terminated; `out_point`
 * writable.
 */
AlsimStatus alsim_experiment_aggregate_point(const AlsimExperiment *experiment,
                                             size_t index,
                                             const char *metric,
                                             AlsimAggregatePoint *out_point);

/**
 * Best minus second-best probability of one document.
 *
 * # Safety
 * `probs` must point to `len` readable doubles; `out_margin` writable.
 */
AlsimStatus alsim_margin_score(const double *probs, size_t len, double *out_margin);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALSIM_H */
