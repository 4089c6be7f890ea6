#ifndef SCS_H
#define SCS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScsStatus {
  SCS_STATUS_OK = 0,
  SCS_STATUS_NULL_POINTER = 1,
  SCS_STATUS_INVALID_ARGUMENT = 2,
  SCS_STATUS_PARSE_ERROR = 3,
  SCS_STATUS_SOLVER_ERROR = 4,
  SCS_STATUS_BUFFER_TOO_SMALL = 5,
  SCS_STATUS_PANIC = 6,
} ScsStatus;

typedef enum ScsFormat {
  /**
   * SMPS for `.cor`/`.core` paths, native otherwise.
   */
  SCS_FORMAT_AUTO = 0,
  SCS_FORMAT_SMPS = 1,
  SCS_FORMAT_NATIVE = 2,
} ScsFormat;

typedef enum ScsTermination {
  SCS_TERMINATION_CONVERGED = 0,
  SCS_TERMINATION_MAX_ITER_REACHED = 1,
  SCS_TERMINATION_UNIQUE_FEASIBLE_POINT = 2,
  SCS_TERMINATION_STALLED = 3,
} ScsTermination;

/**
 * Opaque problem handle.
 */
typedef struct ScsProblem ScsProblem;

/**
 * Opaque solve result handle.
 */
typedef struct ScsResult ScsResult;

/**
 * Solver parameters; obtain defaults from [`scs_params_default`].
 * Fields left out here keep their library defaults.
 */
typedef struct ScsSolverParams {
  double eps;
  double m1;
  double m2;
  double eta1;
  double eta2;
  double gamma;
  double delta0;
  double delta_max;
  /**
   * Non-positive means "derive from a pilot sample".
   */
  double kappa;
  double kappa_eps;
  uint64_t max_iter;
  uint64_t max_sample;
  uint64_t seed;
  /**
   * Non-zero solves on the full finite support.
   */
  int32_t full_support;
} ScsSolverParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The
 * pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *scs_last_error(void);

struct ScsSolverParams scs_params_default(void);

/**
 * Loads a problem from a native file or the core file of an SMPS triple.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ScsStatus scs_problem_load(const char *path, enum ScsFormat format, struct ScsProblem **out);

/**
 * Parses a problem from native-format text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ScsStatus scs_problem_parse_native(const char *text, struct ScsProblem **out);

/**
 * First- and second-stage dimensions.
 *
 * # Safety
 * `problem` must come from this library; `n1` and `n2` may be null.
 */
enum ScsStatus scs_problem_dims(const struct ScsProblem *problem, size_t *n1, size_t *n2);

/**
 * Releases a problem. Null is ignored.
 *
 * # Safety
 * `problem` must come from this library and not be used afterwards.
 */
void scs_problem_free(struct ScsProblem *problem);

/**
 * Runs SCS. `params` may be null for defaults.
 *
 * # Safety
 * `problem` must come from this library and `out` be a valid pointer.
 */
enum ScsStatus scs_solve(const struct ScsProblem *problem,
                         const struct ScsSolverParams *params,
                         struct ScsResult **out);

/**
 * Exact objective at `x` over the full finite support.
 *
 * # Safety
 * `x` must point to `len` doubles and `value` be a valid pointer.
 */
enum ScsStatus scs_true_objective(const struct ScsProblem *problem,
                                  const double *x,
                                  size_t len,
                                  double *value);

/**
 * In-sample objective at the final incumbent.
 *
 * # Safety
 * `result` must come from this library and `value` be a valid pointer.
 */
enum ScsStatus scs_result_value(const struct ScsResult *result, double *value);

/**
 * Copies the final incumbent into `buf`. With a null `buf` or too small
 * `len`, only `*needed` is set.
 *
 * # Safety
 * `buf` must point to `len` writable doubles unless null; `needed` may be
 * null.
 */
enum ScsStatus scs_result_x(const struct ScsResult *result,
                            double *buf,
                            size_t len,
                            size_t *needed);

/**
 * Number of iterations run and how the loop ended.
 *
 * # Safety
 * `result` must come from this library; outputs may be null.
 */
enum ScsStatus scs_result_summary(const struct ScsResult *result,
                                  size_t *iterations,
                                  enum ScsTermination *termination);

/**
 * Writes the iteration history as CSV.
 *
 * # Safety
 * `result` must come from this library and `path` be a NUL-terminated
 * string.
 */
enum ScsStatus scs_result_write_csv(const struct ScsResult *result, const char *path);

/**
 * Releases a result. Null is ignored.
 *
 * # Safety
 * `result` must come from this library and not be used afterwards.
 */
void scs_result_free(struct ScsResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCS_H */
