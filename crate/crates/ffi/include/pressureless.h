#ifndef PRESSURELESS_H
#define PRESSURELESS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_INVALID_UTF8 = 2,
  PL_STATUS_INVALID_DATA = 3,
  PL_STATUS_INVALID_ARGUMENT = 4,
  PL_STATUS_EXTRACTION = 5,
  PL_STATUS_BUFFER_TOO_SMALL = 6,
  PL_STATUS_INTERNAL = 7,
  PL_STATUS_PANIC = 8,
} PlStatus;

typedef enum PlMode {
  PL_MODE_UNDAMPED = 0,
  PL_MODE_DAMPED = 1,
  PL_MODE_SCALED = 2,
} PlMode;

typedef enum PlRegime {
  PL_REGIME_REGULAR = 0,
  PL_REGIME_CLUSTER = 1,
  PL_REGIME_VACUUM = 2,
} PlRegime;

/**
 * Opaque solver handle.
 */
typedef struct PlSolver PlSolver;

typedef struct PlSample {
  double x;
  double t;
  double m;
  double q;
  double u;
  double u_left;
  double u_right;
  enum PlRegime regime;
} PlSample;

/**
 * An atom has `lo == hi` and `density == 0`.
 */
typedef struct PlPiece {
  bool is_atom;
  double lo;
  double hi;
  double mass;
  double density;
  double velocity;
} PlPiece;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a solver from `{"pieces": [...]}` JSON. `tau` is ignored for
 * `PL_MODE_UNDAMPED`. On success `*out` owns a new handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PlStatus pl_solver_new(const char *json, enum PlMode mode, double tau, struct PlSolver **out);

/**
 * Releases a handle. Null is accepted.
 *
 * # Safety
 * `handle` must come from `pl_solver_new` and not be used afterwards.
 */
void pl_solver_free(struct PlSolver *handle);

/**
 * Mass, momentum, velocity and regime at one point.
 *
 * # Safety
 * `handle` must be live and `out` valid.
 */
enum PlStatus pl_solver_sample(const struct PlSolver *handle,
                               double x,
                               double t,
                               struct PlSample *out);

/**
 * Samples `n` points at one time into `out[0..n]`.
 *
 * # Safety
 * `xs` and `out` must hold `n` elements.
 */
enum PlStatus pl_solver_sample_many(const struct PlSolver *handle,
                                    const double *xs,
                                    size_t n,
                                    double t,
                                    struct PlSample *out);

/**
 * Cumulative mass `m(x, t)`.
 *
 * # Safety
 * `handle` must be live and `out` valid.
 */
enum PlStatus pl_solver_mass(const struct PlSolver *handle, double x, double t, double *out);

/**
 * Cumulative momentum `q(x, t)`.
 *
 * # Safety
 * `handle` must be live and `out` valid.
 */
enum PlStatus pl_solver_momentum(const struct PlSolver *handle, double x, double t, double *out);

/**
 * Extracts the measure at time `t` as atoms and blocks, seeding the search
 * with `cells` uniform cells. Writes up to `capacity` pieces and stores the
 * total count in `*count`; returns `PL_STATUS_BUFFER_TOO_SMALL` if it did
 * not fit. Pass `capacity == 0` to query the size.
 *
 * # Safety
 * `out` must hold `capacity` elements (it may be null when `capacity` is
 * 0) and `count` must be valid.
 */
enum PlStatus pl_solver_extract(const struct PlSolver *handle,
                                double t,
                                size_t cells,
                                struct PlPiece *out,
                                size_t capacity,
                                size_t *count);

/**
 * The spread `a(t)` of a mode.
 *
 * # Safety
 * `out` must be valid.
 */
enum PlStatus pl_spread(enum PlMode mode, double tau, double t, double *out);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`) and returns its full length.
 *
 * # Safety
 * `buf` must hold `len` bytes, or be null with `len == 0`.
 */
size_t pl_last_error_message(char *buf, size_t len);

/**
 * Static NUL-terminated version string.
 */
const char *pl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRESSURELESS_H */
