#ifndef MRL_H
#define MRL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum MrlStatus {
  MRL_STATUS_OK = 0,
  MRL_STATUS_NULL_POINTER = 1,
  MRL_STATUS_INVALID_ARGUMENT = 2,
  MRL_STATUS_PARSE = 3,
  MRL_STATUS_SINGULARITY = 4,
  MRL_STATUS_DOMAIN = 5,
  MRL_STATUS_UNSUPPORTED = 6,
  MRL_STATUS_QUADRATURE = 7,
  MRL_STATUS_TAIL_UNBOUNDED = 8,
  MRL_STATUS_RESOURCE = 9,
  MRL_STATUS_IO = 10,
  MRL_STATUS_BUFFER_TOO_SMALL = 11,
  MRL_STATUS_PANIC = 12,
} MrlStatus;

/*
 Opaque hazard model handle.
 */
typedef struct MrlModel MrlModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses a model spec such as `weibull:shape=2,scale=1`.

 # Safety
 `spec` must be a valid NUL-terminated string; `out` must be writable.
 */
enum MrlStatus mrl_model_parse(const char *spec, struct MrlModel **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `model` must come from `mrl_model_parse` and not be freed twice.
 */
void mrl_model_free(struct MrlModel *model);

/*
 Writes the canonical spec string into `buf` (NUL-terminated).
 `needed` receives the required size including the terminator.

 # Safety
 `buf` must hold `len` bytes (or be null with `len` 0); `needed` may be null.
 */
enum MrlStatus mrl_model_spec(const struct MrlModel *model, char *buf, size_t len, size_t *needed);

/*
 r(t).

 # Safety
 `model` is a live handle; `out` is writable.
 */
enum MrlStatus mrl_hazard(const struct MrlModel *model, double t, double *out);

/*
 Closed-form m(t); `Unsupported` when the model has none.

 # Safety
 `model` is a live handle; `out` is writable.
 */
enum MrlStatus mrl_mrl_closed_form(const struct MrlModel *model, double t, double *out);

/*
 m(t) by quadrature. `abs_error` may be null.

 # Safety
 `model` is a live handle; `value` is writable; `abs_error` is writable or null.
 */
enum MrlStatus mrl_mrl_quadrature(const struct MrlModel *model,
                                  double t,
                                  double tol,
                                  double *value,
                                  double *abs_error);

/*
 Partial sum Θ⁰(s) + ... + Θⁿ(s) at t.

 # Safety
 `model` is a live handle; `out` is writable.
 */
enum MrlStatus mrl_mrl_expansion(const struct MrlModel *model, double t, size_t n, double *out);

/*
 Writes Θ⁰(s)(t), ..., Θⁿ(s)(t) into `terms`, which must hold `n + 1` values.

 # Safety
 `model` is a live handle; `terms` holds `len` writable doubles.
 */
enum MrlStatus mrl_theta_terms(const struct MrlModel *model,
                               double t,
                               size_t n,
                               double *terms,
                               size_t len);

/*
 Message for the last failure on this thread, or null. Valid until the
 next failing call on the same thread.
 */
const char *mrl_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MRL_H */
