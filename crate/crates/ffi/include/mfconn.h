#ifndef MFCONN_H
#define MFCONN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum MfcStatus {
  MFC_STATUS_OK = 0,
  MFC_STATUS_NULL_POINTER = 1,
  MFC_STATUS_INVALID_ARGUMENT = 2,
  MFC_STATUS_SHAPE = 3,
  MFC_STATUS_NON_FINITE = 4,
  MFC_STATUS_IO = 5,
  MFC_STATUS_MALFORMED_CHECKPOINT = 6,
  MFC_STATUS_VERSION_MISMATCH = 7,
  MFC_STATUS_CHECKPOINT_SHAPE = 8,
  MFC_STATUS_PANIC = 9,
} MfcStatus;

/**
 * Opaque two-layer network.
 */
typedef struct MfcTwoLayer MfcTwoLayer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread (empty after a success).
 * Valid until the next call into the library on this thread.
 */
const char *mfc_last_error(void);

/**
 * Checkpoint format version written and accepted by this build.
 */
uint64_t mfc_checkpoint_version(void);

/**
 * Fresh network with `n` neurons, `aᵢ ~ Unif[-1, 1]` and `wᵢ ~ N(0, I/d)`.
 * Activation codes: 0 sigmoid, 1 tanh, 2 relu, 3 identity.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum MfcStatus mfc_two_layer_init(size_t n,
                                  size_t d,
                                  size_t out_dim,
                                  uint32_t activation_code,
                                  uint64_t seed,
                                  struct MfcTwoLayer **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `h` must be null or a handle from this library that was not freed yet.
 */
void mfc_two_layer_free(struct MfcTwoLayer *h);

/**
 * Load a two-layer JSON checkpoint.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum MfcStatus mfc_two_layer_load(const char *path, struct MfcTwoLayer **out);

/**
 * Save as a JSON checkpoint recording `seed` and `step`.
 *
 * # Safety
 * `h` must be a live handle and `path` a NUL-terminated string.
 */
enum MfcStatus mfc_two_layer_save(const struct MfcTwoLayer *h,
                                  const char *path,
                                  uint64_t seed,
                                  uint64_t step);

/**
 * Write the width, input dimension and output dimension. Any pointer may
 * be null to skip that value.
 *
 * # Safety
 * `h` must be a live handle; non-null outputs must be writable.
 */
enum MfcStatus mfc_two_layer_shape(const struct MfcTwoLayer *h,
                                   size_t *n,
                                   size_t *d,
                                   size_t *out_dim);

/**
 * Predictions for `count` row-major inputs of length `d`, written
 * row-major into `out` (`count × out_dim` values).
 *
 * # Safety
 * `x` must hold `count·d` values and `out` room for `count·out_dim`.
 */
enum MfcStatus mfc_two_layer_predict(const struct MfcTwoLayer *h,
                                     const double *x,
                                     size_t count,
                                     double *out);

/**
 * Mean loss over `count` samples. Loss codes: 0 square, 1 cross-entropy.
 *
 * # Safety
 * `xs` must hold `count·d` values, `ys` `count·out_dim`, `out_loss` writable.
 */
enum MfcStatus mfc_two_layer_loss(const struct MfcTwoLayer *h,
                                  const double *xs,
                                  const double *ys,
                                  size_t count,
                                  uint32_t loss_code,
                                  double *out_loss);

/**
 * One SGD step in place with step size `step` (the update is
 * `θᵢ -= step · N · ∇θᵢ` of the batch-mean loss). Writes the batch loss
 * before the step to `out_loss` if non-null. On failure `h` is unchanged.
 *
 * # Safety
 * `h` must be a live handle; `xs`/`ys` must hold `batch` samples.
 */
enum MfcStatus mfc_two_layer_sgd_step(struct MfcTwoLayer *h,
                                      const double *xs,
                                      const double *ys,
                                      size_t batch,
                                      double step,
                                      uint32_t loss_code,
                                      double *out_loss);

/**
 * New handle holding the sub-network of the first `kept` neurons, with
 * output weights rescaled by `N/kept`.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum MfcStatus mfc_two_layer_dropout(const struct MfcTwoLayer *h,
                                     size_t kept,
                                     struct MfcTwoLayer **out);

/**
 * Profile the loss along the piecewise-linear path from `a` to `b` with
 * `points` grid points per segment, writing the largest loss seen to
 * `out_max` and the number of segments to `out_segments` (either may be
 * null).
 *
 * # Safety
 * Handles must be live; `xs`/`ys` must hold `count` samples.
 */
enum MfcStatus mfc_path_max_loss(const struct MfcTwoLayer *a,
                                 const struct MfcTwoLayer *b,
                                 const double *xs,
                                 const double *ys,
                                 size_t count,
                                 uint32_t loss_code,
                                 size_t points,
                                 double *out_max,
                                 size_t *out_segments);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MFCONN_H */
