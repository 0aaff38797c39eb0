#ifndef WCLMMSE_H
#define WCLMMSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum WclStatus {
  WCL_STATUS_OK = 0,
  WCL_STATUS_NULL_POINTER = 1,
  WCL_STATUS_INVALID_ARGUMENT = 2,
  WCL_STATUS_DIMENSION = 3,
  WCL_STATUS_SINGULAR = 4,
  WCL_STATUS_RANK = 5,
  WCL_STATUS_NON_FINITE = 6,
  WCL_STATUS_IO = 7,
  WCL_STATUS_PANIC = 8,
} WclStatus;

/*
 Filter families accepted by [`wcl_filter_build`].
 */
typedef enum WclFilterKind {
  WCL_FILTER_KIND_WIENER = 0,
  WCL_FILTER_KIND_LRW = 1,
  WCL_FILTER_KIND_CSW = 2,
  WCL_FILTER_KIND_JPC = 3,
  WCL_FILTER_KIND_LSJPC = 4,
  WCL_FILTER_KIND_JPC_SIMPLIFIED = 5,
  WCL_FILTER_KIND_LSJPC_SIMPLIFIED = 6,
} WclFilterKind;

/*
 Opaque filter matrix with its construction metadata.
 */
typedef struct WclFilter WclFilter;

/*
 Opaque joint covariance model.
 */
typedef struct WclModel WclModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the most recent failure on this thread, or NULL. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *wcl_last_error_message(void);

/*
 Synthetic model with geometric spectrum `a·r^i` and a seeded random basis.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum WclStatus wcl_model_synthetic(uintptr_t n,
                                   uintptr_t m,
                                   double a,
                                   double r,
                                   uint64_t seed,
                                   struct WclModel **out);

/*
 Model from a `(n+m)×(n+m)` row-major joint covariance with X in the
 first `n` coordinates.

 # Safety
 `c_z` must point to `dim*dim` readable doubles and `out` to writable
 storage for one handle.
 */
enum WclStatus wcl_model_from_joint(const double *c_z,
                                    uintptr_t dim,
                                    uintptr_t n,
                                    struct WclModel **out);

/*
 Loads a model file written by the `wclmmse synth` command.

 # Safety
 `path` must be a NUL-terminated string and `out` writable.
 */
enum WclStatus wcl_model_load(const char *path, struct WclModel **out);

/*
 # Safety
 `model` must be NULL or a handle from this library not yet freed.
 */
void wcl_model_free(struct WclModel *model);

/*
 Output dimension N, or 0 for NULL.

 # Safety
 `model` must be NULL or a live handle.
 */
uintptr_t wcl_model_n(const struct WclModel *model);

/*
 Input dimension M, or 0 for NULL.

 # Safety
 `model` must be NULL or a live handle.
 */
uintptr_t wcl_model_m(const struct WclModel *model);

/*
 Condition number of the input covariance.

 # Safety
 `model` must be a live handle and `out` writable.
 */
enum WclStatus wcl_condition_number(const struct WclModel *model, double *out);

/*
 Builds a filter of kind `kind` (a [`WclFilterKind`] value). `l` is
 ignored for Wiener.

 # Safety
 `model` must be a live handle and `out` writable.
 */
enum WclStatus wcl_filter_build(const struct WclModel *model,
                                int32_t kind,
                                uintptr_t l,
                                struct WclFilter **out);

/*
 # Safety
 `filter` must be NULL or a handle from this library not yet freed.
 */
void wcl_filter_free(struct WclFilter *filter);

/*
 Filter rows (N), or 0 for NULL.

 # Safety
 `filter` must be NULL or a live handle.
 */
uintptr_t wcl_filter_rows(const struct WclFilter *filter);

/*
 Filter columns (M), or 0 for NULL.

 # Safety
 `filter` must be NULL or a live handle.
 */
uintptr_t wcl_filter_cols(const struct WclFilter *filter);

/*
 Largest linear system solved while building the filter.

 # Safety
 `filter` must be NULL or a live handle.
 */
uintptr_t wcl_filter_max_inverse_dim(const struct WclFilter *filter);

/*
 Copies the filter matrix row-major into `out`, which holds `len` doubles.

 # Safety
 `filter` must be a live handle and `out` must point to `len` writable
 doubles.
 */
enum WclStatus wcl_filter_copy_matrix(const struct WclFilter *filter, double *out, uintptr_t len);

/*
 Mean squared error of `filter` under `model`.

 # Safety
 Both handles must be live and `out` writable.
 */
enum WclStatus wcl_analytic_mse(const struct WclModel *model,
                                const struct WclFilter *filter,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WCLMMSE_H */
