#ifndef GENUS2_H
#define GENUS2_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Genus2Status {
  GENUS2_STATUS_OK = 0,
  GENUS2_STATUS_NULL_POINTER = 1,
  GENUS2_STATUS_INVALID_ARGUMENT = 2,
  GENUS2_STATUS_THETA_DOMAIN = 3,
  GENUS2_STATUS_QUADRATURE = 4,
  GENUS2_STATUS_ROOT_FINDING = 5,
  GENUS2_STATUS_MESH = 6,
  GENUS2_STATUS_EIGENSOLVER = 7,
  GENUS2_STATUS_NUMERICAL = 8,
  GENUS2_STATUS_BUFFER_TOO_SMALL = 9,
  GENUS2_STATUS_PANIC = 10,
} Genus2Status;

// Eigenvalues of the merged eight-sector spectrum at one angle.
typedef struct Genus2Spectrum Genus2Spectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL, or
// 0 when no error has been recorded.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t genus2_last_error(char *buf, size_t len);

// The four half-line integrals `A, B, C, D` at `theta` into `values[4]`,
// with error estimates into `errors[4]` (which may be null).
//
// # Safety
// `values` must point to 4 writable doubles; `errors` likewise or be null.
enum Genus2Status genus2_integrals(double theta, double tol, double *values, double *errors);

// The two critical angles where the period system degenerates.
//
// # Safety
// `theta1` and `theta2` must be valid for writes.
enum Genus2Status genus2_critical_angles(double tol_root, double *theta1, double *theta2);

// Numerical nullity of the real 6x6 period system at `theta`.
//
// # Safety
// `nullity` must be valid for writes.
enum Genus2Status genus2_nullity(double theta, double tol_rank, size_t *nullity);

// Solves all eight sectors at `theta`. `k` eigenvalues per sector, mesh
// size `h`; with `richardson` nonzero the values are extrapolated from
// meshes `h` and `h/2`.
//
// # Safety
// `out` must be valid for writes. The handle must be released with
// [`genus2_spectrum_free`].
enum Genus2Status genus2_spectrum_new(double theta,
                                      double h,
                                      size_t k,
                                      int32_t richardson,
                                      struct Genus2Spectrum **out);

// # Safety
// `handle` must come from [`genus2_spectrum_new`] and not be used afterwards.
void genus2_spectrum_free(struct Genus2Spectrum *handle);

// Index and nullity (eigenvalues below 2, and within the cluster
// tolerance of 2).
//
// # Safety
// `handle` must be a live spectrum handle; `ind` and `nul` valid for writes.
enum Genus2Status genus2_spectrum_counts(const struct Genus2Spectrum *handle,
                                         size_t *ind,
                                         size_t *nul);

// Smallest positive eigenvalue.
//
// # Safety
// `handle` must be a live spectrum handle; `value` valid for writes.
enum Genus2Status genus2_spectrum_lambda1(const struct Genus2Spectrum *handle, double *value);

// Copies the merged ascending eigenvalues into `buf`. `count` receives the
// total number; if `len` is smaller the call fails with
// `BufferTooSmall` after filling `count`.
//
// # Safety
// `handle` must be a live spectrum handle; `count` valid for writes; `buf`
// must point to `len` writable doubles or be null when `len` is 0.
enum Genus2Status genus2_spectrum_eigenvalues(const struct Genus2Spectrum *handle,
                                              double *buf,
                                              size_t len,
                                              size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENUS2_H */
