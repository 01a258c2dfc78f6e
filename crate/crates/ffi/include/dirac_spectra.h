#ifndef DIRAC_SPECTRA_H
#define DIRAC_SPECTRA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum DsStatus {
  DS_OK = 0,
  // A required pointer argument was null.
  DS_ERR_NULL_POINTER = 1,
  // An argument was malformed or out of range.
  DS_ERR_INVALID_ARGUMENT = 2,
  // The request is outside the mathematical domain of the routine.
  DS_ERR_DOMAIN = 3,
  // An iterative solver did not reach its tolerance.
  DS_ERR_NO_CONVERGENCE = 4,
  DS_ERR_INTERNAL = 5,
  // A Rust panic was caught at the boundary.
  DS_ERR_PANIC = 6,
} DsStatus;

// Outcome of a hypothesis check.
typedef enum DsVerdict {
  DS_HOLDS = 0,
  DS_FAILS = 1,
  DS_NOT_CERTIFIABLE = 2,
} DsVerdict;

// Dirac matrices `α_1..α_d, β` in dimension `d`.
typedef struct DsDiracRep DsDiracRep;

// Radial channel problem on a staggered logarithmic grid.
typedef struct DsRadialProblem DsRadialProblem;

// Result of a refinement study.
typedef struct DsSpectrum DsSpectrum;

typedef struct DsCheckResult {
  enum DsVerdict verdict;
  double lhs;
  double bound;
  double margin;
} DsCheckResult;

// One base-resolution eigenvalue of a refinement study.
typedef struct DsEigenvalue {
  double lambda;
  double residual;
  double localization;
  bool persistent;
  bool in_gap;
} DsEigenvalue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on the calling thread, or null if there was none.
//
// The pointer stays valid until the next failing call on the same thread. Do not free it.
const char *ds_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ds_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a pointer obtained from this library that has not been freed.
void ds_string_free(char *s);

// Builds the representation in dimension `d` (3..=9) and verifies it in exact arithmetic.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle pointer.
enum DsStatus ds_dirac_rep_new(size_t d, struct DsDiracRep **out);

// # Safety
// `rep` must be null or a handle from [`ds_dirac_rep_new`] that has not been freed.
void ds_dirac_rep_free(struct DsDiracRep *rep);

// Writes the spinor dimension `N` and whether every Clifford relation held exactly.
//
// # Safety
// `rep` must be a live handle; `size` and `exact_ok` must be valid writable pointers.
enum DsStatus ds_dirac_rep_info(const struct DsDiracRep *rep, size_t *size, bool *exact_ok);

// Copies one matrix in row-major order: `index < d` selects `α_{index+1}`, `index == d` selects `β`.
//
// `re` and `im` must each hold `len >= N*N` doubles.
//
// # Safety
// `rep` must be a live handle; `re` and `im` must point to `len` writable doubles.
enum DsStatus ds_dirac_rep_matrix(const struct DsDiracRep *rep,
                                  size_t index,
                                  double *re,
                                  double *im,
                                  size_t len);

// Checks the smallness hypothesis of `theorem` for the constants `eps[0..5]`.
//
// A NaN entry means "not supplied"; `INFINITY` is accepted.
//
// # Safety
// `theorem` must be a NUL-terminated string, `eps` must point to 5 doubles and `out` must be writable.
enum DsStatus ds_check_theorem(const char *theorem,
                               size_t d,
                               double m,
                               const double *eps,
                               struct DsCheckResult *out);

// Critical coupling of a named family under `theorem`. `method` may be null (automatic choice),
// `"closed-form"` or `"bisection"`.
//
// # Safety
// `theorem` and `family` must be NUL-terminated strings, `method` null or NUL-terminated, `out` writable.
enum DsStatus ds_critical_coupling(const char *theorem,
                                   const char *family,
                                   size_t d,
                                   double m,
                                   const char *method,
                                   double *out);

// Closed-form Coulomb level for `ν < 0`, `|ν| < |κ|`, `m > 0`.
//
// # Safety
// `out` must be a valid writable pointer.
enum DsStatus ds_sommerfeld(double nu, int32_t kappa, uint32_t n_r, double m, double *out);

// Radial problem for `V = νI + μβ + iδβ(α·x/|x|)` in channel `κ`, on a staggered grid with `n` cells
// over `[r_min, r_max]`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle pointer.
enum DsStatus ds_radial_problem_new(double nu,
                                    double mu,
                                    double delta,
                                    double m,
                                    int32_t kappa,
                                    double r_min,
                                    double r_max,
                                    size_t n,
                                    struct DsRadialProblem **out);

// # Safety
// `p` must be null or a handle from [`ds_radial_problem_new`] that has not been freed.
void ds_radial_problem_free(struct DsRadialProblem *p);

// Runs the grid- and domain-doubling study on `[lo, hi]`. Passing NaN for both bounds selects the
// spectral gap (shrunk by a small margin), or `(-1, 1)` when `m = 0`.
//
// # Safety
// `p` must be a live handle and `out` a valid pointer to writable storage for one handle pointer.
enum DsStatus ds_refinement_study(const struct DsRadialProblem *p,
                                  double lo,
                                  double hi,
                                  struct DsSpectrum **out);

// # Safety
// `s` must be null or a handle from [`ds_refinement_study`] that has not been freed.
void ds_spectrum_free(struct DsSpectrum *s);

// Number of base-resolution eigenvalues in the study window.
//
// # Safety
// `s` must be a live handle and `len` a valid writable pointer.
enum DsStatus ds_spectrum_len(const struct DsSpectrum *s, size_t *len);

// Copies eigenvalue `i` (ascending order).
//
// # Safety
// `s` must be a live handle and `out` a valid writable pointer.
enum DsStatus ds_spectrum_get(const struct DsSpectrum *s, size_t i, struct DsEigenvalue *out);

// Serializes the whole study as JSON. Release the string with [`ds_string_free`].
//
// # Safety
// `s` must be a live handle and `out` a valid pointer to writable storage for one string pointer.
enum DsStatus ds_spectrum_to_json(const struct DsSpectrum *s, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIRAC_SPECTRA_H */
