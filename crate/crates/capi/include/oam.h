/* C interface to the OAM toolkit: vortex-pancake spectra and inverse design. */

#pragma once

/* Generated with cbindgen:0.27.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum OamStatus {
  OAM_STATUS_OK = 0,
  // A required pointer argument was NULL.
  OAM_STATUS_NULL_POINTER = 1,
  // An argument was outside its documented domain.
  OAM_STATUS_INVALID_ARGUMENT = 2,
  // The requested design has no solution for these parameters.
  OAM_STATUS_INFEASIBLE = 3,
  // An iterative numerical procedure failed.
  OAM_STATUS_NUMERICAL_FAILURE = 4,
  // A string argument was not valid UTF-8.
  OAM_STATUS_INVALID_UTF8 = 5,
  // An output buffer was too small; the required length was written to
  // the length out-parameter.
  OAM_STATUS_BUFFER_TOO_SMALL = 6,
  // File or serialization failure.
  OAM_STATUS_IO_FAILURE = 7,
} OamStatus;

// A vortex pancake: Gaussian host with nested single-charge dislocations.
// Opaque; create with `oam_pancake_new` or one of the designers, release
// with `oam_pancake_free`.
typedef struct OamPancake OamPancake;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the message of the most recent error on this thread into `buf`
// (NUL-terminated, truncated to `cap`). Returns the full message length
// in bytes, excluding the terminator. With a NULL `buf` only the length
// is reported.
size_t oam_last_error_message(char *buf, size_t cap);

// Library version as a static NUL-terminated string; never freed.
const char *oam_version(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be a pointer previously returned by an `oam_*` function that
// documents `oam_string_free` as its deallocator, and not yet freed.
void oam_string_free(char *s);

// Creates a pancake with host waist `w0`, amplitude `a0_re + i a0_im` and
// no vortices.
//
// # Safety
// `out` must point to writable storage for one pointer.
enum OamStatus oam_pancake_new(double w0, double a0_re, double a0_im, struct OamPancake **out);

// Appends one single-charge vortex at polar position `(rho, phi)`.
//
// # Safety
// `p` must be a live pancake handle.
enum OamStatus oam_pancake_add_vortex(struct OamPancake *p, double rho, double phi);

// Number of nested vortices; 0 for a NULL handle.
//
// # Safety
// `p` must be NULL or a live pancake handle.
size_t oam_pancake_vortex_count(const struct OamPancake *p);

// Parses the JSON document `{"w0":..., "a0":[re,im], "vortices":[[rho,phi],...]}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum OamStatus oam_pancake_from_json(const char *json, struct OamPancake **out);

// Serializes the pancake to JSON; release with `oam_string_free`.
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum OamStatus oam_pancake_to_json(const struct OamPancake *p, char **out);

// Releases a pancake handle; NULL is a no-op.
//
// # Safety
// `p` must be NULL or a live handle, and must not be used afterwards.
void oam_pancake_free(struct OamPancake *p);

// Closed-form spectrum of the pancake.
//
// Writes `C_n` and `P_n` for `n = 0..=N` into the caller's arrays (either
// may be NULL to skip it) and the mean OAM per photon into `mean_oam_out`
// (may be NULL). `*len_out` always receives `N + 1`; when `cap` is too
// small nothing else is written and the call returns `BufferTooSmall`.
//
// # Safety
// Arrays must provide `cap` writable elements; `len_out` must be writable.
enum OamStatus oam_pancake_spectrum(const struct OamPancake *p,
                                    double *cn_out,
                                    double *pn_out,
                                    size_t cap,
                                    size_t *len_out,
                                    double *mean_oam_out);

// Rotational-Doppler sideband comb of the pancake at prism speed `omega`:
// offsets `2 n omega` and weights for the occupied `n`.
//
// # Safety
// Arrays must provide `cap` writable elements; `len_out` must be writable.
enum OamStatus oam_pancake_sidebands(const struct OamPancake *p,
                                     double omega,
                                     int64_t *n_out,
                                     double *delta_omega_out,
                                     double *weight_out,
                                     size_t cap,
                                     size_t *len_out);

// Two-vortex design with equal populations `P_0 = P_1 = P_2 = 1/3`;
// `rho1` picks the point on the feasible family.
//
// # Safety
// `out` must be writable.
enum OamStatus oam_design_equal_populations_n2(double w0, double rho1, struct OamPancake **out);

// Two-vortex design with `P_0 = 0` and the requested `P_2`.
//
// # Safety
// `out` must be writable.
enum OamStatus oam_design_suppress_p0(double w0, double p2, struct OamPancake **out);

// Two-vortex design with `P_1 = 0` and the requested `P_2`.
//
// # Safety
// `out` must be writable.
enum OamStatus oam_design_suppress_p1(double w0, double p2, struct OamPancake **out);

// Asymptotic `P_2 -> 0` design with the far vortex at `rho2_cut`
// (at least `10 w0`). The achieved `P_2` leak is written to
// `achieved_p2_out` when non-NULL.
//
// # Safety
// `out` must be writable; `achieved_p2_out` NULL or writable.
enum OamStatus oam_design_suppress_p2(double w0,
                                      double p1,
                                      double rho2_cut,
                                      struct OamPancake **out,
                                      double *achieved_p2_out);

// Runs the multistart inverse solver on a target JSON document
// `{"N":..., "tolerance":..., "weights":{"0":...}}` and returns the result
// as JSON (release with `oam_string_free`). A result is returned even when
// the residual misses the tolerance; check its `converged` flag.
//
// # Safety
// `target_json` must be NUL-terminated; `result_json_out` writable.
enum OamStatus oam_design_general_json(const char *target_json,
                                       size_t starts,
                                       uint64_t seed,
                                       size_t max_iter,
                                       char **result_json_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
