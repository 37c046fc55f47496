#ifndef COALESCE_H
#define COALESCE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define COALESCE_OK 0

#define COALESCE_ERR_SINGULARITY_HIT 1

#define COALESCE_ERR_STEP_FAILURE 2

#define COALESCE_ERR_DIVISION_NEAR_ZERO 3

#define COALESCE_ERR_WINDOW_TOO_SHORT 4

#define COALESCE_ERR_NO_WAVE_DETECTED 5

#define COALESCE_ERR_PATH_TOO_CLOSE 6

#define COALESCE_ERR_QUADRATURE_FAILURE 7

#define COALESCE_ERR_BRANCH_CUT_HIT 8

#define COALESCE_ERR_SEED_FAILURE 9

#define COALESCE_ERR_CORRECTOR_DIVERGENCE 10

#define COALESCE_ERR_DOMAIN 11

#define COALESCE_ERR_OVERFLOW 12

#define COALESCE_ERR_NON_CONVERGENCE 13

#define COALESCE_ERR_BRANCH_MISMATCH 14

#define COALESCE_ERR_ILL_CONDITIONED 15

#define COALESCE_ERR_WRONG_REGIME 16

#define COALESCE_ERR_NO_STOKES_CROSSING 17

#define COALESCE_ERR_INVALID_SPEC 18

#define COALESCE_ERR_IO 19

#define COALESCE_ERR_NULL_POINTER 100

#define COALESCE_ERR_PANIC 101

#define COALESCE_REGIME_SINGLE 0

#define COALESCE_REGIME_SEPARATED 1

#define COALESCE_REGIME_COALESCING 2

// Forcing family and parameters.
typedef struct CoalesceForcing CoalesceForcing;

// Late-order coefficient sequence of an inner problem.
typedef struct CoalesceSequence CoalesceSequence;

// ODE solution sampled on the positive real axis.
typedef struct CoalesceTrajectory CoalesceTrajectory;

typedef struct CoalesceComplex {
  double re;
  double im;
} CoalesceComplex;

typedef struct CoalesceAmplitude {
  int32_t regime;
  double amplitude;
  // Coefficient of −1/ε in the exponent.
  double exponent_rate;
  // Coefficient of −1/√ε in the exponent.
  double secondary_rate;
  double prefactor;
  double phase;
} CoalesceAmplitude;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL, or
// 0 when no error has been recorded.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t coalesce_last_error_message(char *buf, size_t len);

// Single singularity of strength num/den at w = −a.
//
// # Safety
// `out_handle` must be a valid pointer.
int32_t coalesce_forcing_single(double a,
                                int64_t num,
                                int64_t den,
                                struct CoalesceForcing **out_handle);

// Two singularities at −a1 and −a2.
//
// # Safety
// `out_handle` must be a valid pointer.
int32_t coalesce_forcing_separated(double a1,
                                   double a2,
                                   int64_t num1,
                                   int64_t den1,
                                   int64_t num2,
                                   int64_t den2,
                                   struct CoalesceForcing **out_handle);

// Two singularities at −a ± β ε^{ℓ/m}.
//
// # Safety
// `out_handle` must be a valid pointer.
int32_t coalesce_forcing_coalescing(double a,
                                    double beta,
                                    int64_t num1,
                                    int64_t den1,
                                    int64_t num2,
                                    int64_t den2,
                                    struct CoalesceForcing **out_handle);

// q_s(w) at the given ε.
//
// # Safety
// `f` must come from a `coalesce_forcing_*` constructor; `q` must be valid.
int32_t coalesce_forcing_q(const struct CoalesceForcing *f,
                           double epsilon,
                           struct CoalesceComplex w,
                           struct CoalesceComplex *q);

// # Safety
// `f` must be null or a handle not yet freed.
void coalesce_forcing_free(struct CoalesceForcing *f);

// Integrates the ODE from w0 to w_end with tolerance tol.
//
// # Safety
// `f` must be a live forcing handle; `out_handle` must be valid.
int32_t coalesce_integrate(const struct CoalesceForcing *f,
                           double epsilon,
                           double w0,
                           double w_end,
                           double tol,
                           struct CoalesceTrajectory **out_handle);

// Number of stored samples, or 0 for a null handle.
//
// # Safety
// `t` must be null or a live trajectory handle.
size_t coalesce_trajectory_len(const struct CoalesceTrajectory *t);

// # Safety
// `t` must be a live trajectory handle; `w` and `phi` must be valid.
int32_t coalesce_trajectory_sample(const struct CoalesceTrajectory *t,
                                   size_t i,
                                   double *w,
                                   struct CoalesceComplex *phi);

// Wave amplitude and wavelength over [lo, hi]; pass NaN for both to use the
// last 40% of the trajectory.
//
// # Safety
// `t` must be a live trajectory handle; `amplitude` and `wavelength` must be valid.
int32_t coalesce_trajectory_measure(const struct CoalesceTrajectory *t,
                                    double lo,
                                    double hi,
                                    double *amplitude,
                                    double *wavelength);

// # Safety
// `t` must be null or a handle not yet freed.
void coalesce_trajectory_free(struct CoalesceTrajectory *t);

// Inner coefficients A_0..A_{n_max} for one singularity of strength num/den.
//
// # Safety
// `out_handle` must be valid.
int32_t coalesce_sequence_separated(int64_t num,
                                    int64_t den,
                                    size_t n_max,
                                    struct CoalesceSequence **out_handle);

// Inner coefficients for a coalescing pair; ℓ and m follow from σ₁ + σ₂.
//
// # Safety
// `out_handle` must be valid.
int32_t coalesce_sequence_coalescing(int64_t num1,
                                     int64_t den1,
                                     int64_t num2,
                                     int64_t den2,
                                     double a,
                                     double beta,
                                     size_t n_max,
                                     struct CoalesceSequence **out_handle);

// # Safety
// `s` must be null or a live sequence handle.
size_t coalesce_sequence_len(const struct CoalesceSequence *s);

// ln A_n (principal imaginary part). Fails with COALESCE_ERR_DOMAIN when A_n = 0.
//
// # Safety
// `s` must be a live sequence handle; `value` must be valid.
int32_t coalesce_sequence_ln(const struct CoalesceSequence *s,
                             size_t n,
                             struct CoalesceComplex *value);

// # Safety
// `s` must be null or a handle not yet freed.
void coalesce_sequence_free(struct CoalesceSequence *s);

// Ω(σ) for a single singularity.
//
// # Safety
// `omega` must be valid.
int32_t coalesce_omega_separated(int64_t num, int64_t den, double *omega);

// Ω^cc and τ for a coalescing pair; n_max = 0 selects the default.
//
// # Safety
// `omega` and `tau` must be valid.
int32_t coalesce_omega_cc(int64_t num1,
                          int64_t den1,
                          int64_t num2,
                          int64_t den2,
                          double a,
                          double beta,
                          size_t n_max,
                          double *omega,
                          double *tau);

// Far-field single-singularity prediction.
//
// # Safety
// `result` must be valid.
int32_t coalesce_amp_single(double a,
                            int64_t num,
                            int64_t den,
                            double epsilon,
                            double omega,
                            struct CoalesceAmplitude *result);

// Far-field coalescing prediction; requires σ₁ + σ₂ = 1/3.
//
// # Safety
// `result` must be valid.
int32_t coalesce_amp_coalescing(double a,
                                double beta,
                                int64_t num1,
                                int64_t den1,
                                int64_t num2,
                                int64_t den2,
                                double epsilon,
                                double omega_cc,
                                struct CoalesceAmplitude *result);

// Magnitude of the coherent separated wave in the far field.
//
// # Safety
// `f` must be a live separated forcing handle; `amplitude` must be valid.
int32_t coalesce_amp_separated_total(const struct CoalesceForcing *f,
                                     double epsilon,
                                     double *amplitude);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COALESCE_H */
