#ifndef SGQEI_H
#define SGQEI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define SGQEI_OK 0

#define SGQEI_ERR_NULL 1

#define SGQEI_ERR_DOMAIN 2

#define SGQEI_ERR_RANGE 3

#define SGQEI_ERR_INPUT 4

#define SGQEI_ERR_NUMERICAL 5

#define SGQEI_ERR_NEAR_NULL 6

#define SGQEI_ERR_CONFIG 7

#define SGQEI_ERR_IO 8

#define SGQEI_ERR_PANIC 9

#define SGQEI_VERDICT_SATISFIED 0

#define SGQEI_VERDICT_VIOLATED 1

#define SGQEI_VERDICT_INCONCLUSIVE 2

/**
 * Smearing function f(τ).
 */
typedef struct SgqeiSmearing SgqeiSmearing;

/**
 * State-dependent part W of the two-point function.
 */
typedef struct SgqeiState SgqeiState;

/**
 * Timelike worldline.
 */
typedef struct SgqeiWorldline SgqeiWorldline;

/**
 * Result of `sgqei_qei_verify`.
 */
typedef struct SgqeiQeiSummary {
  double k0;
  double kv;
  double kh;
  double energy;
  double sigma;
  int32_t verdict;
} SgqeiQeiSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message on this thread into `buf` (NUL-terminated, truncated to `len`).
 * Returns the full message length in bytes, or 0 if there is none.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
uintptr_t sgqei_last_error(char *buf, uintptr_t len);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t sgqei_worldline_new_static(struct SgqeiWorldline **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t sgqei_worldline_new_boosted(double eta, struct SgqeiWorldline **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t sgqei_worldline_new_accelerated(double a, struct SgqeiWorldline **out);

/**
 * # Safety
 * `p` must come from a `sgqei_worldline_new_*` call, or be null.
 */
void sgqei_worldline_free(struct SgqeiWorldline *p);

/**
 * amplitude · exp(−(τ−center)²/2σ²).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t sgqei_smearing_new_gaussian(double sigma,
                                    double center,
                                    double amplitude,
                                    struct SgqeiSmearing **out);

/**
 * Compactly supported bump of the given radius.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t sgqei_smearing_new_bump(double radius,
                                double center,
                                double amplitude,
                                struct SgqeiSmearing **out);

/**
 * # Safety
 * `p` must come from a `sgqei_smearing_new_*` call, or be null.
 */
void sgqei_smearing_free(struct SgqeiSmearing *p);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t sgqei_state_new_vacuum(struct SgqeiState **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t sgqei_state_new_thermal_window(double e0, double e1, double b, struct SgqeiState **out);

/**
 * # Safety
 * `p` must come from a `sgqei_state_new_*` call, or be null.
 */
void sgqei_state_free(struct SgqeiState *p);

/**
 * Free bound K₀ split into its straight and acceleration parts.
 *
 * # Safety
 * Handles must be live; out-pointers valid.
 */
int32_t sgqei_k0(const struct SgqeiWorldline *wl,
                 const struct SgqeiSmearing *f,
                 double *straight,
                 double *accel);

/**
 * Sets `*holds` to 1 if both collapse sums at n match their closed forms exactly, else 0.
 *
 * # Safety
 * `holds` must be a valid pointer.
 */
int32_t sgqei_identity_sums_hold(uint32_t n, int32_t *holds);

/**
 * Bound check with f² smearing and a Gaussian cutoff g of amplitude g0 and widths
 * (sigma0, sigma1). Orders ≤ max_order are estimated with `samples` draws from `seed`.
 *
 * # Safety
 * Handles must be live; `out` valid.
 */
int32_t sgqei_qei_verify(const struct SgqeiState *state,
                         const struct SgqeiWorldline *wl,
                         const struct SgqeiSmearing *f,
                         double beta_sq,
                         double g0,
                         double sigma0,
                         double sigma1,
                         uint32_t max_order,
                         uint64_t samples,
                         uint64_t seed,
                         struct SgqeiQeiSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SGQEI_H */
