#ifndef KGLAB_H
#define KGLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KgMainTermMode {
  KG_MAIN_TERM_MODE_EXACT_SHELL = 0,
  KG_MAIN_TERM_MODE_PAPER = 1,
} KgMainTermMode;

typedef enum KgStatus {
  KG_STATUS_OK = 0,
  KG_STATUS_INVALID_ARGUMENT = 1,
  KG_STATUS_PARSE = 2,
  KG_STATUS_PRECISION_RANGE = 3,
  KG_STATUS_RATIONAL_SHIFT = 4,
  KG_STATUS_IO = 5,
  KG_STATUS_NULL_POINTER = 6,
  KG_STATUS_PANIC = 7,
} KgStatus;

/**
 * Opaque approximation function `ψ`.
 */
typedef struct KgPsi KgPsi;

/**
 * Opaque irrational shift `γ`.
 */
typedef struct KgShift KgShift;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *kg_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kg_version(void);

/**
 * # Safety
 * `s` must be a string returned by this library, or null.
 */
void kg_string_free(char *s);

/**
 * Parses `sqrt:n`, `surd:a,b,r,d`, `cf:...` or `liouville:k`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum KgStatus kg_shift_parse(const char *spec, struct KgShift **out);

/**
 * # Safety
 * `shift` must come from `kg_shift_parse`, or be null.
 */
void kg_shift_free(struct KgShift *shift);

/**
 * Parses `pow:c,a`, `const:v`, `table:PATH`, `clamp:SPEC` or `window:u,v:SPEC`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum KgStatus kg_psi_parse(const char *spec, struct KgPsi **out);

/**
 * # Safety
 * `psi` must come from `kg_psi_parse`, or be null.
 */
void kg_psi_free(struct KgPsi *psi);

/**
 * `N(α, Q, γ)` for the point `α` drawn by trial `trial` of `seed`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum KgStatus kg_count(const struct KgShift *shift,
                       const struct KgPsi *psi,
                       uint64_t q_max,
                       uint64_t seed,
                       uint64_t trial,
                       uint32_t scale_bits,
                       uint64_t *out);

/**
 * Main term `Ψ(Q)`; `exact` receives the exact rational `p/q` when non-null.
 *
 * # Safety
 * `psi` must be live; `out` must be writable; `exact` may be null.
 */
enum KgStatus kg_main_term(const struct KgPsi *psi,
                           uint64_t q_max,
                           enum KgMainTermMode mode,
                           double *out,
                           char **exact);

/**
 * `λ₂(A_q ∩ A_r)` with `γ` truncated to `scale_bits`.
 *
 * # Safety
 * Handles must be live; `out` must be writable; `exact` may be null.
 */
enum KgStatus kg_overlap_2d(int64_t q1,
                            int64_t q2,
                            int64_t r1,
                            int64_t r2,
                            const struct KgPsi *psi,
                            const struct KgShift *shift,
                            uint32_t scale_bits,
                            double *out,
                            char **exact);

/**
 * Variance over the box `|q| ≤ Q`; `ratio` receives variance / Ψ (NaN when
 * Ψ = 0) and `json` the full report when non-null.
 *
 * # Safety
 * Handles must be live; `ratio` must be writable; `json` may be null.
 */
enum KgStatus kg_variance(const struct KgPsi *psi,
                          const struct KgShift *shift,
                          uint64_t q_max,
                          uint32_t scale_bits,
                          double *ratio,
                          char **json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KGLAB_H */
