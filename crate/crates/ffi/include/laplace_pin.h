#ifndef LAPLACE_PIN_H
#define LAPLACE_PIN_H

/* Generated with cbindgen:0.26.0 */

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum LpMinimiserKind {
  // Unconstrained bi-harmonic cubic through the boundary data.
  LP_MINIMISER_KIND_BI_HARMONIC = 0,
  // Affine profile for a free right end.
  LP_MINIMISER_KIND_LINEAR = 1,
  // Cubic on `[0, l]`, zero beyond.
  LP_MINIMISER_KIND_LEFT = 2,
  // Cubics on `[0, l]` and `[1 - r, 1]`, zero between.
  LP_MINIMISER_KIND_BOTH = 3,
} LpMinimiserKind;

// Result code of every fallible call; details via `lp_last_error_message`.
typedef enum LpStatus {
  LP_STATUS_OK = 0,
  LP_STATUS_NULL_POINTER = 1,
  // Argument outside the mathematical domain.
  LP_STATUS_DOMAIN = 2,
  // Exact enumeration beyond its size guard.
  LP_STATUS_CAPACITY = 3,
  LP_STATUS_NOT_POSITIVE_DEFINITE = 4,
  LP_STATUS_NO_SIGN_CHANGE = 5,
  // Output buffer shorter than the result; the required length is still reported.
  LP_STATUS_BUFFER_TOO_SMALL = 6,
  LP_STATUS_IO = 7,
  LP_STATUS_PARSE = 8,
  // Rust panic caught at the boundary.
  LP_STATUS_INTERNAL = 9,
} LpStatus;

// Deterministic heat-bath chain; the seed and replica fix the random stream.
typedef struct LpChain LpChain;

// Partition-function ratio `Z_{N,ε}/Z_N` as a polynomial in `ε`, by enumeration.
typedef struct LpRatio LpRatio;

// One minimiser of the rate function; `l` and `r` are zero when not used.
typedef struct LpMinimiser {
  enum LpMinimiserKind kind;
  double l;
  double r;
  // Bending energy `∫ h''²/2`.
  double energy;
} LpMinimiser;

// Heat-bath chain settings. Right data `(b, beta)` is ignored when `free_right` is set.
typedef struct LpChainConfig {
  size_t n;
  double a;
  double alpha;
  double b;
  double beta;
  bool free_right;
  double epsilon;
  uint64_t seed;
  // Stream index; chains sharing a seed with distinct replicas are independent.
  uint64_t replica;
  size_t sweeps;
  size_t burn_in;
  size_t thin;
  // Uniformly random site order instead of alternating sweep directions.
  bool random_scan;
  // Start with every free site pinned instead of at the discrete minimiser.
  bool pinned_start;
} LpChainConfig;

// Summary of one emitted chain state.
typedef struct LpSample {
  // Sweeps completed, including burn-in.
  size_t sweep;
  // `#{k ∈ 1..N : φ_k = 0} / N`.
  double contact_fraction;
  // `|P| / N`.
  double pin_fraction;
  // `max_k |φ_k| / N²`.
  double sup_abs_h;
} LpSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// NUL-terminated version of this library.
const char *lp_version(void);

// `log det Q_N` of the unpinned zero-boundary precision matrix, in closed form.
//
// # Safety
// `out` must be null or valid for one write.
enum LpStatus lp_log_det_closed_form(size_t n, double *out);

// `log Z_N(P)` with zero boundary data; `pins` lists `n_pins` sites in `1..=n-1`.
//
// # Safety
// `pins` must be null (only with `n_pins == 0`) or valid for `n_pins` reads; `out` valid for one write.
enum LpStatus lp_log_partition_zero(size_t n,
                                    const size_t *pins,
                                    size_t n_pins,
                                    double *out);

// Critical lengths of a segment with data `(a, α)` at reward `tau`, in increasing order.
//
// Writes up to two lengths and their branch indices (1 or 2) to `values[0..]`
// and `branches[0..]`, and their number to `count`. Infeasible lengths (above 1)
// are included.
//
// # Safety
// `values` and `branches` must be valid for two writes each, `count` for one.
enum LpStatus lp_critical_lengths(double tau,
                                  double a,
                                  double alpha,
                                  double *values,
                                  uint8_t *branches,
                                  size_t *count);

// Minimisers of the free-end rate function at reward `tau`.
//
// Writes `Σ_min` to `sigma_min` and the number of minimisers to `count`; the
// first `min(count, capacity)` minimisers go to `out`. Returns
// `BUFFER_TOO_SMALL` when `capacity < count`, after filling `out`.
//
// # Safety
// `out` must be valid for `capacity` writes (may be null when `capacity == 0`);
// `sigma_min` and `count` must be valid for one write each.
enum LpStatus lp_classify_free(double a,
                               double alpha,
                               double tau,
                               double *sigma_min,
                               struct LpMinimiser *out,
                               size_t capacity,
                               size_t *count);

// Enumerates the pinning sets of size `n` (at most 22) into a new handle.
//
// # Safety
// `out` must be valid for one write.
enum LpStatus lp_ratio_new(size_t n, struct LpRatio **out);

// `log(Z_{N,ε}/Z_N)`; zero at `ε = 0`.
//
// # Safety
// `handle` must come from `lp_ratio_new`; `out` must be valid for one write.
enum LpStatus lp_ratio_log(const struct LpRatio *handle, double epsilon, double *out);

// Expected pin density `E|P|/N` under the pinned measure.
//
// # Safety
// `handle` must come from `lp_ratio_new`; `out` must be valid for one write.
enum LpStatus lp_ratio_pin_density(const struct LpRatio *handle, double epsilon, double *out);

// Releases a ratio handle; null is ignored.
//
// # Safety
// `handle` must be null or come from `lp_ratio_new` and not be used afterwards.
void lp_ratio_free(struct LpRatio *handle);

// Defaults: zero Dirichlet data, 1000 sweeps, 100 burn-in, no thinning.
struct LpChainConfig lp_chain_config_default(size_t n, double epsilon, uint64_t seed);

// Validates `config` and starts a chain.
//
// # Safety
// `config` must be valid for one read, `out` for one write.
enum LpStatus lp_chain_new(const struct LpChainConfig *config, struct LpChain **out);

// Advances to the next emitted state. Sets `has_sample` to false once the
// configured sweeps are exhausted, leaving `sample` untouched.
//
// # Safety
// `handle` must come from `lp_chain_new`; `sample` and `has_sample` must be valid for one write.
enum LpStatus lp_chain_next(struct LpChain *handle, struct LpSample *sample, bool *has_sample);

// Copies the current heights `φ_{-1}, φ_0, …, φ_{N+1}` (`N + 3` values) into `buf`.
//
// Writes the required length to `len_out`; returns `BUFFER_TOO_SMALL` without
// copying when `len` is shorter.
//
// # Safety
// `handle` must come from `lp_chain_new`; `buf` must be valid for `len` writes,
// `len_out` for one write.
enum LpStatus lp_chain_field(struct LpChain *handle, double *buf, size_t len, size_t *len_out);

// Releases a chain handle; null is ignored.
//
// # Safety
// `handle` must be null or come from `lp_chain_new` and not be used afterwards.
void lp_chain_free(struct LpChain *handle);

// Copies the last error message of this thread into `buf` as a NUL-terminated string.
//
// Returns the message length in bytes, excluding the terminator; the copy is
// truncated when `len` is not larger than that. `buf` may be null to query the length.
//
// # Safety
// `buf` must be null or valid for `len` bytes of writes.
size_t lp_last_error_message(char *buf, size_t len);

// Static name of a status code, e.g. `"capacity"`.
const char *lp_status_name(enum LpStatus status);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LAPLACE_PIN_H */
