#ifndef TWIRLKIT_H
#define TWIRLKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Status code returned by every fallible call. Zero means success.
enum tk_status
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  TK_STATUS_OK = 0,
  TK_STATUS_NULL_POINTER = 1,
  TK_STATUS_INVALID_UTF8 = 2,
  TK_STATUS_PARSE = 3,
  TK_STATUS_VALIDATION = 4,
  TK_STATUS_DIMENSION = 5,
  TK_STATUS_UNSUPPORTED = 6,
  TK_STATUS_CAP_EXCEEDED = 7,
  TK_STATUS_DEGENERATE = 8,
  TK_STATUS_CONFIG = 9,
  TK_STATUS_IO = 10,
  TK_STATUS_UNDEFINED_DISTANCE = 11,
  TK_STATUS_PANIC = 12,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum tk_status tk_status;
#else
typedef int32_t tk_status;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// How rotation-layer noise is twirled. Passed to C functions as `int32_t`.
enum tk_twirl_mode
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  TK_TWIRL_MODE_NONE = 0,
  TK_TWIRL_MODE_FULL = 1,
  TK_TWIRL_MODE_KSPARSE = 2,
  TK_TWIRL_MODE_ANALYTIC_FULL = 3,
  TK_TWIRL_MODE_ANALYTIC_KSPARSE = 4,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum tk_twirl_mode tk_twirl_mode;
#else
typedef int32_t tk_twirl_mode;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// Report kinds accepted by `tk_run_report`, passed as `int32_t`.
enum tk_report
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  TK_REPORT_TWIRL_VERIFY = 0,
  TK_REPORT_BIAS_SCAN = 1,
  TK_REPORT_GADGET_SCAN = 2,
  TK_REPORT_OVERHEAD = 3,
  TK_REPORT_WN_BOUND = 4,
  TK_REPORT_FIGS2 = 5,
  TK_REPORT_BUDGET = 6,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum tk_report tk_report;
#else
typedef int32_t tk_report;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

typedef struct tk_channel tk_channel;

typedef struct tk_circuit tk_circuit;

typedef struct tk_pauli tk_pauli;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version; a static string owned by the library.
const char *tk_version(void);

// Message of the last failed call on this thread, or NULL. Valid until the next
// failing call on the same thread.
const char *tk_last_error_message(void);

// Frees a string returned through an `out` parameter. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void tk_string_free(char *s);

// Parses a Pauli string such as `"-iXYZ"`.
//
// # Safety
// `s` must be NUL-terminated; `out` must be writable.
tk_status tk_pauli_parse(const char *s, struct tk_pauli **out);

// # Safety
// `p` must be NULL or a live handle.
void tk_pauli_free(struct tk_pauli *p);

// # Safety
// Pointers must be valid.
tk_status tk_pauli_num_qubits(const struct tk_pauli *p, size_t *out);

// # Safety
// Pointers must be valid.
tk_status tk_pauli_weight(const struct tk_pauli *p, size_t *out);

// Canonical string form; free the result with `tk_string_free`.
//
// # Safety
// Pointers must be valid.
tk_status tk_pauli_to_string(const struct tk_pauli *p, char **out);

// Product `a b` with exact phase.
//
// # Safety
// Pointers must be valid.
tk_status tk_pauli_mul(const struct tk_pauli *a, const struct tk_pauli *b, struct tk_pauli **out);

// # Safety
// Pointers must be valid.
tk_status tk_pauli_commutes(const struct tk_pauli *a, const struct tk_pauli *b, bool *out);

// Pauli noise `(px, py, pz)` on one qubit of an `n`-qubit register.
//
// # Safety
// `out` must be writable.
tk_status tk_channel_single_qubit(size_t n,
                                  size_t qubit,
                                  double px,
                                  double py,
                                  double pz,
                                  struct tk_channel **out);

// Global white noise with error probability `p_err`.
//
// # Safety
// `out` must be writable.
tk_status tk_channel_white_noise(size_t n, double p_err, struct tk_channel **out);

// # Safety
// `json` must be NUL-terminated; `out` must be writable.
tk_status tk_channel_from_json(const char *json, struct tk_channel **out);

// Free the result with `tk_string_free`.
//
// # Safety
// Pointers must be valid.
tk_status tk_channel_to_json(const struct tk_channel *ch, char **out);

// # Safety
// `ch` must be NULL or a live handle.
void tk_channel_free(struct tk_channel *ch);

// # Safety
// Pointers must be valid.
tk_status tk_channel_num_qubits(const struct tk_channel *ch, size_t *out);

// Total probability of a non-identity error.
//
// # Safety
// Pointers must be valid.
tk_status tk_channel_p_err(const struct tk_channel *ch, double *out);

// # Safety
// Pointers must be valid.
tk_status tk_channel_pauli_fidelity(const struct tk_channel *ch,
                                    const struct tk_pauli *p,
                                    double *out);

// 2-norm distance of the normalized error distribution from uniform.
//
// # Safety
// Pointers must be valid.
tk_status tk_channel_distance_v(const struct tk_channel *ch, double *out);

// # Safety
// Pointers must be valid.
tk_status tk_channel_unitarity(const struct tk_channel *ch, double *out);

// # Safety
// Pointers must be valid.
tk_status tk_channel_avg_noise_strength(const struct tk_channel *ch, double *out);

// Exact twirl over the Cliffords that commute with Z on qubit 0.
//
// # Safety
// Pointers must be valid.
tk_status tk_channel_twirl_rz(const struct tk_channel *ch, struct tk_channel **out);

// Exact twirl by the k-sparse gadget sampler; the noise must act on qubit 0.
//
// # Safety
// Pointers must be valid.
tk_status tk_channel_twirl_ksparse(const struct tk_channel *ch, size_t k, struct tk_channel **out);

// Noiseless Trotter circuit for a Hamiltonian model given as JSON,
// e.g. `{"kind":"Heisenberg1D","l":6}`.
//
// # Safety
// `model_json` must be NUL-terminated; `out` must be writable.
tk_status tk_circuit_trotter(const char *model_json,
                             size_t steps,
                             double dt,
                             bool clifford_sim,
                             struct tk_circuit **out);

// Copy of `c` with single-qubit noise of total rate `p_tot / L` on every rotation,
// split in the ratio `(wx, wy, wz)`. `k` is read only by the sparse modes.
//
// # Safety
// Pointers must be valid.
tk_status tk_circuit_with_total_error(const struct tk_circuit *c,
                                      double p_tot,
                                      double wx,
                                      double wy,
                                      double wz,
                                      int32_t mode,
                                      size_t k,
                                      double gadget_ratio,
                                      struct tk_circuit **out);

// # Safety
// `c` must be NULL or a live handle.
void tk_circuit_free(struct tk_circuit *c);

// # Safety
// Pointers must be valid.
tk_status tk_circuit_num_qubits(const struct tk_circuit *c, size_t *out);

// # Safety
// Pointers must be valid.
tk_status tk_circuit_num_rotations(const struct tk_circuit *c, size_t *out);

// Optimal rescaling coefficient `R`.
//
// # Safety
// Pointers must be valid.
tk_status tk_circuit_rescale_coefficient(const struct tk_circuit *c, double *out);

// Effective Pauli fidelity of observable `p`, with sampled twirl layers averaged exactly.
//
// # Safety
// Pointers must be valid.
tk_status tk_circuit_effective_fidelity(const struct tk_circuit *c,
                                        const struct tk_pauli *p,
                                        double *out);

// Mean rescaled bias over `num_paulis` random observables, and its standard error.
//
// # Safety
// Pointers must be valid.
tk_status tk_circuit_average_bias(const struct tk_circuit *c,
                                  size_t num_paulis,
                                  uint64_t seed,
                                  double *mean,
                                  double *stderr);

// # Safety
// `out` must be writable.
tk_status tk_overhead_rescaling(double p_err, size_t l, size_t n, double *out);

// # Safety
// `out` must be writable.
tk_status tk_overhead_pec(double p_err, size_t l, double *out);

// # Safety
// `out` must be writable.
tk_status tk_overhead_lower_bound(double p_err, size_t l, size_t n, double *out);

// Runs a report from its JSON config, like the command-line tool. `seed` may be NULL
// to use the config's seed; `threads == 0` picks the default. Both outputs must be
// freed with `tk_string_free`.
//
// # Safety
// `config_json` must be NUL-terminated; `csv_out` and `manifest_out` must be writable.
tk_status tk_run_report(int32_t report,
                        const char *config_json,
                        const uint64_t *seed,
                        size_t threads,
                        char **csv_out,
                        char **manifest_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWIRLKIT_H */
