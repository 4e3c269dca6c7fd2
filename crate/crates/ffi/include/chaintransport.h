/* Copyright 2026 The chaintransport Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef CHAINTRANSPORT_H
#define CHAINTRANSPORT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CtStatus {
  CT_STATUS_OK = 0,
  CT_STATUS_NULL_POINTER = 1,
  CT_STATUS_INVALID_ARGUMENT = 2,
  CT_STATUS_INVALID_STATE = 3,
  /**
   * Output buffer shorter than required.
   */
  CT_STATUS_BUFFER_TOO_SMALL = 4,
  CT_STATUS_SIZE_LIMIT = 5,
  CT_STATUS_ILL_CONDITIONED = 6,
  /**
   * Decomposition failure, defective spectrum, non-decaying mode or failed
   * internal check.
   */
  CT_STATUS_NUMERICAL = 7,
  CT_STATUS_UNCONVERGED = 8,
  /**
   * Rate formula evaluated at its pole.
   */
  CT_STATUS_POLE = 9,
  CT_STATUS_PANIC = 10,
} CtStatus;

/**
 * Initial-state family.
 */
typedef enum CtStateKind {
  CT_STATE_KIND_GAUSSIAN = 0,
  CT_STATE_KIND_LOCALIZED = 1,
  /**
   * Uniform over sites 1..N−1.
   */
  CT_STATE_KIND_FLAT = 2,
} CtStateKind;

/**
 * Opaque chain description.
 */
typedef struct CtChain CtChain;

/**
 * Opaque effective-Hamiltonian spectrum.
 */
typedef struct CtSpectrum CtSpectrum;

/**
 * Initial chain state. `center`, `width` and `momentum` are read for
 * Gaussians, `site` (1-based, site N touches the sink) for localized states.
 */
typedef struct CtInitialState {
  enum CtStateKind kind;
  double center;
  double width;
  double momentum;
  uint32_t site;
} CtInitialState;

/**
 * Superradiance diagnostics of an effective spectrum.
 */
typedef struct CtSuperradiance {
  double gamma_max;
  double gamma_avg_sub;
  /**
   * NaN when the sink rate is zero.
   */
  double normalized_gap;
  double pr_super;
  double pr_sub_avg;
} CtSuperradiance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a clean chain (no disorder). Energies and rates are in units of
 * an arbitrary energy scale; `hopping` is usually 1.
 */
enum CtStatus ct_chain_new(size_t n_sites,
                           double hopping,
                           double field_step,
                           double sink_rate,
                           double dephasing_rate,
                           struct CtChain **out);

/**
 * Releases a chain; null is ignored.
 */
void ct_chain_free(struct CtChain *chain);

/**
 * Draws realization `index` of the box disorder ensemble (width `width`,
 * seed `seed`). A zero width removes disorder.
 */
enum CtStatus ct_chain_set_disorder(struct CtChain *chain,
                                    double width,
                                    uint64_t seed,
                                    uint64_t index);

/**
 * Sets explicit site-energy offsets (length N); null clears them.
 */
enum CtStatus ct_chain_set_site_offsets(struct CtChain *chain, const double *offsets, size_t len);

enum CtStatus ct_chain_n_sites(const struct CtChain *chain, size_t *out);

/**
 * Average transfer time into the sink.
 */
enum CtStatus ct_transfer_time(const struct CtChain *chain,
                               const struct CtInitialState *state,
                               double *tau);

/**
 * Transfer time by direct time integration up to `t_max` (≤ 0 selects the
 * default). `error_estimate` may be null.
 */
enum CtStatus ct_transfer_time_integrated(const struct CtChain *chain,
                                          const struct CtInitialState *state,
                                          double t_max,
                                          double *tau,
                                          double *error_estimate);

/**
 * Populations at each of `n_times` sorted times, written row by row into
 * `out` (N+1 values per row, sink first). `out_len` must be at least
 * `n_times * (N + 1)`.
 */
enum CtStatus ct_propagate_populations(const struct CtChain *chain,
                                       const struct CtInitialState *state,
                                       const double *times,
                                       size_t n_times,
                                       double *out,
                                       size_t out_len);

/**
 * Sink coupling at the superradiant transition of this chain (its own
 * sink rate is ignored).
 */
enum CtStatus ct_locate_st(const struct CtChain *chain, double *gamma_st);

/**
 * Diagonalizes the effective non-Hermitian Hamiltonian.
 */
enum CtStatus ct_spectrum_new(const struct CtChain *chain, struct CtSpectrum **out);

void ct_spectrum_free(struct CtSpectrum *spectrum);

/**
 * Number of eigenstates (N); 0 for a null handle.
 */
size_t ct_spectrum_len(const struct CtSpectrum *spectrum);

/**
 * Complex eigenvalues E − iΓ/2 as separate real and imaginary arrays.
 */
enum CtStatus ct_spectrum_eigenvalues(const struct CtSpectrum *spectrum,
                                      double *re,
                                      double *im,
                                      size_t len);

/**
 * Decay widths Γ = −2 Im E.
 */
enum CtStatus ct_spectrum_widths(const struct CtSpectrum *spectrum, double *out, size_t len);

/**
 * Participation ratios of the normalized right eigenvectors.
 */
enum CtStatus ct_spectrum_participation(const struct CtSpectrum *spectrum, double *out, size_t len);

enum CtStatus ct_spectrum_superradiance(const struct CtSpectrum *spectrum,
                                        struct CtSuperradiance *out);

/**
 * Exact τ for a localized start at zero field and dephasing.
 */
enum CtStatus ct_tau_localized_closed_form(size_t site,
                                           size_t n_sites,
                                           double sink_rate,
                                           double hopping,
                                           double *out);

/**
 * Weak-coupling τ for a localized start.
 */
enum CtStatus ct_tau_perturbative_localized(size_t site,
                                            size_t n_sites,
                                            double sink_rate,
                                            double *out);

/**
 * Diffusive-regime heuristic τ for a localized start.
 */
enum CtStatus ct_tau_heuristic(size_t site,
                               size_t n_sites,
                               double hopping,
                               double dephasing_rate,
                               double sink_rate,
                               double field_step,
                               double *out);

/**
 * Field above which the chain eigenstates localize, 4√2·hopping/N.
 */
double ct_critical_field(size_t n_sites, double hopping);

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ct_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ct_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAINTRANSPORT_H */
