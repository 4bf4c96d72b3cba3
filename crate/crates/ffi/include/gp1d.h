/* C interface for the gp1d lattice Gross-Pitaevskii toolkit. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  GP1D_STATUS_OK = 0,
  GP1D_STATUS_NULL_POINTER = 1,
  GP1D_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The coupling is outside the logarithmic small-coupling regime, or no
   * lake exceeds the cutoff length.
   */
  GP1D_STATUS_OUT_OF_REGIME = 3,
  GP1D_STATUS_BUFFER_TOO_SMALL = 4,
  GP1D_STATUS_PARSE_ERROR = 5,
  GP1D_STATUS_INTERNAL = 6,
} Gp1dStatus;

/**
 * Opaque handle to a solved ground state.
 */
typedef struct Gp1dGroundState Gp1dGroundState;

/**
 * Opaque handle to a sampled potential realization.
 */
typedef struct Gp1dPotential Gp1dPotential;

/**
 * Solver controls; zero/negative fields fall back to the defaults.
 */
typedef struct {
  /**
   * Tangential gradient norm threshold (default 1e-10).
   */
  double tol_gradient;
  /**
   * Per-step energy decrease threshold (default 1e-14).
   */
  double tol_energy;
  /**
   * Iteration cap (default 1,000,000).
   */
  uint64_t max_iterations;
  /**
   * 0 = auto, 1 = uniform, 2 = linear ground state.
   */
  int32_t initial_state;
} Gp1dSolverOptions;

/**
 * Energy split of a state, all in lattice units.
 */
typedef struct {
  double kinetic;
  double potential;
  double interaction;
  double total;
} Gp1dEnergyBreakdown;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string; do not free.
 */
const char *gp1d_version(void);

/**
 * Sample `length` IID Bernoulli sites (0 with probability `p`, else `b`).
 *
 * # Safety
 * `out` must be a valid pointer to a `Gp1dPotential*` slot.
 */
Gp1dStatus gp1d_potential_fixed_length(uintptr_t length,
                                       double p,
                                       double b,
                                       uint64_t seed,
                                       Gp1dPotential **out);

/**
 * Sample `n` geometric lakes alternating with `n` geometric barriers.
 *
 * # Safety
 * `out` must be a valid pointer to a `Gp1dPotential*` slot.
 */
Gp1dStatus gp1d_potential_fixed_interval_count(uintptr_t n,
                                               double p,
                                               double b,
                                               uint64_t seed,
                                               Gp1dPotential **out);

/**
 * Rebuild a potential from its canonical JSON form (run-length encoded).
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid slot.
 */
Gp1dStatus gp1d_potential_from_json(const char *json, Gp1dPotential **out);

/**
 * Number of lattice sites; 0 for NULL.
 *
 * # Safety
 * `potential` must be NULL or a live handle from this library.
 */
uintptr_t gp1d_potential_length(const Gp1dPotential *potential);

/**
 * Copy the site values into `buf` (length `len` >= site count).
 *
 * # Safety
 * `buf` must point to at least `len` writable doubles.
 */
Gp1dStatus gp1d_potential_values(const Gp1dPotential *potential, double *buf, uintptr_t len);

/**
 * Canonical JSON of the realization (run-length encoded values). Returns
 * NULL on error; free the result with `gp1d_string_free`.
 *
 * # Safety
 * `potential` must be NULL or a live handle from this library.
 */
char *gp1d_potential_to_json(const Gp1dPotential *potential);

/**
 * Release a potential handle (NULL is fine).
 *
 * # Safety
 * `potential` must be NULL or a live handle; it is dead afterwards.
 */
void gp1d_potential_free(Gp1dPotential *potential);

/**
 * Minimize the functional at coupling `g_rho` (the product g rho; the
 * interaction coefficient is g_rho times the lattice size).
 * `options` may be NULL for defaults.
 *
 * # Safety
 * `potential` must be a live handle, `out` a valid slot, and `options`
 * NULL or a valid options struct.
 */
Gp1dStatus gp1d_ground_state(const Gp1dPotential *potential,
                             double g_rho,
                             const Gp1dSolverOptions *options,
                             Gp1dGroundState **out);

/**
 * Energy breakdown of a solved state.
 *
 * # Safety
 * `state` must be a live handle and `out` a valid slot.
 */
Gp1dStatus gp1d_ground_state_energy(const Gp1dGroundState *state, Gp1dEnergyBreakdown *out);

/**
 * Number of amplitudes in the solved state; 0 for NULL.
 *
 * # Safety
 * `state` must be NULL or a live handle.
 */
uintptr_t gp1d_ground_state_length(const Gp1dGroundState *state);

/**
 * Copy the normalized amplitudes into `buf` (length `len` >= site count).
 *
 * # Safety
 * `buf` must point to at least `len` writable doubles.
 */
Gp1dStatus gp1d_ground_state_amplitudes(const Gp1dGroundState *state, double *buf, uintptr_t len);

/**
 * Final tangential gradient norm (NaN for NULL).
 *
 * # Safety
 * `state` must be NULL or a live handle.
 */
double gp1d_ground_state_residual(const Gp1dGroundState *state);

/**
 * Descent iterations used (0 for NULL).
 *
 * # Safety
 * `state` must be NULL or a live handle.
 */
uint64_t gp1d_ground_state_iterations(const Gp1dGroundState *state);

/**
 * Whether both convergence thresholds were met (false for NULL).
 *
 * # Safety
 * `state` must be NULL or a live handle.
 */
bool gp1d_ground_state_converged(const Gp1dGroundState *state);

/**
 * Release a ground-state handle (NULL is fine).
 *
 * # Safety
 * `state` must be NULL or a live handle; it is dead afterwards.
 */
void gp1d_ground_state_free(Gp1dGroundState *state);

/**
 * Exact smallest eigenvalue of -laplacian + V (the g = 0 ground energy).
 *
 * # Safety
 * `potential` must be a live handle and `out` a valid slot.
 */
Gp1dStatus gp1d_linear_ground_energy(const Gp1dPotential *potential, double *out);

/**
 * Cutoff lake length log_p(g rho) + log_p(log_p(g rho)).
 *
 * # Safety
 * `out` must be a valid slot.
 */
Gp1dStatus gp1d_cutoff_length(double g_rho, double p, double *out);

/**
 * Leading-order water-filling multiplier (kappa pi / cutoff)^2.
 *
 * # Safety
 * `out` must be a valid slot.
 */
Gp1dStatus gp1d_lambda_asymptotic(double g_rho, double p, double *out);

/**
 * Sine-wave upper bound on the ground energy of this realization.
 *
 * # Safety
 * `potential` must be a live handle and `out` a valid slot.
 */
Gp1dStatus gp1d_upper_bound_energy(const Gp1dPotential *potential, double g_rho, double *out);

/**
 * Interaction-only lower bound at mass `norm_target`.
 *
 * # Safety
 * `potential` must be a live handle and `out` a valid slot.
 */
Gp1dStatus gp1d_lower_bound_energy(const Gp1dPotential *potential,
                                   double g_rho,
                                   double norm_target,
                                   double *out);

/**
 * Free a string allocated by this library (NULL is fine).
 *
 * # Safety
 * `s` must be NULL or a string returned by a `*_to_json` function, not
 * yet freed.
 */
void gp1d_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
