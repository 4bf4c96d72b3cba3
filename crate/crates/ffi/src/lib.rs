//! C ABI for the gp1d toolkit: opaque handles, status codes, and plain
//! buffers, so other languages can sample Bernoulli potentials, solve for
//! ground states, and evaluate the variational bounds.
//!
//! Conventions:
//! - Every fallible call returns a `Gp1dStatus`; results come back through
//!   out-pointers.
//! - Handles are created and destroyed by this library only
//!   (`*_free` functions accept NULL).
//! - Strings returned by `*_to_json` are NUL-terminated and owned by the
//!   caller; release them with `gp1d_string_free`.
//!
//! The generated header lives at `include/gp1d.h`.

use gp1d_core::error::Error;
use gp1d_core::solver::InitialState;
use gp1d_core::{
    cutoff_length, ground_state, lambda_asymptotic, linear_ground_state, lower_bound_energy,
    upper_bound_energy, GroundStateResult, PotentialRealization, SolverConfig,
};
use std::ffi::{c_char, CStr, CString};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gp1dStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The coupling is outside the logarithmic small-coupling regime, or no
    /// lake exceeds the cutoff length.
    OutOfRegime = 3,
    BufferTooSmall = 4,
    ParseError = 5,
    Internal = 6,
}

fn status_of(err: &Error) -> Gp1dStatus {
    match err {
        Error::InvalidParameter { .. }
        | Error::DimensionMismatch { .. }
        | Error::NotNormalized { .. }
        | Error::LatticeTooLarge { .. } => Gp1dStatus::InvalidArgument,
        Error::OutOfRegime { .. } | Error::NoContributingLake { .. } => Gp1dStatus::OutOfRegime,
        Error::BisectionFailure { .. } => Gp1dStatus::Internal,
    }
}

/// Opaque handle to a sampled potential realization.
pub struct Gp1dPotential(PotentialRealization);

/// Opaque handle to a solved ground state.
pub struct Gp1dGroundState(GroundStateResult);

/// Energy split of a state, all in lattice units.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Gp1dEnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub interaction: f64,
    pub total: f64,
}

/// Solver controls; zero/negative fields fall back to the defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Gp1dSolverOptions {
    /// Tangential gradient norm threshold (default 1e-10).
    pub tol_gradient: f64,
    /// Per-step energy decrease threshold (default 1e-14).
    pub tol_energy: f64,
    /// Iteration cap (default 1,000,000).
    pub max_iterations: u64,
    /// 0 = auto, 1 = uniform, 2 = linear ground state.
    pub initial_state: i32,
}

fn solver_config(options: *const Gp1dSolverOptions) -> Option<SolverConfig> {
    let mut config = SolverConfig::default();
    if options.is_null() {
        return Some(config);
    }
    let options = unsafe { &*options };
    if options.tol_gradient > 0.0 {
        config.tol_gradient = options.tol_gradient;
    }
    if options.tol_energy > 0.0 {
        config.tol_energy = options.tol_energy;
    }
    if options.max_iterations > 0 {
        config.max_iterations = options.max_iterations;
    }
    config.initial_state = match options.initial_state {
        0 => InitialState::Auto,
        1 => InitialState::Uniform,
        2 => InitialState::LinearGroundState,
        _ => return None,
    };
    Some(config)
}

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn gp1d_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Sample `length` IID Bernoulli sites (0 with probability `p`, else `b`).
///
/// # Safety
/// `out` must be a valid pointer to a `Gp1dPotential*` slot.
#[no_mangle]
pub unsafe extern "C" fn gp1d_potential_fixed_length(
    length: usize,
    p: f64,
    b: f64,
    seed: u64,
    out: *mut *mut Gp1dPotential,
) -> Gp1dStatus {
    if out.is_null() {
        return Gp1dStatus::NullPointer;
    }
    match PotentialRealization::sample_fixed_length(length, p, b, seed) {
        Ok(pot) => {
            *out = Box::into_raw(Box::new(Gp1dPotential(pot)));
            Gp1dStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Sample `n` geometric lakes alternating with `n` geometric barriers.
///
/// # Safety
/// `out` must be a valid pointer to a `Gp1dPotential*` slot.
#[no_mangle]
pub unsafe extern "C" fn gp1d_potential_fixed_interval_count(
    n: usize,
    p: f64,
    b: f64,
    seed: u64,
    out: *mut *mut Gp1dPotential,
) -> Gp1dStatus {
    if out.is_null() {
        return Gp1dStatus::NullPointer;
    }
    match PotentialRealization::sample_fixed_interval_count(n, p, b, seed) {
        Ok(pot) => {
            *out = Box::into_raw(Box::new(Gp1dPotential(pot)));
            Gp1dStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Rebuild a potential from its canonical JSON form (run-length encoded).
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn gp1d_potential_from_json(
    json: *const c_char,
    out: *mut *mut Gp1dPotential,
) -> Gp1dStatus {
    if json.is_null() || out.is_null() {
        return Gp1dStatus::NullPointer;
    }
    let Ok(text) = CStr::from_ptr(json).to_str() else {
        return Gp1dStatus::ParseError;
    };
    match serde_json::from_str::<PotentialRealization>(text) {
        Ok(pot) => {
            *out = Box::into_raw(Box::new(Gp1dPotential(pot)));
            Gp1dStatus::Ok
        }
        Err(_) => Gp1dStatus::ParseError,
    }
}

/// Number of lattice sites; 0 for NULL.
///
/// # Safety
/// `potential` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gp1d_potential_length(potential: *const Gp1dPotential) -> usize {
    if potential.is_null() {
        0
    } else {
        (*potential).0.len()
    }
}

/// Copy the site values into `buf` (length `len` >= site count).
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gp1d_potential_values(
    potential: *const Gp1dPotential,
    buf: *mut f64,
    len: usize,
) -> Gp1dStatus {
    if potential.is_null() || buf.is_null() {
        return Gp1dStatus::NullPointer;
    }
    let values = (*potential).0.values();
    if len < values.len() {
        return Gp1dStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Gp1dStatus::Ok
}

/// Canonical JSON of the realization (run-length encoded values). Returns
/// NULL on error; free the result with `gp1d_string_free`.
///
/// # Safety
/// `potential` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gp1d_potential_to_json(
    potential: *const Gp1dPotential,
) -> *mut c_char {
    if potential.is_null() {
        return std::ptr::null_mut();
    }
    match serde_json::to_string(&(*potential).0) {
        Ok(json) => CString::new(json)
            .map_or(std::ptr::null_mut(), CString::into_raw),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Release a potential handle (NULL is fine).
///
/// # Safety
/// `potential` must be NULL or a live handle; it is dead afterwards.
#[no_mangle]
pub unsafe extern "C" fn gp1d_potential_free(potential: *mut Gp1dPotential) {
    if !potential.is_null() {
        drop(Box::from_raw(potential));
    }
}

/// Minimize the functional at coupling `g_rho` (the product g rho; the
/// interaction coefficient is g_rho times the lattice size).
/// `options` may be NULL for defaults.
///
/// # Safety
/// `potential` must be a live handle, `out` a valid slot, and `options`
/// NULL or a valid options struct.
#[no_mangle]
pub unsafe extern "C" fn gp1d_ground_state(
    potential: *const Gp1dPotential,
    g_rho: f64,
    options: *const Gp1dSolverOptions,
    out: *mut *mut Gp1dGroundState,
) -> Gp1dStatus {
    if potential.is_null() || out.is_null() {
        return Gp1dStatus::NullPointer;
    }
    let Some(config) = solver_config(options) else {
        return Gp1dStatus::InvalidArgument;
    };
    match ground_state(&(*potential).0, g_rho, &config) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(Gp1dGroundState(result)));
            Gp1dStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Energy breakdown of a solved state.
///
/// # Safety
/// `state` must be a live handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn gp1d_ground_state_energy(
    state: *const Gp1dGroundState,
    out: *mut Gp1dEnergyBreakdown,
) -> Gp1dStatus {
    if state.is_null() || out.is_null() {
        return Gp1dStatus::NullPointer;
    }
    let e = (*state).0.energy;
    *out = Gp1dEnergyBreakdown {
        kinetic: e.kinetic,
        potential: e.potential,
        interaction: e.interaction,
        total: e.total,
    };
    Gp1dStatus::Ok
}

/// Number of amplitudes in the solved state; 0 for NULL.
///
/// # Safety
/// `state` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp1d_ground_state_length(state: *const Gp1dGroundState) -> usize {
    if state.is_null() {
        0
    } else {
        (*state).0.state.len()
    }
}

/// Copy the normalized amplitudes into `buf` (length `len` >= site count).
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gp1d_ground_state_amplitudes(
    state: *const Gp1dGroundState,
    buf: *mut f64,
    len: usize,
) -> Gp1dStatus {
    if state.is_null() || buf.is_null() {
        return Gp1dStatus::NullPointer;
    }
    let amps = (*state).0.state.amplitudes();
    if len < amps.len() {
        return Gp1dStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(amps.as_ptr(), buf, amps.len());
    Gp1dStatus::Ok
}

/// Final tangential gradient norm (NaN for NULL).
///
/// # Safety
/// `state` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp1d_ground_state_residual(state: *const Gp1dGroundState) -> f64 {
    if state.is_null() {
        f64::NAN
    } else {
        (*state).0.residual
    }
}

/// Descent iterations used (0 for NULL).
///
/// # Safety
/// `state` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp1d_ground_state_iterations(state: *const Gp1dGroundState) -> u64 {
    if state.is_null() {
        0
    } else {
        (*state).0.iterations
    }
}

/// Whether both convergence thresholds were met (false for NULL).
///
/// # Safety
/// `state` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp1d_ground_state_converged(state: *const Gp1dGroundState) -> bool {
    if state.is_null() {
        false
    } else {
        (*state).0.converged
    }
}

/// Release a ground-state handle (NULL is fine).
///
/// # Safety
/// `state` must be NULL or a live handle; it is dead afterwards.
#[no_mangle]
pub unsafe extern "C" fn gp1d_ground_state_free(state: *mut Gp1dGroundState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Exact smallest eigenvalue of -laplacian + V (the g = 0 ground energy).
///
/// # Safety
/// `potential` must be a live handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn gp1d_linear_ground_energy(
    potential: *const Gp1dPotential,
    out: *mut f64,
) -> Gp1dStatus {
    if potential.is_null() || out.is_null() {
        return Gp1dStatus::NullPointer;
    }
    match linear_ground_state(&(*potential).0) {
        Ok((energy, _)) => {
            *out = energy;
            Gp1dStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Cutoff lake length log_p(g rho) + log_p(log_p(g rho)).
///
/// # Safety
/// `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn gp1d_cutoff_length(g_rho: f64, p: f64, out: *mut f64) -> Gp1dStatus {
    if out.is_null() {
        return Gp1dStatus::NullPointer;
    }
    match cutoff_length(g_rho, p) {
        Ok(v) => {
            *out = v;
            Gp1dStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Leading-order water-filling multiplier (kappa pi / cutoff)^2.
///
/// # Safety
/// `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn gp1d_lambda_asymptotic(
    g_rho: f64,
    p: f64,
    out: *mut f64,
) -> Gp1dStatus {
    if out.is_null() {
        return Gp1dStatus::NullPointer;
    }
    match lambda_asymptotic(g_rho, p) {
        Ok(v) => {
            *out = v;
            Gp1dStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Sine-wave upper bound on the ground energy of this realization.
///
/// # Safety
/// `potential` must be a live handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn gp1d_upper_bound_energy(
    potential: *const Gp1dPotential,
    g_rho: f64,
    out: *mut f64,
) -> Gp1dStatus {
    if potential.is_null() || out.is_null() {
        return Gp1dStatus::NullPointer;
    }
    let pot = &(*potential).0;
    match upper_bound_energy(&pot.decompose_lakes(), g_rho, pot.p()) {
        Ok(v) => {
            *out = v;
            Gp1dStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Interaction-only lower bound at mass `norm_target`.
///
/// # Safety
/// `potential` must be a live handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn gp1d_lower_bound_energy(
    potential: *const Gp1dPotential,
    g_rho: f64,
    norm_target: f64,
    out: *mut f64,
) -> Gp1dStatus {
    if potential.is_null() || out.is_null() {
        return Gp1dStatus::NullPointer;
    }
    let pot = &(*potential).0;
    match lower_bound_energy(&pot.decompose_lakes(), g_rho, pot.p(), norm_target) {
        Ok(v) => {
            *out = v;
            Gp1dStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Free a string allocated by this library (NULL is fine).
///
/// # Safety
/// `s` must be NULL or a string returned by a `*_to_json` function, not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn gp1d_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_lifecycle_and_values() {
        unsafe {
            let mut pot: *mut Gp1dPotential = std::ptr::null_mut();
            assert_eq!(
                gp1d_potential_fixed_length(32, 0.5, 1.0, 42, &mut pot),
                Gp1dStatus::Ok
            );
            assert_eq!(gp1d_potential_length(pot), 32);

            let mut buf = vec![0.0f64; 32];
            assert_eq!(
                gp1d_potential_values(pot, buf.as_mut_ptr(), 32),
                Gp1dStatus::Ok
            );
            assert!(buf.iter().all(|&v| v == 0.0 || v == 1.0));
            assert_eq!(
                gp1d_potential_values(pot, buf.as_mut_ptr(), 16),
                Gp1dStatus::BufferTooSmall
            );
            gp1d_potential_free(pot);
        }
    }

    #[test]
    fn invalid_parameters_are_reported() {
        unsafe {
            let mut pot: *mut Gp1dPotential = std::ptr::null_mut();
            assert_eq!(
                gp1d_potential_fixed_length(32, 1.5, 1.0, 0, &mut pot),
                Gp1dStatus::InvalidArgument
            );
            assert_eq!(
                gp1d_potential_fixed_length(32, 0.5, 1.0, 0, std::ptr::null_mut()),
                Gp1dStatus::NullPointer
            );
            let mut out = 0.0f64;
            assert_eq!(
                gp1d_cutoff_length(0.9, 0.5, &mut out),
                Gp1dStatus::OutOfRegime
            );
        }
    }

    #[test]
    fn solve_through_the_c_surface() {
        unsafe {
            let mut pot: *mut Gp1dPotential = std::ptr::null_mut();
            assert_eq!(
                gp1d_potential_fixed_length(64, 0.5, 1.0, 7, &mut pot),
                Gp1dStatus::Ok
            );
            let mut state: *mut Gp1dGroundState = std::ptr::null_mut();
            let options = Gp1dSolverOptions {
                tol_gradient: 1e-7,
                tol_energy: 1e-14,
                max_iterations: 200_000,
                initial_state: 1,
            };
            assert_eq!(
                gp1d_ground_state(pot, 0.01, &options, &mut state),
                Gp1dStatus::Ok
            );
            assert!(gp1d_ground_state_converged(state));
            assert!(gp1d_ground_state_iterations(state) > 0);
            assert!(gp1d_ground_state_residual(state) <= 1e-7);

            let mut breakdown = Gp1dEnergyBreakdown {
                kinetic: 0.0,
                potential: 0.0,
                interaction: 0.0,
                total: 0.0,
            };
            assert_eq!(
                gp1d_ground_state_energy(state, &mut breakdown),
                Gp1dStatus::Ok
            );
            assert!(breakdown.total > 0.0);
            assert!(
                (breakdown.total
                    - (breakdown.kinetic + breakdown.potential + breakdown.interaction))
                    .abs()
                    < 1e-12
            );

            // The linear energy is a lower bound at g > 0.
            let mut linear = 0.0f64;
            assert_eq!(gp1d_linear_ground_energy(pot, &mut linear), Gp1dStatus::Ok);
            assert!(linear <= breakdown.total);

            let n = gp1d_ground_state_length(state);
            assert_eq!(n, 64);
            let mut amps = vec![0.0f64; n];
            assert_eq!(
                gp1d_ground_state_amplitudes(state, amps.as_mut_ptr(), n),
                Gp1dStatus::Ok
            );
            let norm: f64 = amps.iter().map(|a| a * a).sum();
            assert!((norm - 1.0).abs() < 1e-10);

            gp1d_ground_state_free(state);
            gp1d_potential_free(pot);
        }
    }

    #[test]
    fn json_round_trip_through_the_c_surface() {
        unsafe {
            let mut pot: *mut Gp1dPotential = std::ptr::null_mut();
            assert_eq!(
                gp1d_potential_fixed_interval_count(20, 0.4, 2.0, 9, &mut pot),
                Gp1dStatus::Ok
            );
            let json = gp1d_potential_to_json(pot);
            assert!(!json.is_null());

            let mut back: *mut Gp1dPotential = std::ptr::null_mut();
            assert_eq!(gp1d_potential_from_json(json, &mut back), Gp1dStatus::Ok);
            let n = gp1d_potential_length(back);
            assert_eq!(n, gp1d_potential_length(pot));
            let mut a = vec![0.0f64; n];
            let mut b = vec![0.0f64; n];
            assert_eq!(gp1d_potential_values(pot, a.as_mut_ptr(), n), Gp1dStatus::Ok);
            assert_eq!(gp1d_potential_values(back, b.as_mut_ptr(), n), Gp1dStatus::Ok);
            assert_eq!(a, b);

            gp1d_string_free(json);
            gp1d_potential_free(pot);
            gp1d_potential_free(back);

            let mut bad: *mut Gp1dPotential = std::ptr::null_mut();
            let garbage = std::ffi::CString::new("{not json").unwrap();
            assert_eq!(
                gp1d_potential_from_json(garbage.as_ptr(), &mut bad),
                Gp1dStatus::ParseError
            );
        }
    }

    #[test]
    fn bounds_through_the_c_surface() {
        unsafe {
            let mut pot: *mut Gp1dPotential = std::ptr::null_mut();
            assert_eq!(
                gp1d_potential_fixed_interval_count(2000, 0.5, 1.0, 11, &mut pot),
                Gp1dStatus::Ok
            );
            let g_rho = 2f64.powi(-12);
            let mut upper = 0.0f64;
            assert_eq!(
                gp1d_upper_bound_energy(pot, g_rho, &mut upper),
                Gp1dStatus::Ok
            );
            let mut lower = 0.0f64;
            assert_eq!(
                gp1d_lower_bound_energy(pot, g_rho, 0.7, &mut lower),
                Gp1dStatus::Ok
            );
            assert!(0.0 < lower && lower < upper);

            let mut cutoff = 0.0f64;
            assert_eq!(gp1d_cutoff_length(g_rho, 0.5, &mut cutoff), Gp1dStatus::Ok);
            let mut lambda = 0.0f64;
            assert_eq!(
                gp1d_lambda_asymptotic(g_rho, 0.5, &mut lambda),
                Gp1dStatus::Ok
            );
            assert!(lambda > 0.0 && cutoff > 0.0);
            gp1d_potential_free(pot);
        }
    }

    #[test]
    fn version_is_a_c_string() {
        let v = gp1d_version();
        assert!(!v.is_null());
        let s = unsafe { CStr::from_ptr(v) }.to_str().unwrap();
        assert_eq!(s, env!("CARGO_PKG_VERSION"));
    }
}
