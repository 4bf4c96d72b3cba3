//! Ground-state computation under the unit-norm constraint.
//!
//! Three routes, deliberately independent of each other:
//!
//! - `ground_state`: projected gradient descent on the unit sphere with a
//!   Barzilai-Borwein step and a backtracking line search that enforces
//!   monotone energy decrease. In density variables u = phi^2 the functional
//!   is convex on the simplex, so the nonnegative normalized minimizer is
//!   unique and plain descent suffices.
//! - `linear_ground_state`: the exact g = 0 answer, i.e. the smallest
//!   eigenpair of the symmetric tridiagonal -laplacian + V with Dirichlet
//!   walls (Sturm bisection + inverse iteration).
//! - `brute_force_minimum`: exhaustive angular grid on the nonnegative unit
//!   hemisphere for tiny lattices, with a pattern-search polish.

use crate::disorder::PotentialRealization;
use crate::energy::{
    breakdown_raw, compensated_dot, gradient_raw, norm_sq, rescaled_energy_dd, EnergyBreakdown,
    WaveFunction,
};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Positive floor applied after each descent step; negative amplitudes are
/// clamped here and the state renormalized.
const AMPLITUDE_FLOOR: f64 = 1e-300;

/// Choice of starting state for the descent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Linear ground state when g rho L <= 1, uniform otherwise.
    #[default]
    Auto,
    Uniform,
    LinearGroundState,
    Supplied(WaveFunction),
}

/// Descent controls. Defaults match the documented tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop when the tangential gradient norm falls below this.
    pub tol_gradient: f64,
    /// ... and the last energy decrease falls below this.
    pub tol_energy: f64,
    pub max_iterations: u64,
    pub initial_state: InitialState,
    /// Backtracking shrink factor in (0, 1).
    pub line_search_shrink: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_gradient: 1e-10,
            tol_energy: 1e-14,
            max_iterations: 1_000_000,
            initial_state: InitialState::Auto,
            line_search_shrink: 0.5,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol_gradient > 0.0) {
            return Err(Error::invalid("tol_gradient", "must be positive"));
        }
        if !(self.tol_energy > 0.0) {
            return Err(Error::invalid("tol_energy", "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", "must be at least 1"));
        }
        if !(self.line_search_shrink > 0.0 && self.line_search_shrink < 1.0) {
            return Err(Error::invalid("line_search_shrink", "must be in (0, 1)"));
        }
        Ok(())
    }
}

/// A converged (or best-effort) minimizer with diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStateResult {
    pub state: WaveFunction,
    pub energy: EnergyBreakdown,
    pub iterations: u64,
    /// Final tangential gradient norm.
    pub residual: f64,
    pub converged: bool,
    /// Seed of the realization that was solved, for provenance.
    pub seed: u64,
}

fn clamp_and_normalize(amps: &mut [f64]) {
    for a in amps.iter_mut() {
        if *a < AMPLITUDE_FLOOR {
            *a = AMPLITUDE_FLOOR;
        }
    }
    let norm = norm_sq(amps).sqrt();
    for a in amps.iter_mut() {
        *a /= norm;
    }
}

/// One block move in per-lake mass coordinates. The lattice is tiled into
/// blocks, one per lake: the lake plus the halves of its flanking barriers
/// (an edge barrier belongs entirely to its only neighbor). Rescaling
/// block i by c_i >= 0 changes the energy by exactly
///
///   sum_i (K_i c_i^2 - 2 X_i c_i + Q_i c_i^4) - const
///
/// with K_i the quadratic coefficient (kinetic plus barrier potential
/// inside the block), X_i the coupling across the two block-boundary bonds
/// (deep inside barriers, hence tiny), and Q_i the quartic coefficient.
/// The total mass sum_i m_i c_i^2 is held fixed and the multiplier is
/// bisected, with a Newton solve of the per-block cubic stationarity
/// condition 2 Q_i c^3 + (K_i - mu m_i) c - X_i = 0.
///
/// Gradient descent is slow along exactly these directions: transferring
/// mass between lakes has curvature of order g_n m^2 / L, and a lake
/// drained to the amplitude floor generates no gradient at all to refill
/// it. Blocks carrying less than 1e-14 of mass are re-seeded with a
/// stretched sine plus matching exponential barrier tails before the model
/// is built, so justified repopulations become visible to it. The caller
/// accepts the move only if the double-double energy decreases; all of
/// this is purely an accelerator.
#[allow(clippy::too_many_arguments)]
fn rebalanced_block_masses(
    amps: &[f64],
    lakes: &[crate::disorder::Interval],
    blocks: &[(usize, usize)],
    values: &[f64],
    g_n: f64,
    soft_extension: f64,
    decay: f64,
    out: &mut Vec<f64>,
) -> bool {
    const C_MAX: f64 = 1e60;
    const ETA: f64 = 1e-60;
    const DEAD_MASS: f64 = 1e-14;
    if lakes.is_empty() || g_n <= 0.0 {
        return false;
    }
    let l = amps.len();
    let k = lakes.len();

    out.clear();
    out.extend_from_slice(amps);
    for (lake, &(bs, be)) in lakes.iter().zip(blocks) {
        if norm_sq(&out[bs..be]) < DEAD_MASS {
            let s_left = if lake.start == 0 { 0.0 } else { soft_extension };
            let s_right = if lake.end() == l { 0.0 } else { soft_extension };
            let n = lake.len as f64 + s_left + s_right + 1.0;
            for (offset, a) in out[lake.start..lake.end()].iter_mut().enumerate() {
                *a = ETA * (std::f64::consts::PI * (offset as f64 + 1.0 + s_left) / n).sin();
            }
            // Matching exponential tails into the block's barrier halves.
            let left_edge = out[lake.start];
            let mut tail = left_edge * decay;
            for j in (bs..lake.start).rev() {
                if tail < 1e-300 {
                    break;
                }
                out[j] = tail;
                tail *= decay;
            }
            let right_edge = out[lake.end() - 1];
            let mut tail = right_edge * decay;
            for j in lake.end()..be {
                if tail < 1e-300 {
                    break;
                }
                out[j] = tail;
                tail *= decay;
            }
        }
    }

    let mut mass = Vec::with_capacity(k);
    let mut quad = Vec::with_capacity(k);
    let mut edge = Vec::with_capacity(k);
    let mut quart = Vec::with_capacity(k);
    let mut target = 0.0;
    for &(bs, be) in blocks {
        let amps_in = &out[bs..be];
        let m2 = norm_sq(amps_in);
        let mut kin = amps_in[0] * amps_in[0] + amps_in[be - bs - 1] * amps_in[be - bs - 1];
        for w in amps_in.windows(2) {
            let d = w[1] - w[0];
            kin += d * d;
        }
        for (a, v) in amps_in.iter().zip(&values[bs..be]) {
            if *v != 0.0 {
                kin += v * a * a;
            }
        }
        let v_left = if bs > 0 { out[bs - 1] } else { 0.0 };
        let v_right = if be < l { out[be] } else { 0.0 };
        let x = amps_in[0] * v_left + amps_in[be - bs - 1] * v_right;
        let q: f64 = 0.5 * g_n * amps_in.iter().map(|a| a * a * a * a).sum::<f64>();
        mass.push(m2);
        quad.push(kin);
        edge.push(x);
        quart.push(q);
        target += m2;
    }
    if !(target > 0.0) {
        return false;
    }

    // A block may not grab more than a few times the total mass in one
    // move; without the cap, blocks rescaled from near-zero amplitudes
    // would make the filled-mass curve useless for bisection.
    let scale_cap: Vec<f64> = mass
        .iter()
        .map(|&m| if m > 0.0 { (4.0 * target / m).sqrt().min(C_MAX) } else { 0.0 })
        .collect();

    // Largest root of 2Q c^3 + (K - mu m) c - X = 0, by Newton from above.
    let block_scale = |i: usize, mu: f64| -> f64 {
        let a = 2.0 * quart[i];
        let b = quad[i] - mu * mass[i];
        let x = edge[i];
        if a <= 0.0 {
            // Quartic term underflowed: quadratic model.
            return if b > 0.0 {
                (x / b).min(scale_cap[i])
            } else {
                scale_cap[i]
            };
        }
        let mut c = ((-b.min(0.0)) / a).sqrt() * 1.5 + (x / a).cbrt().max(0.0) + 1.0;
        for _ in 0..60 {
            let f = (a * c * c + b) * c - x;
            let df = 3.0 * a * c * c + b;
            if df <= 0.0 {
                break;
            }
            let next = c - f / df;
            if !(next > 0.0) {
                c *= 0.5;
                continue;
            }
            if (next - c).abs() <= 1e-14 * c.abs() {
                c = next;
                break;
            }
            c = next;
        }
        if !(c > 0.0) || !c.is_finite() {
            0.0
        } else {
            c.min(scale_cap[i])
        }
    };

    let filled = |mu: f64, c: &mut Vec<f64>| -> f64 {
        c.clear();
        let mut total = 0.0;
        for i in 0..k {
            let ci = if mass[i] > 0.0 { block_scale(i, mu) } else { 0.0 };
            total += ci * ci * mass[i];
            c.push(ci);
        }
        total
    };

    let mut scales = Vec::with_capacity(k);
    // Bracket: at mu_hi every occupied block reaches at least its current
    // mass (c_i >= 1 solves the cubic inequality when mu m >= K + 2Q).
    let mut hi = 0.0f64;
    for i in 0..k {
        if mass[i] > 0.0 {
            hi = hi.max((quad[i] + 2.0 * quart[i]) / mass[i]);
        }
    }
    hi = hi.max(1e-300) * 2.0;
    let mut lo = 0.0f64;
    if filled(hi, &mut scales) < target {
        return false;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if filled(mid, &mut scales) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    let total = filled(hi, &mut scales);
    if !(total > 0.0) || !total.is_finite() {
        return false;
    }
    // Keep the total mass exact.
    let correction = (target / total).sqrt();

    let mut changed = false;
    for (i, &(bs, be)) in blocks.iter().enumerate() {
        let scale = scales[i] * correction;
        if scale.is_finite() && (scale - 1.0).abs() > 1e-15 {
            changed = true;
            for a in &mut out[bs..be] {
                *a *= scale;
            }
        }
    }
    changed && out.len() == l
}

/// Minimize the functional over normalized nonnegative states.
///
/// Deterministic given inputs. Non-convergence within `max_iterations` is
/// reported through `converged = false` on the partial result, not an error.
pub fn ground_state(
    potential: &PotentialRealization,
    g_rho: f64,
    config: &SolverConfig,
) -> Result<GroundStateResult> {
    config.validate()?;
    if !(g_rho >= 0.0) || !g_rho.is_finite() {
        return Err(Error::invalid("g_rho", format!("{g_rho} is not a nonnegative real")));
    }
    let l = potential.len();
    let g_n = g_rho * l as f64;
    let values = potential.values();

    let mut amps = match &config.initial_state {
        InitialState::Uniform => WaveFunction::uniform(l)?.into_amplitudes(),
        InitialState::LinearGroundState => linear_ground_state(potential)?.1.into_amplitudes(),
        InitialState::Supplied(phi) => {
            if phi.len() != l {
                return Err(Error::DimensionMismatch {
                    state: phi.len(),
                    potential: l,
                });
            }
            phi.clone().into_amplitudes()
        }
        InitialState::Auto => {
            if g_n <= 1.0 {
                linear_ground_state(potential)?.1.into_amplitudes()
            } else {
                WaveFunction::uniform(l)?.into_amplitudes()
            }
        }
    };
    clamp_and_normalize(&mut amps);

    // Line-search energies are compared through the scale-invariant
    // functional of the raw stepped vector at double-double precision: the
    // zero-step baseline is then bit-exact, so decreases far below one ulp
    // of the total remain measurable and cannot be masked by
    // renormalization noise.
    let mut energy = rescaled_energy_dd(&amps, values, g_n);
    let mut grad = Vec::new();
    gradient_raw(&amps, values, g_n, &mut grad);

    let mut tangent = vec![0.0; l];
    let mut trial = vec![0.0; l];
    let mut grad_trial = Vec::new();

    // Initial step from a crude curvature bound of the quadratic part.
    let b_max = values.iter().cloned().fold(0.0f64, f64::max);
    let mut step = 1.0 / (4.0 + b_max + 3.0 * g_n * amps.iter().fold(0.0f64, |m, a| m.max(a * a)) + 1e-12);
    let mut bb_step: Option<f64> = None;

    let mut last_decrease = 0.0f64;
    let mut iterations = 0u64;
    let mut converged = false;
    let mut residual;
    let mut zero_streak = 0u32;

    let decomposition = potential.decompose_lakes();
    let mut rebalance_buf: Vec<f64> = Vec::new();
    // Barrier penetration depth at low energy: amplitudes decay per site by
    // r with r + 1/r = 2 + b, so a lake's effective box extends by about
    // 1/ln(1/r) into each soft barrier.
    let decay = {
        let s = 2.0 + potential.b();
        (s - (s * s - 4.0).sqrt()) / 2.0
    };
    let soft_extension = if decay > 0.0 && decay < 1.0 {
        -1.0 / decay.ln()
    } else {
        0.0
    };
    // One rescaling block per lake: the lake plus the halves of its
    // flanking barriers; edge barriers go entirely to their only neighbor.
    let blocks: Vec<(usize, usize)> = decomposition
        .lakes
        .iter()
        .enumerate()
        .map(|(i, lake)| {
            let start = if i == 0 {
                0
            } else {
                let prev_end = decomposition.lakes[i - 1].end();
                prev_end + (lake.start - prev_end) / 2
            };
            let end = if i + 1 == decomposition.lakes.len() {
                l
            } else {
                let next_start = decomposition.lakes[i + 1].start;
                lake.end() + (next_start - lake.end()) / 2
            };
            (start, end)
        })
        .collect();

    // Switch to the exact (Dekker) energy evaluation in the endgame of
    // tight tolerances; the fast path's per-term rounding floors the
    // reachable residual near 1e-8.
    let wants_exact = config.tol_gradient < 3e-8;
    let mut using_exact = false;
    let eval = |v: &[f64], exact: bool| -> crate::energy::Dd {
        if exact {
            crate::energy::rescaled_energy_dd_exact(v, values, g_n)
        } else {
            rescaled_energy_dd(v, values, g_n)
        }
    };

    // Attempt a lake-mass rebalance; adopt it only on a clear energy
    // decrease. Returns whether the state changed.
    macro_rules! try_rebalance {
        () => {{
            let mut adopted = false;
            if rebalanced_block_masses(
                &amps,
                &decomposition.lakes,
                &blocks,
                values,
                g_n,
                soft_extension,
                decay,
                &mut rebalance_buf,
            ) {
                clamp_and_normalize(&mut rebalance_buf);
                let candidate = eval(&rebalance_buf, using_exact);
                if std::env::var_os("GP1D_TRACE").is_some() {
                    eprintln!(
                        "rebalance iter {iterations}: diff = {:+.3e} res = {residual:.3e}",
                        candidate.diff(energy)
                    );
                }
                if candidate.diff(energy) < -1e-18 * (1.0 + energy.hi.abs()) {
                    amps.copy_from_slice(&rebalance_buf);
                    energy = candidate;
                    gradient_raw(&amps, values, g_n, &mut grad);
                    bb_step = None;
                    adopted = true;
                }
            }
            adopted
        }};
    }

    loop {
        let radial = compensated_dot(&grad, &amps);
        for i in 0..l {
            tangent[i] = grad[i] - radial * amps[i];
        }
        residual = norm_sq(&tangent).sqrt();

        let exact = wants_exact && residual < config.tol_gradient * 1e4;
        if exact != using_exact {
            using_exact = exact;
            energy = eval(&amps, using_exact);
        }

        if residual <= config.tol_gradient && last_decrease <= config.tol_energy {
            // The residual is blind to under-populated lakes; do not stop
            // while a mass rebalance still lowers the energy.
            if try_rebalance!() {
                last_decrease = f64::MAX;
                iterations += 1;
                continue;
            }
            converged = true;
            break;
        }
        if iterations >= config.max_iterations {
            break;
        }

        // Periodic rebalance along the way.
        if iterations % 64 == 0 {
            try_rebalance!();
        }

        let mut alpha = bb_step.unwrap_or(step).clamp(1e-14, 1e8);
        let mut accepted = false;
        for _ in 0..200 {
            for i in 0..l {
                trial[i] = (amps[i] - alpha * tangent[i]).max(AMPLITUDE_FLOOR);
            }
            let trial_energy = eval(&trial, using_exact);
            let decrease = -trial_energy.diff(energy);
            if decrease >= 1e-4 * alpha * residual * residual || decrease >= 0.0 {
                accepted = true;
                last_decrease = decrease.max(0.0);
                break;
            }
            alpha *= config.line_search_shrink;
            if alpha < 1e-60 {
                break;
            }
        }
        if !accepted {
            // No decrease at floating-point resolution in the step
            // direction; a rebalance is the only move left to try.
            if try_rebalance!() {
                last_decrease = f64::MAX;
                iterations += 1;
                continue;
            }
            converged = residual <= config.tol_gradient;
            break;
        }

        // A long run of exactly-zero decreases means the iterate cycles on
        // the floating-point lattice around the minimum.
        if last_decrease == 0.0 {
            zero_streak += 1;
            if zero_streak >= 64 {
                if try_rebalance!() {
                    zero_streak = 0;
                    last_decrease = f64::MAX;
                    iterations += 1;
                    continue;
                }
                converged = residual <= config.tol_gradient;
                break;
            }
        } else {
            zero_streak = 0;
        }

        // Materialize the accepted state and re-anchor the reference energy
        // on the exact array the next step starts from.
        clamp_and_normalize(&mut trial);
        energy = eval(&trial, using_exact);
        gradient_raw(&trial, values, g_n, &mut grad_trial);

        // Barzilai-Borwein step from the accepted move.
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..l {
            let s = trial[i] - amps[i];
            let y = grad_trial[i] - grad[i];
            ss += s * s;
            sy += s * y;
        }
        if ss == 0.0 {
            // The step vanished at floating-point resolution.
            std::mem::swap(&mut amps, &mut trial);
            std::mem::swap(&mut grad, &mut grad_trial);
            if try_rebalance!() {
                last_decrease = f64::MAX;
                iterations += 1;
                continue;
            }
            converged = residual <= config.tol_gradient;
            break;
        }
        bb_step = if sy > 0.0 {
            Some((ss / sy).clamp(1e-14, 1e8))
        } else {
            Some((alpha * 4.0).clamp(1e-14, 1e8))
        };
        step = alpha;

        std::mem::swap(&mut amps, &mut trial);
        std::mem::swap(&mut grad, &mut grad_trial);
        iterations += 1;
    }

    let state = WaveFunction::from_normalized(amps)?;
    let energy = breakdown_raw(state.amplitudes(), values, g_n);
    Ok(GroundStateResult {
        state,
        energy,
        iterations,
        residual,
        converged,
        seed: potential.seed(),
    })
}

/// Smallest eigenvalue and nonnegative normalized eigenvector of
/// -laplacian + V with Dirichlet walls; the exact g = 0 ground state.
pub fn linear_ground_state(potential: &PotentialRealization) -> Result<(f64, WaveFunction)> {
    let diag: Vec<f64> = potential.values().iter().map(|&v| 2.0 + v).collect();
    let (value, mut vector) = tridiag::smallest_eigenpair(&diag, -1.0);
    // The ground state of an unreduced tridiagonal with negative couplings
    // has constant sign; fix it nonnegative and scrub roundoff.
    let sum: f64 = vector.iter().sum();
    if sum < 0.0 {
        for x in vector.iter_mut() {
            *x = -*x;
        }
    }
    for x in vector.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let state = WaveFunction::normalized(vector)?;
    Ok((value, state))
}

/// Minimum of the functional over an angular grid on the nonnegative unit
/// hemisphere, refined by pattern search. Exponential in the lattice size;
/// the independent oracle for tiny systems.
pub fn brute_force_minimum(
    potential: &PotentialRealization,
    g_rho: f64,
    grid_points_per_axis: usize,
) -> Result<f64> {
    const MAX_SITES: usize = 6;
    let l = potential.len();
    if l > MAX_SITES {
        return Err(Error::LatticeTooLarge {
            size: l,
            max: MAX_SITES,
        });
    }
    if grid_points_per_axis < 2 {
        return Err(Error::invalid("grid_points_per_axis", "need at least 2 points"));
    }
    let g_n = g_rho * l as f64;
    let values = potential.values();

    let energy_of_angles = |angles: &[f64], amps: &mut [f64]| -> f64 {
        let mut sin_product = 1.0;
        for (k, &theta) in angles.iter().enumerate() {
            amps[k] = sin_product * theta.cos();
            sin_product *= theta.sin();
        }
        amps[l - 1] = sin_product;
        breakdown_raw(amps, values, g_n).total
    };

    if l == 1 {
        return Ok(breakdown_raw(&[1.0], values, g_n).total);
    }

    let axes = l - 1;
    let spacing = std::f64::consts::FRAC_PI_2 / (grid_points_per_axis - 1) as f64;
    let mut index = vec![0usize; axes];
    let mut angles = vec![0.0f64; axes];
    let mut amps = vec![0.0f64; l];
    let mut best_angles = vec![0.0f64; axes];
    let mut best = f64::INFINITY;
    'grid: loop {
        for (a, &i) in angles.iter_mut().zip(&index) {
            *a = i as f64 * spacing;
        }
        let e = energy_of_angles(&angles, &mut amps);
        if e < best {
            best = e;
            best_angles.copy_from_slice(&angles);
        }
        // Odometer increment.
        for k in 0..axes {
            index[k] += 1;
            if index[k] < grid_points_per_axis {
                continue 'grid;
            }
            index[k] = 0;
        }
        break;
    }

    // Pattern-search polish around the best grid point.
    let mut step = spacing;
    let mut current = best_angles;
    while step > 1e-10 {
        let mut improved = false;
        for k in 0..axes {
            for dir in [-1.0, 1.0] {
                let saved = current[k];
                current[k] = (saved + dir * step).clamp(0.0, std::f64::consts::FRAC_PI_2);
                let e = energy_of_angles(&current, &mut amps);
                if e < best {
                    best = e;
                    improved = true;
                } else {
                    current[k] = saved;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}

/// Symmetric tridiagonal eigen-utilities: Sturm bisection for the smallest
/// eigenvalue, inverse iteration for its vector. Off-diagonal entries are a
/// single constant here (always -1 for the discrete laplacian).
pub(crate) mod tridiag {
    use crate::energy::Kahan;

    /// Number of eigenvalues strictly below `lambda` (sign count of the
    /// LDL^T pivots), with the usual safeguard against vanishing pivots.
    pub fn sturm_count(diag: &[f64], off: f64, lambda: f64) -> usize {
        let mut count = 0usize;
        let mut pivot = diag[0] - lambda;
        if pivot < 0.0 {
            count += 1;
        }
        let off_sq = off * off;
        for &d in &diag[1..] {
            let safe = if pivot.abs() < 1e-300 {
                if pivot >= 0.0 {
                    1e-300
                } else {
                    -1e-300
                }
            } else {
                pivot
            };
            pivot = (d - lambda) - off_sq / safe;
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Smallest eigenvalue by bisection inside the Gershgorin interval.
    pub fn smallest_eigenvalue(diag: &[f64], off: f64) -> f64 {
        let n = diag.len();
        if n == 1 {
            return diag[0];
        }
        let r = 2.0 * off.abs();
        let mut lo = diag.iter().cloned().fold(f64::MAX, f64::min) - r - 1.0;
        let mut hi = diag.iter().cloned().fold(f64::MIN, f64::max) + r + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo < 4.0 * f64::EPSILON * mid.abs().max(1.0) {
                break;
            }
            if sturm_count(diag, off, mid) == 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solve (T - sigma I) x = rhs with partial pivoting; `rhs` is consumed.
    /// Near-singular pivots are nudged, which is exactly what inverse
    /// iteration wants.
    fn solve_shifted(diag: &[f64], off: f64, sigma: f64, mut x: Vec<f64>) -> Vec<f64> {
        let n = diag.len();
        let safe = |v: f64| {
            if v.abs() < 1e-300 {
                if v >= 0.0 {
                    1e-300
                } else {
                    -1e-300
                }
            } else {
                v
            }
        };
        if n == 1 {
            x[0] /= safe(diag[0] - sigma);
            return x;
        }
        let mut dmain: Vec<f64> = diag.iter().map(|&d| d - sigma).collect();
        let mut du = vec![off; n - 1];
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let dl = vec![off; n - 1];
        for i in 0..n - 1 {
            if dmain[i].abs() >= dl[i].abs() {
                let mult = dl[i] / safe(dmain[i]);
                dmain[i + 1] -= mult * du[i];
                x[i + 1] -= mult * x[i];
            } else {
                let mult = dmain[i] / dl[i];
                dmain[i] = dl[i];
                let tmp = dmain[i + 1];
                dmain[i + 1] = du[i] - mult * tmp;
                if i < n - 2 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -mult * du[i + 1];
                }
                du[i] = tmp;
                x.swap(i, i + 1);
                x[i + 1] -= mult * x[i];
            }
        }
        x[n - 1] /= safe(dmain[n - 1]);
        if n >= 2 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / safe(dmain[n - 2]);
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / safe(dmain[i]);
        }
        x
    }

    fn normalize(x: &mut [f64]) {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            for v in x.iter_mut() {
                *v /= norm;
            }
        } else {
            // Overflowed solve: rescale by the largest magnitude first.
            let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for v in x.iter_mut() {
                *v /= m;
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in x.iter_mut() {
                *v /= norm;
            }
        }
    }

    /// Rayleigh quotient x^T T x for unit x.
    pub fn rayleigh_quotient(diag: &[f64], off: f64, x: &[f64]) -> f64 {
        let n = diag.len();
        let mut acc = Kahan::default();
        for i in 0..n {
            acc.add(diag[i] * x[i] * x[i]);
            if i + 1 < n {
                acc.add(2.0 * off * x[i] * x[i + 1]);
            }
        }
        acc.total()
    }

    /// Smallest eigenpair: bisection, two inverse iterations, one
    /// Rayleigh-quotient refinement.
    pub fn smallest_eigenpair(diag: &[f64], off: f64) -> (f64, Vec<f64>) {
        let n = diag.len();
        if n == 1 {
            return (diag[0], vec![1.0]);
        }
        let lambda = smallest_eigenvalue(diag, off);
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..2 {
            x = solve_shifted(diag, off, lambda, x);
            normalize(&mut x);
        }
        let rq = rayleigh_quotient(diag, off, &x);
        x = solve_shifted(diag, off, rq, x);
        normalize(&mut x);
        (rayleigh_quotient(diag, off, &x), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::SamplingMode;
    use crate::energy::evaluate_energy;

    fn zero_potential(l: usize) -> PotentialRealization {
        PotentialRealization::from_values(vec![0.0; l], 0.5, 1.0, 0, SamplingMode::FixedLength)
            .unwrap()
    }

    fn dirichlet_ground_energy(l: usize) -> f64 {
        let theta = std::f64::consts::PI / (2.0 * (l as f64 + 1.0));
        4.0 * theta.sin().powi(2)
    }

    #[test]
    fn eigenvalue_matches_dirichlet_closed_form() {
        for l in [1usize, 2, 3, 16, 257, 1000] {
            let diag = vec![2.0; l];
            let (value, vector) = tridiag::smallest_eigenpair(&diag, -1.0);
            let expected = dirichlet_ground_energy(l);
            assert!(
                (value - expected).abs() < 1e-12,
                "L = {l}: {value} vs {expected}"
            );
            // Residual check: ||T x - lambda x|| small.
            let mut res = 0.0f64;
            for i in 0..l {
                let left = if i > 0 { vector[i - 1] } else { 0.0 };
                let right = if i + 1 < l { vector[i + 1] } else { 0.0 };
                res += (2.0 * vector[i] - left - right - value * vector[i]).powi(2);
            }
            assert!(res.sqrt() < 1e-10, "L = {l}: residual {}", res.sqrt());
        }
    }

    #[test]
    fn constant_potential_shifts_the_spectrum() {
        let l = 100;
        let b = 2.5;
        let pot =
            PotentialRealization::from_values(vec![b; l], 0.5, b, 0, SamplingMode::FixedLength)
                .unwrap();
        let (value, state) = linear_ground_state(&pot).unwrap();
        assert!((value - (b + dirichlet_ground_energy(l))).abs() < 1e-11);
        assert!(state.is_nonnegative());
    }

    #[test]
    fn tall_barrier_localizes_in_the_longer_lake() {
        // Lakes of 9 and 3 sites split by one huge barrier site.
        let b = 1e3;
        let mut values = vec![0.0; 13];
        values[9] = b;
        let pot =
            PotentialRealization::from_values(values, 0.5, b, 0, SamplingMode::FixedLength)
                .unwrap();
        let (value, state) = linear_ground_state(&pot).unwrap();
        let mass_long: f64 = state.amplitudes()[..9].iter().map(|a| a * a).sum();
        assert!(mass_long > 0.99, "long-lake mass {mass_long}");
        // Energy close to the 9-site box level.
        assert!((value - dirichlet_ground_energy(9)).abs() < 1e-2);
    }

    #[test]
    fn ground_state_zero_coupling_is_the_sine() {
        let pot = zero_potential(3);
        let result = ground_state(&pot, 0.0, &SolverConfig::default()).unwrap();
        assert!(result.converged);
        assert!((result.energy.total - (2.0 - 2.0f64.sqrt())).abs() < 1e-10);
        let n = 4.0f64;
        for (x, a) in result.state.amplitudes().iter().enumerate() {
            let expected =
                (2.0 / n).sqrt() * (std::f64::consts::PI * (x as f64 + 1.0) / n).sin();
            assert!((a - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn single_site_ground_state_is_exact() {
        let pot = zero_potential(1);
        let c = 0.7;
        let result = ground_state(&pot, c, &SolverConfig::default()).unwrap();
        assert!(result.converged);
        assert_eq!(result.state.amplitudes(), &[1.0]);
        assert!((result.energy.total - (2.0 + c / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn descent_matches_brute_force_on_small_random_systems() {
        for seed in 0..10 {
            let l = 2 + (seed % 5) as usize;
            let pot = PotentialRealization::sample_fixed_length(l, 0.5, 1.0, seed).unwrap();
            let g_rho = 1.0 / l as f64; // g rho L = 1
            let solved = ground_state(&pot, g_rho, &SolverConfig::default()).unwrap();
            let brute = brute_force_minimum(&pot, g_rho, 24).unwrap();
            assert!(
                (solved.energy.total - brute).abs() < 1e-3,
                "seed {seed}: descent {} vs brute {}",
                solved.energy.total,
                brute
            );
        }
        assert!(brute_force_minimum(&zero_potential(7), 0.0, 8).is_err());
    }

    #[test]
    fn brute_force_closed_forms() {
        // L = 1: 2 + V + g_n/2 exactly.
        let mut values = vec![3.0];
        let pot =
            PotentialRealization::from_values(values.clone(), 0.5, 3.0, 0, SamplingMode::FixedLength)
                .unwrap();
        let e = brute_force_minimum(&pot, 0.4, 8).unwrap();
        assert!((e - (2.0 + 3.0 + 0.4 / 2.0)).abs() < 1e-14);
        // L = 2, V = 0, g = 0: eigenvalue 2 - 2 cos(pi/3) = 1.
        values = vec![0.0, 0.0];
        let pot =
            PotentialRealization::from_values(values, 0.5, 1.0, 0, SamplingMode::FixedLength)
                .unwrap();
        let e = brute_force_minimum(&pot, 0.0, 1000).unwrap();
        assert!((e - 1.0).abs() < 1e-9, "{e}");
    }

    #[test]
    fn both_initializations_reach_the_same_minimum() {
        // The functional is convex in density variables, so the nonnegative
        // minimizer is unique; both starting points must land on it.
        for seed in [3u64, 19] {
            let pot = PotentialRealization::sample_fixed_length(96, 0.5, 1.0, seed).unwrap();
            let g_rho = 0.05;
            let mut config = SolverConfig {
                initial_state: InitialState::Uniform,
                tol_gradient: 1e-7,
                ..SolverConfig::default()
            };
            let from_uniform = ground_state(&pot, g_rho, &config).unwrap();
            config.initial_state = InitialState::LinearGroundState;
            let from_linear = ground_state(&pot, g_rho, &config).unwrap();
            assert!(from_uniform.residual <= 1e-7 && from_linear.residual <= 1e-7);
            assert!(
                (from_uniform.energy.total - from_linear.energy.total).abs() < 1e-9,
                "seed {seed}: {} vs {}",
                from_uniform.energy.total,
                from_linear.energy.total
            );
        }
    }

    #[test]
    fn energy_is_nondecreasing_in_the_coupling() {
        let pot = PotentialRealization::sample_fixed_length(64, 0.5, 1.0, 8).unwrap();
        let config = SolverConfig::default();
        let mut previous = ground_state(&pot, 0.0, &config).unwrap().energy.total;
        for g_rho in [1e-4, 1e-3, 1e-2, 0.1, 1.0] {
            let e = ground_state(&pot, g_rho, &config).unwrap().energy.total;
            assert!(e >= previous - 1e-12, "E({g_rho}) = {e} < {previous}");
            previous = e;
        }
    }

    #[test]
    fn solver_state_is_normalized_and_nonnegative() {
        let pot = PotentialRealization::sample_fixed_length(200, 0.5, 10.0, 21).unwrap();
        let config = SolverConfig {
            tol_gradient: 1e-7,
            ..SolverConfig::default()
        };
        let result = ground_state(&pot, 0.01, &config).unwrap();
        assert!(result.converged);
        assert!(result.state.is_nonnegative());
        assert!(result.residual <= 1e-7);
        let check = evaluate_energy(&result.state, &pot, 0.01).unwrap();
        assert!((check.total - result.energy.total).abs() < 1e-13);
    }
}
