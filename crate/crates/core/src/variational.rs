//! Explicit test functions and two-sided bounds for the small-coupling
//! regime.
//!
//! Lakes longer than the cutoff
//!
//!   l* = log_p(g rho) + log_p(log_p(g rho))
//!
//! carry half-sine waves with mass proportional to lake length; everything
//! else is zero. That state certifies the upper bound
//!
//!   3 g rho L / (4 S) + pi^2 / (l* + 1)^2,       S = sum of contributing lakes
//!
//! and the dual machinery allocates mass across lakes by water-filling: a
//! multiplier lambda is bisected so that masses
//! m_i^2 = (L_i / g rho L)(lambda - kappa^2 pi^2 / L_i^2)_+ hit a prescribed
//! total, with kappa = 1 - 1/sqrt(2). The interaction-only lower bound uses
//! the flat-profile minimum on the cutoff-eligible sites.

use crate::disorder::LakeDecomposition;
use crate::energy::{interaction_minimum, WaveFunction};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// kappa = 1 - 1/sqrt(2), the stretched-sine constant.
pub const KAPPA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

/// Logarithm base p of y, for p in (0, 1).
pub fn log_base_p(y: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", format!("{p} is not in (0, 1)")));
    }
    if !(y > 0.0) {
        return Err(Error::invalid("y", format!("log_p of nonpositive value {y}")));
    }
    Ok(y.ln() / p.ln())
}

/// Minimum lake length l* = log_p(g rho) + log_p(log_p(g rho)) for a lake to
/// carry variational mass. Requires log_p(g rho) > 1 strictly, so the inner
/// logarithm is positive.
pub fn cutoff_length(g_rho: f64, p: f64) -> Result<f64> {
    let lp = log_base_p(g_rho, p)?;
    if lp <= 1.0 {
        return Err(Error::OutOfRegime {
            message: format!(
                "log_p(g rho) = {lp:.6} must exceed 1 (g rho = {g_rho}, p = {p})"
            ),
        });
    }
    let cutoff = lp + log_base_p(lp, p)?;
    if cutoff <= 0.0 {
        return Err(Error::OutOfRegime {
            message: format!("cutoff {cutoff:.6} is not positive (g rho = {g_rho}, p = {p})"),
        });
    }
    Ok(cutoff)
}

/// Mass target 1 - 1/sqrt(log_p(g rho)) - 1/(b log_p(g rho)), the fraction
/// of the state the short-lake machinery is expected to capture, clamped to
/// [0, 1]. The O(1) coefficients are set to 1.
pub fn default_norm_target(g_rho: f64, p: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::invalid("b", format!("{b} is not a positive real")));
    }
    let lp = log_base_p(g_rho, p)?;
    if lp <= 1.0 {
        return Err(Error::OutOfRegime {
            message: format!("log_p(g rho) = {lp:.6} must exceed 1"),
        });
    }
    Ok((1.0 - 1.0 / lp.sqrt() - 1.0 / (b * lp)).clamp(0.0, 1.0))
}

/// The half-sine test state: zero on barriers and short lakes, and on each
/// lake longer than l* the normalized discrete sine scaled to mass
/// m_i^2 = L_i / (sum of contributing lake lengths).
pub fn build_test_function(
    decomposition: &LakeDecomposition,
    g_rho: f64,
    p: f64,
) -> Result<WaveFunction> {
    let cutoff = cutoff_length(g_rho, p)?;
    let total: usize = decomposition.mass_above(cutoff);
    if total == 0 {
        return Err(Error::NoContributingLake { cutoff });
    }
    let mut amps = vec![0.0f64; decomposition.total_length];
    for lake in &decomposition.lakes {
        if lake.len as f64 > cutoff {
            let mass = lake.len as f64 / total as f64;
            let n = lake.len as f64 + 1.0;
            let scale = mass.sqrt() * (2.0 / n).sqrt();
            for k in 1..=lake.len {
                amps[lake.start + k - 1] = scale * (PI * k as f64 / n).sin();
            }
        }
    }
    WaveFunction::normalized(amps)
}

/// Upper bound on the ground-state energy from the sine test state, with
/// every contributing lake treated as the shortest admitted:
/// 3 g rho L / (4 S) + pi^2 / (l* + 1)^2.
pub fn upper_bound_energy(decomposition: &LakeDecomposition, g_rho: f64, p: f64) -> Result<f64> {
    let cutoff = cutoff_length(g_rho, p)?;
    let s = decomposition.mass_above(cutoff);
    if s == 0 {
        return Err(Error::NoContributingLake { cutoff });
    }
    let g_n = g_rho * decomposition.total_length as f64;
    Ok(3.0 * g_n / (4.0 * s as f64) + PI * PI / ((cutoff + 1.0) * (cutoff + 1.0)))
}

/// Sharper finite-size variant: the kinetic term is summed lake by lake
/// (mass-weighted pi^2 / (L_i + 1)^2) instead of using the shortest admitted
/// length for every lake.
pub fn upper_bound_energy_sharp(
    decomposition: &LakeDecomposition,
    g_rho: f64,
    p: f64,
) -> Result<f64> {
    let cutoff = cutoff_length(g_rho, p)?;
    let s = decomposition.mass_above(cutoff);
    if s == 0 {
        return Err(Error::NoContributingLake { cutoff });
    }
    let g_n = g_rho * decomposition.total_length as f64;
    let mut kinetic = 0.0;
    for lake in &decomposition.lakes {
        if lake.len as f64 > cutoff {
            let mass = lake.len as f64 / s as f64;
            let n = lake.len as f64 + 1.0;
            kinetic += mass * PI * PI / (n * n);
        }
    }
    Ok(3.0 * g_n / (4.0 * s as f64) + kinetic)
}

/// Interaction-only lower bound: the least interaction energy of mass
/// `norm_target` spread over the sites of lakes longer than l*.
pub fn lower_bound_energy(
    decomposition: &LakeDecomposition,
    g_rho: f64,
    p: f64,
    norm_target: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&norm_target) {
        return Err(Error::invalid(
            "norm_target",
            format!("{norm_target} is not in [0, 1]"),
        ));
    }
    let cutoff = cutoff_length(g_rho, p)?;
    let s = decomposition.mass_above(cutoff);
    if s == 0 {
        return Err(Error::NoContributingLake { cutoff });
    }
    let g_n = g_rho * decomposition.total_length as f64;
    interaction_minimum(norm_target, s, g_n)
}

/// Leading-order multiplier lambda = (kappa pi / l*)^2.
pub fn lambda_asymptotic(g_rho: f64, p: f64) -> Result<f64> {
    let cutoff = cutoff_length(g_rho, p)?;
    let r = KAPPA * PI / cutoff;
    Ok(r * r)
}

/// Water-filled mass allocation across lakes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassAllocation {
    /// m_i^2 per lake, aligned with the decomposition's lake order.
    pub masses: Vec<f64>,
    /// The bisected multiplier.
    pub lambda: f64,
    /// Minimum contributing lake length kappa pi / sqrt(lambda).
    pub cutoff: f64,
}

/// Find lambda > 0 by monotone bisection so that
/// sum_i (L_i / g rho L)(lambda - kappa^2 pi^2 / L_i^2)_+ = norm_target,
/// and return the per-lake masses. Lakes no longer than
/// kappa pi / sqrt(lambda) receive exactly zero.
pub fn water_fill(
    decomposition: &LakeDecomposition,
    g_rho: f64,
    total_length: usize,
    norm_target: f64,
) -> Result<MassAllocation> {
    if decomposition.lakes.is_empty() {
        return Err(Error::invalid("decomposition", "no lakes to fill"));
    }
    if !(norm_target > 0.0 && norm_target <= 1.0) {
        return Err(Error::invalid(
            "norm_target",
            format!("{norm_target} is not in (0, 1]"),
        ));
    }
    let g_n = g_rho * total_length as f64;
    if !(g_n > 0.0) || !g_n.is_finite() {
        return Err(Error::invalid(
            "g_rho",
            format!("coupling g rho L = {g_n} must be positive"),
        ));
    }

    let kpi_sq = KAPPA * KAPPA * PI * PI;
    let masses_at = |lambda: f64, out: &mut Vec<f64>| -> f64 {
        out.clear();
        let mut sum = 0.0;
        for lake in &decomposition.lakes {
            let len = lake.len as f64;
            let excess = lambda - kpi_sq / (len * len);
            let mass = if excess > 0.0 { len / g_n * excess } else { 0.0 };
            sum += mass;
            out.push(mass);
        }
        sum
    };

    // A bracket that is guaranteed to overshoot: filling the longest lake
    // alone to the full target.
    let longest = decomposition.lakes.iter().map(|l| l.len).max().unwrap() as f64;
    let mut lo = 0.0f64;
    let mut hi = kpi_sq / (longest * longest) + g_n * norm_target / longest;
    let mut masses = Vec::with_capacity(decomposition.lakes.len());
    let mut lambda = hi;
    for _ in 0..500 {
        lambda = 0.5 * (lo + hi);
        let sum = masses_at(lambda, &mut masses);
        if (sum - norm_target).abs() <= 1e-13 {
            break;
        }
        if sum < norm_target {
            lo = lambda;
        } else {
            hi = lambda;
        }
        if hi - lo <= f64::EPSILON * lambda.max(f64::MIN_POSITIVE) {
            lambda = hi;
            break;
        }
    }
    let achieved = masses_at(lambda, &mut masses);
    if (achieved - norm_target).abs() > 1e-10 {
        return Err(Error::BisectionFailure {
            lo,
            hi,
            achieved,
            target: norm_target,
        });
    }
    Ok(MassAllocation {
        masses,
        lambda,
        cutoff: KAPPA * PI / lambda.sqrt(),
    })
}
