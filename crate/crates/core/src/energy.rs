//! The per-particle energy functional on the lattice.
//!
//! For a normalized state phi on interior sites 1..L with Dirichlet walls
//! (phi = 0 at sites 0 and L+1) the energy splits into
//!
//!   kinetic      sum over all L+1 bonds of (phi(j+1) - phi(j))^2
//!   potential    sum over sites of V(x) phi(x)^2
//!   interaction  (g rho L / 2) sum over sites of phi(x)^4
//!
//! Each bond is counted once. The interaction coefficient is the single
//! number g*rho*L (particle number times coupling in the mean-field
//! normalization); callers pass g*rho and the evaluator multiplies by the
//! lattice size. Sums use Neumaier compensation so 1e-12 tolerances survive
//! lattices of 10^5 sites.

use crate::disorder::PotentialRealization;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Compensated (Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Double-double value: hi + lo with |lo| much smaller than ulp-scale of hi.
/// The solver compares energies at this precision; near a minimum the true
/// decrease per step is far below one ulp of the total.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

// Veltkamp split for Dekker's exact product; valid for the magnitudes this
// crate handles (|a| well below 1e300).
#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = 134_217_729.0 * a; // 2^27 + 1
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Exact product as hi + lo, without relying on hardware FMA.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, err)
}

impl Dd {
    #[inline]
    pub fn from_kahan(k: &Kahan) -> Dd {
        Dd {
            hi: k.sum,
            lo: k.carry,
        }
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        Dd {
            hi: s,
            lo: e + self.lo + other.lo,
        }
    }

    #[inline]
    pub fn scale(self, c: f64) -> Dd {
        let (p, e) = two_prod(self.hi, c);
        Dd {
            hi: p,
            lo: e + self.lo * c,
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    /// self - other, collapsed to f64; exact to roughly 1e-32 relative.
    #[inline]
    pub fn diff(self, other: Dd) -> f64 {
        (self.hi - other.hi) + (self.lo - other.lo)
    }

    #[inline]
    pub fn div(self, d: Dd) -> Dd {
        let q1 = self.hi / d.hi;
        let r1 = self.add(d.scale(-q1));
        let q2 = r1.hi / d.hi;
        let r2 = r1.add(d.scale(-q2));
        let q3 = r2.hi / d.hi;
        let (s, e) = two_sum(q1, q2);
        Dd { hi: s, lo: e + q3 }
    }

    #[inline]
    fn from_prod(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd {
            hi: p,
            lo: e + self.hi * o.lo + self.lo * o.hi,
        }
    }
}

/// The scale-invariant energy F(v) = (K + P)/|v|^2 + (g_n/2) Q/|v|^4 of an
/// unnormalized vector, at double-double precision.
///
/// The solver's line search compares candidates through this functional on
/// the raw stepped vector: renormalizing a state perturbs every component
/// by an ulp, which injects energy noise of order 1e-16 — far above the
/// decreases that must be resolved near convergence. Evaluating the scale
/// factor analytically keeps the zero-step baseline bit-exact.
pub(crate) fn rescaled_energy_dd(raw: &[f64], potential: &[f64], g_n: f64) -> Dd {
    let mut kinetic = Kahan::default();
    let mut pot = Kahan::default();
    let mut quartic = Kahan::default();
    let mut nrm = Kahan::default();
    let mut prev = 0.0;
    for (&a, &v) in raw.iter().zip(potential) {
        let d = a - prev;
        kinetic.add(d * d);
        let sq = a * a;
        if v != 0.0 {
            pot.add(v * sq);
        }
        quartic.add(sq * sq);
        nrm.add(sq);
        prev = a;
    }
    kinetic.add(prev * prev);
    let n = Dd::from_kahan(&nrm);
    let quadratic = Dd::from_kahan(&kinetic).add(Dd::from_kahan(&pot)).div(n);
    let quartic = Dd::from_kahan(&quartic)
        .scale(0.5 * g_n)
        .div(n)
        .div(n);
    quadratic.add(quartic)
}

/// Like `rescaled_energy_dd` but with every per-site term formed exactly
/// (Dekker products), so the value is a smooth function of the state down
/// to ~1e-30 relative. Roughly 8x the cost; the solver switches to it only
/// in the endgame of very tight gradient tolerances, where the per-term
/// rounding of the fast path (~1e-17 per site) would freeze the residual
/// around 1e-8.
pub(crate) fn rescaled_energy_dd_exact(raw: &[f64], potential: &[f64], g_n: f64) -> Dd {
    let mut kinetic = Dd::default();
    let mut pot = Dd::default();
    let mut quartic = Dd::default();
    let mut nrm = Dd::default();
    let mut prev = 0.0f64;
    for (&a, &v) in raw.iter().zip(potential) {
        let (d_hi, d_lo) = two_sum(a, -prev);
        let d = Dd { hi: d_hi, lo: d_lo };
        kinetic = kinetic.add(d.mul(d));
        let sq = Dd::from_prod(a, a);
        if v != 0.0 {
            pot = pot.add(sq.scale(v));
        }
        quartic = quartic.add(sq.mul(sq));
        nrm = nrm.add(sq);
        prev = a;
    }
    kinetic = kinetic.add(Dd::from_prod(prev, prev));
    let quadratic = kinetic.add(pot).div(nrm);
    let quartic = quartic.scale(0.5 * g_n).div(nrm).div(nrm);
    quadratic.add(quartic)
}

#[inline]
pub(crate) fn compensated_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = Kahan::default();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.total()
}

#[inline]
pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    compensated_dot(a, a)
}

/// A state on the interior sites, unit-normalized to within 1e-12.
///
/// Unnormalized scratch vectors stay plain `Vec<f64>`; this type certifies
/// the normalization invariant at construction. Amplitudes may carry signs
/// (ground-state candidates are nonnegative, but sign-flip experiments need
/// general real states).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WaveFunction {
    amps: Vec<f64>,
}

pub(crate) const NORM_TOL: f64 = 1e-12;

impl WaveFunction {
    /// Accept amplitudes already normalized to within 1e-12.
    pub fn from_normalized(amps: Vec<f64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::invalid("amplitudes", "state must have at least 1 site"));
        }
        if amps.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("amplitudes", "non-finite amplitude"));
        }
        let deviation = (norm_sq(&amps).sqrt() - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(WaveFunction { amps })
    }

    /// Normalize a raw vector. Errors on zero or non-finite norm.
    pub fn normalized(mut raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::invalid("amplitudes", "state must have at least 1 site"));
        }
        let norm = norm_sq(&raw).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid(
                "amplitudes",
                format!("cannot normalize a vector of norm {norm}"),
            ));
        }
        for a in &mut raw {
            *a /= norm;
        }
        Ok(WaveFunction { amps: raw })
    }

    /// Uniform positive state 1/sqrt(L).
    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("length", "state must have at least 1 site"));
        }
        let a = 1.0 / (len as f64).sqrt();
        Ok(WaveFunction { amps: vec![a; len] })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.amps.iter().all(|&a| a >= 0.0)
    }

    pub(crate) fn into_amplitudes(self) -> Vec<f64> {
        self.amps
    }
}

/// Kinetic / potential / interaction split of the energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub interaction: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(kinetic: f64, potential: f64, interaction: f64) -> Self {
        EnergyBreakdown {
            kinetic,
            potential,
            interaction,
            total: kinetic + potential + interaction,
        }
    }
}

/// Unchecked evaluation on raw amplitudes with an explicit coupling
/// g_n = g rho L. The hot path for the solver.
pub(crate) fn breakdown_raw(amps: &[f64], potential: &[f64], g_n: f64) -> EnergyBreakdown {
    breakdown_with_dd(amps, potential, g_n).0
}

/// Breakdown plus the total at double-double precision, for the solver's
/// line search.
pub(crate) fn breakdown_with_dd(
    amps: &[f64],
    potential: &[f64],
    g_n: f64,
) -> (EnergyBreakdown, Dd) {
    let mut kinetic = Kahan::default();
    let mut pot = Kahan::default();
    let mut quartic = Kahan::default();
    let mut prev = 0.0;
    for (&a, &v) in amps.iter().zip(potential) {
        let d = a - prev;
        kinetic.add(d * d);
        let sq = a * a;
        if v != 0.0 {
            pot.add(v * sq);
        }
        quartic.add(sq * sq);
        prev = a;
    }
    // Closing Dirichlet bond to the right wall.
    kinetic.add(prev * prev);
    let interaction = Dd::from_kahan(&quartic).scale(0.5 * g_n);
    let total = Dd::from_kahan(&kinetic)
        .add(Dd::from_kahan(&pot))
        .add(interaction);
    (
        EnergyBreakdown::new(kinetic.total(), pot.total(), interaction.value()),
        total,
    )
}

/// Gradient of the functional at raw amplitudes:
///   2 [ (2 phi(x) - phi(x-1) - phi(x+1)) + V(x) phi(x) + g_n phi(x)^3 ]
/// with Dirichlet neighbors at the walls.
pub(crate) fn gradient_raw(amps: &[f64], potential: &[f64], g_n: f64, out: &mut Vec<f64>) {
    let l = amps.len();
    out.clear();
    out.reserve(l);
    for x in 0..l {
        let left = if x > 0 { amps[x - 1] } else { 0.0 };
        let right = if x + 1 < l { amps[x + 1] } else { 0.0 };
        let a = amps[x];
        out.push(2.0 * ((2.0 * a - left - right) + potential[x] * a + g_n * a * a * a));
    }
}

fn check_dims(phi: &WaveFunction, potential: &PotentialRealization) -> Result<()> {
    if phi.len() != potential.len() {
        return Err(Error::DimensionMismatch {
            state: phi.len(),
            potential: potential.len(),
        });
    }
    Ok(())
}

fn check_g_rho(g_rho: f64) -> Result<()> {
    if !(g_rho >= 0.0) || !g_rho.is_finite() {
        return Err(Error::invalid("g_rho", format!("{g_rho} is not a nonnegative real")));
    }
    Ok(())
}

/// Evaluate the functional on a normalized state. The interaction
/// coefficient is g_rho * L with L the lattice size.
pub fn evaluate_energy(
    phi: &WaveFunction,
    potential: &PotentialRealization,
    g_rho: f64,
) -> Result<EnergyBreakdown> {
    check_dims(phi, potential)?;
    check_g_rho(g_rho)?;
    let deviation = (norm_sq(phi.amplitudes()).sqrt() - 1.0).abs();
    if deviation > NORM_TOL {
        return Err(Error::NotNormalized { deviation });
    }
    let g_n = g_rho * potential.len() as f64;
    Ok(breakdown_raw(phi.amplitudes(), potential.values(), g_n))
}

/// Gradient of the functional at a normalized state (not projected onto the
/// sphere tangent; the solver does that).
pub fn energy_gradient(
    phi: &WaveFunction,
    potential: &PotentialRealization,
    g_rho: f64,
) -> Result<Vec<f64>> {
    check_dims(phi, potential)?;
    check_g_rho(g_rho)?;
    let g_n = g_rho * potential.len() as f64;
    let mut out = Vec::new();
    gradient_raw(phi.amplitudes(), potential.values(), g_n, &mut out);
    Ok(out)
}

/// Least possible interaction energy of squared-norm `norm_sq` spread over
/// `site_count` sites: (g_n / 2) norm_sq^2 / site_count, attained by the
/// flat profile (Cauchy-Schwarz).
pub fn interaction_minimum(norm_sq: f64, site_count: usize, g_n: f64) -> Result<f64> {
    if site_count == 0 {
        return Err(Error::invalid("site_count", "cannot spread mass over 0 sites"));
    }
    Ok(0.5 * g_n * norm_sq * norm_sq / site_count as f64)
}
