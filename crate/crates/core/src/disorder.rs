//! Bernoulli site potentials and their lake/barrier geometry.
//!
//! A realization assigns each lattice site the value 0 (probability `p`) or
//! `b` (probability `q = 1 - p`). Maximal runs of zero sites are "lakes",
//! maximal runs of `b` sites are "barriers". Two sampling models are
//! supported: IID sites on a fixed number of sites, and a fixed count of
//! alternating geometric intervals (n lakes and n barriers), under which the
//! total length is random with mean `n / (p q)`.

use crate::error::{Error, Result};
use crate::rng::CounterRng;
use serde::{Deserialize, Serialize};

/// How a realization was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// IID Bernoulli sites on a lattice of prescribed length.
    FixedLength,
    /// n geometric lakes alternating with n geometric barriers.
    FixedIntervalCount,
}

// Distinct counter streams so the two modes never share draws.
const STREAM_FIXED_LENGTH: u64 = 0x01;
const STREAM_INTERVALS: u64 = 0x02;

/// A lattice of site potentials, each exactly 0 or `b`, plus its provenance.
///
/// Sites are indexed 0..L-1 and correspond to the interior points of the
/// box; the walls just outside carry Dirichlet conditions for every state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RealizationRecord", try_from = "RealizationRecord")]
pub struct PotentialRealization {
    values: Vec<f64>,
    b: f64,
    p: f64,
    seed: u64,
    mode: SamplingMode,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", format!("{p} is not in (0, 1)")));
    }
    Ok(())
}

fn check_b(b: f64) -> Result<()> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::invalid("b", format!("{b} is not a positive real")));
    }
    Ok(())
}

/// Geometric draw on {1, 2, ...} with success probability `1 - failure`,
/// i.e. P[x] = (1 - failure) * failure^(x-1), via inverse CDF.
fn geometric(rng: &mut CounterRng, failure: f64) -> u64 {
    let u = rng.next_f64();
    // CDF is 1 - failure^x; smallest integer x with failure^x <= 1 - u.
    let x = ((1.0 - u).ln() / failure.ln()).ceil();
    if x < 1.0 {
        1
    } else {
        x as u64
    }
}

impl PotentialRealization {
    /// Draw `length` IID sites: 0 with probability `p`, else `b`.
    pub fn sample_fixed_length(length: usize, p: f64, b: f64, seed: u64) -> Result<Self> {
        check_p(p)?;
        check_b(b)?;
        if length == 0 {
            return Err(Error::invalid("length", "lattice must have at least 1 site"));
        }
        let mut rng = CounterRng::with_stream(seed, STREAM_FIXED_LENGTH);
        let values = (0..length)
            .map(|_| if rng.next_f64() < p { 0.0 } else { b })
            .collect();
        Ok(PotentialRealization {
            values,
            b,
            p,
            seed,
            mode: SamplingMode::FixedLength,
        })
    }

    /// Draw n lakes with P[L = x] = q p^(x-1) alternating with n barriers
    /// with P[l = x] = p q^(x-1), starting with a lake. Total length is
    /// random.
    pub fn sample_fixed_interval_count(n: usize, p: f64, b: f64, seed: u64) -> Result<Self> {
        check_p(p)?;
        check_b(b)?;
        if n == 0 {
            return Err(Error::invalid("n", "at least one lake/barrier pair required"));
        }
        let q = 1.0 - p;
        let mut rng = CounterRng::with_stream(seed, STREAM_INTERVALS);
        let mut values = Vec::new();
        for _ in 0..n {
            let lake = geometric(&mut rng, p);
            let barrier = geometric(&mut rng, q);
            values.resize(values.len() + lake as usize, 0.0);
            values.resize(values.len() + barrier as usize, b);
        }
        Ok(PotentialRealization {
            values,
            b,
            p,
            seed,
            mode: SamplingMode::FixedIntervalCount,
        })
    }

    /// Rebuild a realization from explicit site values (used by derived
    /// sub-realizations and by deserialization). Every entry must be exactly
    /// 0 or `b`.
    pub fn from_values(
        values: Vec<f64>,
        p: f64,
        b: f64,
        seed: u64,
        mode: SamplingMode,
    ) -> Result<Self> {
        check_p(p)?;
        check_b(b)?;
        if values.is_empty() {
            return Err(Error::invalid("values", "lattice must have at least 1 site"));
        }
        if let Some(bad) = values.iter().find(|&&v| v != 0.0 && v != b) {
            return Err(Error::invalid(
                "values",
                format!("site value {bad} is neither 0 nor b = {b}"),
            ));
        }
        Ok(PotentialRealization {
            values,
            b,
            p,
            seed,
            mode,
        })
    }

    /// The sub-realization on sites [start, end), inheriting provenance.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.values.len() {
            return Err(Error::invalid(
                "range",
                format!("[{start}, {end}) is not a valid sub-range of {}", self.values.len()),
            ));
        }
        Ok(PotentialRealization {
            values: self.values[start..end].to_vec(),
            b: self.b,
            p: self.p,
            seed: self.seed,
            mode: self.mode,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    /// Run-length encoding of the site values, the canonical on-disk form.
    pub fn to_rle(&self) -> Vec<(f64, u64)> {
        let mut rle: Vec<(f64, u64)> = Vec::new();
        for &v in &self.values {
            match rle.last_mut() {
                Some((value, count)) if *value == v => *count += 1,
                _ => rle.push((v, 1)),
            }
        }
        rle
    }

    /// Raw CSV of site values, one `site,value` row per site.
    pub fn write_values_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "site,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", i, v)?;
        }
        Ok(())
    }

    /// Split the lattice into maximal zero runs (lakes) and maximal `b` runs
    /// (barriers). Concatenated in order they reproduce the input exactly.
    pub fn decompose_lakes(&self) -> LakeDecomposition {
        let mut lakes = Vec::new();
        let mut barriers = Vec::new();
        let mut start = 0usize;
        while start < self.values.len() {
            let is_lake = self.values[start] == 0.0;
            let mut end = start + 1;
            while end < self.values.len() && (self.values[end] == 0.0) == is_lake {
                end += 1;
            }
            let interval = Interval {
                start,
                len: end - start,
            };
            if is_lake {
                lakes.push(interval);
            } else {
                barriers.push(interval);
            }
            start = end;
        }
        LakeDecomposition {
            lakes,
            barriers,
            total_length: self.values.len(),
        }
    }
}

/// A maximal run of equal-potential sites: `len` sites starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub len: usize,
}

impl Interval {
    /// One past the last site.
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// The alternating lakes and barriers of a realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LakeDecomposition {
    pub lakes: Vec<Interval>,
    pub barriers: Vec<Interval>,
    pub total_length: usize,
}

impl LakeDecomposition {
    /// Sum of lake lengths strictly above `cutoff`.
    pub fn mass_above(&self, cutoff: f64) -> usize {
        self.lakes
            .iter()
            .filter(|l| l.len as f64 > cutoff)
            .map(|l| l.len)
            .sum()
    }

    pub fn lake_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.lakes.iter().map(|l| l.len)
    }
}

/// Expectation of the total length carried by lakes strictly longer than `x`
/// in the fixed-interval-count model with n lakes:
///
///   E[sum over lakes longer than x of L_i] = n p^floor(x) (floor(x) q + 1) / q
///
/// which is the tail sum of x P[L = x] over the geometric law
/// P[L = x] = q p^(x-1). At x = 0 this is n/q = n E[L] exactly.
pub fn expected_mass_above(x: f64, p: f64, n: u64) -> Result<f64> {
    check_p(p)?;
    let q = 1.0 - p;
    let k = x.floor();
    Ok(n as f64 * p.powf(k) * (k * q + 1.0) / q)
}

/// Flat serialization record; the run-length encoding is canonical.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub mode: SamplingMode,
    pub p: f64,
    pub b: f64,
    pub seed: u64,
    pub length: usize,
    pub values_rle: Vec<(f64, u64)>,
}

impl From<PotentialRealization> for RealizationRecord {
    fn from(r: PotentialRealization) -> Self {
        RealizationRecord {
            mode: r.mode,
            p: r.p,
            b: r.b,
            seed: r.seed,
            length: r.values.len(),
            values_rle: r.to_rle(),
        }
    }
}

impl TryFrom<RealizationRecord> for PotentialRealization {
    type Error = Error;

    fn try_from(rec: RealizationRecord) -> Result<Self> {
        let mut values = Vec::with_capacity(rec.length);
        for &(v, count) in &rec.values_rle {
            if count == 0 {
                return Err(Error::invalid("values_rle", "zero-length run"));
            }
            values.resize(values.len() + count as usize, v);
        }
        if values.len() != rec.length {
            return Err(Error::invalid(
                "values_rle",
                format!("runs sum to {} sites, header says {}", values.len(), rec.length),
            ));
        }
        PotentialRealization::from_values(values, rec.p, rec.b, rec.seed, rec.mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_length_p_one_is_rejected_but_near_one_is_all_zero() {
        assert!(PotentialRealization::sample_fixed_length(4, 1.0, 1.0, 0).is_err());
        assert!(PotentialRealization::sample_fixed_length(4, 0.0, 1.0, 0).is_err());
        // p -> 1 forces zero potential.
        let r = PotentialRealization::sample_fixed_length(4, 1.0 - 1e-12, 1.0, 3).unwrap();
        assert!(r.values().iter().all(|&v| v == 0.0));
        // p -> 0 gives all-b with probability ~ 1.
        let r = PotentialRealization::sample_fixed_length(4, 1e-9, 1.0, 3).unwrap();
        assert!(r.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn fixed_length_zero_fraction_concentrates() {
        // Binomial concentration: the zero fraction is within 3 sqrt(pq/L) of p.
        let l = 100_000;
        let r = PotentialRealization::sample_fixed_length(l, 0.5, 1.0, 42).unwrap();
        let zeros = r.values().iter().filter(|&&v| v == 0.0).count() as f64;
        let frac = zeros / l as f64;
        let sigma = (0.5 * 0.5 / l as f64).sqrt();
        assert!(
            (frac - 0.5).abs() < 3.0 * sigma,
            "zero fraction {frac} deviates from 0.5 by more than {}",
            3.0 * sigma
        );
    }

    #[test]
    fn fixed_length_is_deterministic_and_prefix_stable() {
        let a = PotentialRealization::sample_fixed_length(64, 0.3, 2.0, 9).unwrap();
        let b = PotentialRealization::sample_fixed_length(64, 0.3, 2.0, 9).unwrap();
        assert_eq!(a, b);
        // Growing the box extends the same disorder (common-random-number
        // coupling across system sizes).
        let c = PotentialRealization::sample_fixed_length(128, 0.3, 2.0, 9).unwrap();
        assert_eq!(&c.values()[..64], a.values());
    }

    #[test]
    fn interval_count_structure_is_forced_at_n_one() {
        for seed in 0..32 {
            let r = PotentialRealization::sample_fixed_interval_count(1, 0.5, 1.0, seed).unwrap();
            let d = r.decompose_lakes();
            assert_eq!(d.lakes.len(), 1);
            assert_eq!(d.barriers.len(), 1);
            assert!(d.lakes[0].len >= 1 && d.barriers[0].len >= 1);
            assert_eq!(d.lakes[0].start, 0, "realizations start with a lake");
            assert_eq!(d.barriers[0].end(), r.len(), "realizations end with a barrier");
        }
    }

    #[test]
    fn interval_count_matches_geometric_moments() {
        // Mean lake length 1/q and mean total length n/(pq), both within 3 sigma.
        let n = 10_000usize;
        let r = PotentialRealization::sample_fixed_interval_count(n, 0.5, 1.0, 7).unwrap();
        let d = r.decompose_lakes();
        assert_eq!(d.lakes.len(), n);
        assert_eq!(d.barriers.len(), n);

        let mean_lake = d.lake_lengths().sum::<usize>() as f64 / n as f64;
        // Var of geometric(q) with support {1,..} is p/q^2 = 2 at p = q = 1/2.
        let sigma_mean = (2.0f64 / n as f64).sqrt();
        assert!((mean_lake - 2.0).abs() < 3.0 * sigma_mean, "mean lake {mean_lake}");

        let per_pair = r.len() as f64 / n as f64;
        // Var(L_i + barrier_i) = 2 + 2 = 4 at p = q = 1/2.
        let sigma_pair = (4.0f64 / n as f64).sqrt();
        assert!((per_pair - 4.0).abs() < 3.0 * sigma_pair, "length per pair {per_pair}");
    }

    #[test]
    fn decompose_handles_edges() {
        let r = PotentialRealization::from_values(
            vec![0.0, 0.0, 1.0, 0.0],
            0.5,
            1.0,
            0,
            SamplingMode::FixedLength,
        )
        .unwrap();
        let d = r.decompose_lakes();
        assert_eq!(d.lakes, vec![Interval { start: 0, len: 2 }, Interval { start: 3, len: 1 }]);
        assert_eq!(d.barriers, vec![Interval { start: 2, len: 1 }]);

        let r = PotentialRealization::from_values(
            vec![1.0, 1.0],
            0.5,
            1.0,
            0,
            SamplingMode::FixedLength,
        )
        .unwrap();
        let d = r.decompose_lakes();
        assert!(d.lakes.is_empty());
        assert_eq!(d.barriers, vec![Interval { start: 0, len: 2 }]);
    }

    /// Brute-force reconstruction oracle: rebuild the site values from the
    /// decomposition alone.
    fn reconstruct(d: &LakeDecomposition, b: f64) -> Vec<f64> {
        let mut values = vec![f64::NAN; d.total_length];
        for lake in &d.lakes {
            for site in lake.start..lake.end() {
                values[site] = 0.0;
            }
        }
        for barrier in &d.barriers {
            for site in barrier.start..barrier.end() {
                values[site] = b;
            }
        }
        values
    }

    #[test]
    fn decompose_round_trips_against_reconstruction() {
        for seed in 0..1000 {
            let len = 1 + (crate::rng::splitmix64(seed) % 40) as usize;
            let r = PotentialRealization::sample_fixed_length(len, 0.4, 2.5, seed).unwrap();
            let d = r.decompose_lakes();
            assert_eq!(reconstruct(&d, 2.5), r.values(), "seed {seed}");

            // Tiling invariants: disjoint, alternating, complete.
            let mut intervals: Vec<(usize, usize, bool)> = d
                .lakes
                .iter()
                .map(|l| (l.start, l.len, true))
                .chain(d.barriers.iter().map(|l| (l.start, l.len, false)))
                .collect();
            intervals.sort_by_key(|t| t.0);
            let mut cursor = 0;
            let mut prev_kind = None;
            for (start, len, kind) in intervals {
                assert_eq!(start, cursor);
                assert!(len >= 1);
                assert_ne!(Some(kind), prev_kind, "kinds must alternate");
                cursor = start + len;
                prev_kind = Some(kind);
            }
            assert_eq!(cursor, d.total_length);
        }
    }

    #[test]
    fn expected_mass_above_closed_forms() {
        // x = 0 counts every lake: n E[L] = n / q, bit-exact.
        assert_eq!(expected_mass_above(0.0, 0.5, 100).unwrap(), 200.0);
        let p = 0.37;
        assert_eq!(
            expected_mass_above(0.0, p, 1000).unwrap(),
            1000.0 / (1.0 - p)
        );
        // Tail vanishes.
        assert!(expected_mass_above(1e4, 0.5, 100).unwrap() < 1e-300);
    }

    #[test]
    fn expected_mass_above_matches_monte_carlo() {
        // Monte Carlo oracle over 10^4 geometric draws for the x = 3 tail.
        let n = 10_000u64;
        let p = 0.5f64;
        let mut rng = CounterRng::new(1234);
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for _ in 0..n {
            let l = geometric(&mut rng, p) as f64;
            let contrib = if l > 3.0 { l } else { 0.0 };
            sum += contrib;
            sum_sq += contrib * contrib;
        }
        let expected = expected_mass_above(3.0, p, n).unwrap();
        let var = (sum_sq - sum * sum / n as f64) / (n as f64 - 1.0);
        let sigma_total = (var * n as f64).sqrt();
        assert!(
            (sum - expected).abs() < 3.0 * sigma_total,
            "MC tail mass {sum} vs expectation {expected} (3 sigma = {})",
            3.0 * sigma_total
        );
    }

    #[test]
    fn rle_serialization_round_trips() {
        let r = PotentialRealization::sample_fixed_interval_count(50, 0.5, 1.5, 11).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: PotentialRealization = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert!(json.contains("values_rle"));
    }
}
