//! Monte Carlo volume of violations over random orthogonal measurement triads.
//!
//! Each sample draws independent Haar triads for Alice and Bob and pairs
//! Alice's axis `i` with Bob's axis `i`. Samples are split into fixed-size
//! chunks, each with its own ChaCha stream derived from the seed and the chunk
//! index, so counts do not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::criteria::{check_q, f_dimbound_with, f_entropic, f_linear, f_rotinv, CriterionKind, DbThreshold};
use crate::error::{Error, Result};
use crate::measurements::{check_settings, OrthogonalTriad};
use crate::qstate::{werner, DensityMatrix, WernerParameter};

pub const CHUNK_SIZE: usize = 1024;
pub const MIN_SAMPLES: usize = 100;
pub const DEFAULT_Q: f64 = 2.0;
pub const SAMPLING_NAME: &str = "independent-haar";

/// Two-sided 95 % normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Criterion evaluated per sample, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolumeCriterion {
    Linear,
    Entropic { q: f64 },
    RotInv,
    DimBound { threshold: DbThreshold },
}

impl VolumeCriterion {
    pub fn kind(&self) -> CriterionKind {
        match self {
            Self::Linear => CriterionKind::Linear,
            Self::Entropic { .. } => CriterionKind::Entropic,
            Self::RotInv => CriterionKind::RotInv,
            Self::DimBound { .. } => CriterionKind::DimBound,
        }
    }

    /// Default parameters: `q = 2`, measure-implied dimension-bounded threshold.
    pub fn from_kind(kind: CriterionKind) -> Self {
        match kind {
            CriterionKind::Linear => Self::Linear,
            CriterionKind::Entropic => Self::Entropic { q: DEFAULT_Q },
            CriterionKind::RotInv => Self::RotInv,
            CriterionKind::DimBound => Self::DimBound { threshold: DbThreshold::MeasureImplied },
        }
    }

    fn check(&self, m: usize) -> Result<()> {
        match self {
            Self::DimBound { .. } => check_settings(m, &[3], "3").map(|_| ()),
            Self::Entropic { q } => {
                check_settings(m, &[2, 3], "2 or 3")?;
                check_q(*q)
            }
            _ => check_settings(m, &[2, 3], "2 or 3").map(|_| ()),
        }
    }

    fn violated(&self, rho: &DensityMatrix, alice: &OrthogonalTriad, bob: &OrthogonalTriad, m: usize) -> Result<bool> {
        let report = match *self {
            Self::Linear => f_linear(rho, alice, bob, m)?,
            Self::Entropic { q } => f_entropic(rho, alice, bob, m, q)?,
            Self::RotInv => f_rotinv(rho, alice, bob, m)?,
            Self::DimBound { threshold } => f_dimbound_with(rho, alice, bob, m, threshold)?,
        };
        Ok(report.violated)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub criterion: VolumeCriterion,
    pub m: usize,
    pub samples: usize,
    pub violations: usize,
    pub fraction: f64,
    /// Wilson 95 % interval as distances below and above `fraction`.
    pub ci95: (f64, f64),
}

impl VolumeEstimate {
    pub fn from_counts(criterion: VolumeCriterion, m: usize, violations: usize, samples: usize) -> Self {
        let fraction = violations as f64 / samples as f64;
        let (lo, hi) = wilson_interval(violations, samples);
        Self { criterion, m, samples, violations, fraction, ci95: (fraction - lo, hi - fraction) }
    }

    pub fn lower(&self) -> f64 {
        self.fraction - self.ci95.0
    }

    pub fn upper(&self) -> f64 {
        self.fraction + self.ci95.1
    }
}

/// Wilson score interval `(lower, upper)` at 95 %.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lower = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let upper = if successes == n { 1.0 } else { (centre + half).min(1.0) };
    (lower, upper)
}

/// RNG for chunk `index` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn estimate_volume(
    rho: &DensityMatrix,
    criterion: VolumeCriterion,
    m: usize,
    n_samples: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    criterion.check(m)?;
    if n_samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples { min: MIN_SAMPLES, got: n_samples });
    }
    let chunks = n_samples.div_ceil(CHUNK_SIZE);
    let violations = (0..chunks)
        .into_par_iter()
        .map(|index| {
            let mut rng = chunk_rng(seed, index);
            let len = CHUNK_SIZE.min(n_samples - index * CHUNK_SIZE);
            let mut count = 0;
            for _ in 0..len {
                let alice = OrthogonalTriad::haar_random(&mut rng);
                let bob = OrthogonalTriad::haar_random(&mut rng);
                if criterion.violated(rho, &alice, &bob, m)? {
                    count += 1;
                }
            }
            Ok(count)
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(VolumeEstimate::from_counts(criterion, m, violations, n_samples))
}

/// Volume estimate for each Werner parameter in `w_grid`, all using `seed`.
pub fn werner_volume_sweep(
    criterion: VolumeCriterion,
    m: usize,
    w_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<(f64, VolumeEstimate)>> {
    let params = w_grid.iter().map(|&w| WernerParameter::new(w)).collect::<Result<Vec<_>>>()?;
    params
        .into_iter()
        .map(|w| Ok((w.value(), estimate_volume(&werner(w), criterion, m, n_samples, seed)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(x: f64) -> DensityMatrix {
        werner(WernerParameter::new(x).unwrap())
    }

    #[test]
    fn wilson_matches_hand_values() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_995).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403_832).abs() < 1e-5);
        assert!((hi - 0.596_168).abs() < 1e-5);
    }

    #[test]
    fn rotation_invariant_criteria_are_certain() {
        let est = estimate_volume(&w(0.8), VolumeCriterion::RotInv, 3, 500, 1).unwrap();
        assert_eq!(est.violations, 500);
        let est = estimate_volume(&w(0.8), VolumeCriterion::from_kind(CriterionKind::DimBound), 3, 500, 1).unwrap();
        assert_eq!(est.violations, 500);
        let est = estimate_volume(&w(0.8), VolumeCriterion::DimBound { threshold: DbThreshold::Printed }, 3, 500, 1).unwrap();
        assert_eq!(est.violations, 500);
    }

    #[test]
    fn linear_below_threshold_never_violates() {
        let est = estimate_volume(&w(0.5), VolumeCriterion::Linear, 3, 10_000, 3).unwrap();
        assert_eq!(est.fraction, 0.0);
    }

    #[test]
    fn deterministic_and_validated() {
        let a = estimate_volume(&w(1.0), VolumeCriterion::Linear, 3, 3000, 9).unwrap();
        let b = estimate_volume(&w(1.0), VolumeCriterion::Linear, 3, 3000, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.fraction > 0.0 && a.fraction < 1.0);
        assert!(matches!(
            estimate_volume(&w(1.0), VolumeCriterion::from_kind(CriterionKind::DimBound), 2, 1000, 0),
            Err(Error::BadSettingCount { .. })
        ));
        assert!(matches!(
            estimate_volume(&w(1.0), VolumeCriterion::Entropic { q: 2.5 }, 3, 1000, 0),
            Err(Error::QOutOfRange { .. })
        ));
        assert!(matches!(estimate_volume(&w(1.0), VolumeCriterion::Linear, 3, 10, 0), Err(Error::TooFewSamples { .. })));
    }
}
