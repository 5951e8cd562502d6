//! The four steering inequalities evaluated at given measurement settings.
//!
//! | kind     | functional                           | LHS bound                  | violated when |
//! |----------|--------------------------------------|----------------------------|---------------|
//! | Linear   | `|sum_i <A_i x B_i>|`                | `sqrt m`                   | value > bound |
//! | Entropic | conditional Tsallis entropy sum      | `m ln_q(m d / (m - 1 + d))`| value < bound |
//! | RotInv   | trace norm of the correlation matrix | `sqrt m`                   | value > bound |
//! | DimBound | `|det D|` of the data matrix         | see [`DbThreshold`]        | value > bound |
//!
//! The linear functional is kept raw (bound `sqrt m`). The optimised values
//! used by the measures are quoted in the `1/sqrt m` normalised convention,
//! where the bound is 1; both give the same measure because numerator and
//! denominator scale together.

use std::fmt;

use crate::error::{Error, Result};
use crate::measurements::{
    check_settings, correlation_matrix, data_matrix, probability_table,
    Direction, OrthogonalTriad, ProbabilityTable, OUTCOMES,
};
use crate::linalg::herm2_eigenvalues;
use crate::qstate::DensityMatrix;
use nalgebra::Vector3;

/// Slack applied to the strict inequality of every violation test.
pub const VIOLATION_SLACK: f64 = 1e-12;

/// Qubit dimension entering the entropic and dimension-bounded thresholds.
const QUBIT_DIM: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CriterionKind {
    Linear,
    Entropic,
    RotInv,
    DimBound,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 4] = [Self::Linear, Self::Entropic, Self::RotInv, Self::DimBound];

    pub fn name(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Entropic => "entropic",
            Self::RotInv => "rotinv",
            Self::DimBound => "dimbound",
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationSide {
    GreaterViolates,
    SmallerViolates,
}

/// Threshold used for the dimension-bounded criterion.
///
/// `Printed` is the closed-form bound `(1/sqrt d)((sqrt(2d) - 1)/(m sqrt d))^m`
/// at `d = 2, m = 3`, i.e. 1/108. `MeasureImplied` is `1/(3 sqrt 3)`, the
/// value at which the dimension-bounded measure switches on; it is the one
/// consistent with the Werner steering threshold `w = 1/sqrt 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbThreshold {
    Printed,
    MeasureImplied,
}

impl DbThreshold {
    pub fn value(self) -> f64 {
        match self {
            Self::Printed => dimbound_printed_bound(3),
            Self::MeasureImplied => 1.0 / (3.0 * 3f64.sqrt()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Printed => "printed",
            Self::MeasureImplied => "measure-implied",
        }
    }

    fn other(self) -> Self {
        match self {
            Self::Printed => Self::MeasureImplied,
            Self::MeasureImplied => Self::Printed,
        }
    }
}

/// `(1/sqrt d)((sqrt(2d) - 1)/(m sqrt d))^m` for a qubit.
pub fn dimbound_printed_bound(m: usize) -> f64 {
    let d = QUBIT_DIM;
    ((2.0 * d).sqrt() - 1.0).powi(m as i32) / (m as f64 * d.sqrt()).powi(m as i32) / d.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub kind: CriterionKind,
    pub m: usize,
    /// Tsallis parameter, entropic criterion only.
    pub q: Option<f64>,
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
    pub side: ViolationSide,
    /// The entropic bound only holds for mutually unbiased settings; set when
    /// the caller is responsible for that.
    pub assumes_unbiased: bool,
    /// Dimension-bounded criterion: which threshold `bound` is, and the other one.
    pub db_threshold: Option<DbThreshold>,
    pub alternative_bound: Option<f64>,
}

impl CriterionReport {
    fn new(kind: CriterionKind, m: usize, value: f64, bound: f64, side: ViolationSide) -> Self {
        Self {
            kind,
            m,
            q: None,
            value,
            bound,
            violated: is_violated(value, bound, side),
            side,
            assumes_unbiased: false,
            db_threshold: None,
            alternative_bound: None,
        }
    }

    /// Distance past the bound in the violating direction (negative if not violated).
    pub fn violation_margin(&self) -> f64 {
        match self.side {
            ViolationSide::GreaterViolates => self.value - self.bound,
            ViolationSide::SmallerViolates => self.bound - self.value,
        }
    }
}

pub fn is_violated(value: f64, bound: f64, side: ViolationSide) -> bool {
    match side {
        ViolationSide::GreaterViolates => value > bound + VIOLATION_SLACK,
        ViolationSide::SmallerViolates => value < bound - VIOLATION_SLACK,
    }
}

/// `|sum_i <A_i x B_i>|` against `sqrt m`.
pub fn f_linear(rho: &DensityMatrix, alice: &OrthogonalTriad, bob: &OrthogonalTriad, m: usize) -> Result<CriterionReport> {
    let corr = correlation_matrix(rho, alice, bob, m)?.0;
    let value = corr.diagonal().sum().abs();
    Ok(CriterionReport::new(CriterionKind::Linear, m, value, (m as f64).sqrt(), ViolationSide::GreaterViolates))
}

/// General linear bound `max_{a_i = +-1} lambda_max(sum_i a_i v_i . sigma)`
/// over Bob's directions.
pub fn linear_bound_general(bob: &[Direction], m: usize) -> Result<f64> {
    check_settings(m, &[1, 2, 3], "1, 2 or 3")?;
    if bob.len() < m {
        return Err(Error::BadSettingCount { m: bob.len(), expected: "at least m directions" });
    }
    let mut best = f64::NEG_INFINITY;
    for signs in 0..(1u32 << m) {
        let mut op = crate::linalg::C2::zeros();
        for (i, v) in bob.iter().take(m).enumerate() {
            let s = if signs >> i & 1 == 0 { 1.0 } else { -1.0 };
            op += v.observable() * num_complex::Complex64::from(s);
        }
        best = best.max(herm2_eigenvalues(&op).1);
    }
    Ok(best)
}

/// `ln_q(p) = (p^(1-q) - 1)/(1 - q)`.
pub fn tsallis_log(p: f64, q: f64) -> f64 {
    (p.powf(1.0 - q) - 1.0) / (1.0 - q)
}

/// `m ln_q(m d/(m - 1 + d))` with `d = 2`.
pub fn entropic_bound(m: usize, q: f64) -> f64 {
    let m = m as f64;
    m * tsallis_log(m * QUBIT_DIM / (m - 1.0 + QUBIT_DIM), q)
}

pub fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 && q <= 2.0 && (q - 1.0).abs() > 1e-12 {
        Ok(())
    } else {
        Err(Error::QOutOfRange { q })
    }
}

/// Conditional Tsallis functional from a probability table:
/// `(1/(q-1)) sum_i [1 - sum_ab p_ab^q / p_a^(q-1)]`.
pub fn entropic_value(table: &ProbabilityTable, q: f64) -> Result<f64> {
    check_q(q)?;
    let mut total = 0.0;
    for (i, (joint, marginals)) in table.joint.iter().zip(&table.alice_marginals).enumerate() {
        let mut s = 0.0;
        for (ka, row) in joint.iter().enumerate() {
            let pa = marginals[ka];
            for &pab in row {
                if pab <= 0.0 {
                    continue;
                }
                if pa < 1e-12 {
                    return Err(Error::DegenerateMarginal { setting: i, outcome: OUTCOMES[ka], marginal: pa, joint: pab });
                }
                s += pab.powf(q) / pa.powf(q - 1.0);
            }
        }
        total += 1.0 - s;
    }
    Ok(total / (q - 1.0))
}

/// Entropic criterion with Alice axis `i` paired to Bob axis `i`.
pub fn f_entropic(
    rho: &DensityMatrix,
    alice: &OrthogonalTriad,
    bob: &OrthogonalTriad,
    m: usize,
    q: f64,
) -> Result<CriterionReport> {
    check_q(q)?;
    let table = probability_table(rho, alice, bob, m)?;
    entropic_report(&table, m, q)
}

fn entropic_report(table: &ProbabilityTable, m: usize, q: f64) -> Result<CriterionReport> {
    let value = entropic_value(table, q)?;
    let mut report = CriterionReport::new(CriterionKind::Entropic, m, value, entropic_bound(m, q), ViolationSide::SmallerViolates);
    report.q = Some(q);
    report.assumes_unbiased = true;
    Ok(report)
}

/// Trace norm of the correlation matrix against `sqrt m`.
pub fn f_rotinv(rho: &DensityMatrix, alice: &OrthogonalTriad, bob: &OrthogonalTriad, m: usize) -> Result<CriterionReport> {
    let corr = correlation_matrix(rho, alice, bob, m)?.0;
    let value = corr.singular_values().sum();
    Ok(CriterionReport::new(CriterionKind::RotInv, m, value, (m as f64).sqrt(), ViolationSide::GreaterViolates))
}

/// `|det D|` against the printed 1/108 bound.
pub fn f_dimbound(rho: &DensityMatrix, alice: &OrthogonalTriad, bob: &OrthogonalTriad, m: usize) -> Result<CriterionReport> {
    f_dimbound_with(rho, alice, bob, m, DbThreshold::Printed)
}

pub fn f_dimbound_with(
    rho: &DensityMatrix,
    alice: &OrthogonalTriad,
    bob: &OrthogonalTriad,
    m: usize,
    threshold: DbThreshold,
) -> Result<CriterionReport> {
    let d = data_matrix(rho, alice, bob, m)?.0;
    let value = d.determinant().abs();
    let mut report = CriterionReport::new(CriterionKind::DimBound, m, value, threshold.value(), ViolationSide::GreaterViolates);
    report.db_threshold = Some(threshold);
    report.alternative_bound = Some(threshold.other().value());
    Ok(report)
}

/// Optimised linear functional in the `1/sqrt m` normalised convention:
/// `sqrt(c^2 - c_min^2)` for two settings, `c` for three.
pub fn linear_optimum_normalized(c: &Vector3<f64>, m: usize) -> Result<f64> {
    check_settings(m, &[2, 3], "2 or 3")?;
    let c2 = c.norm_squared();
    Ok(match m {
        2 => {
            let c_min = c.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
            (c2 - c_min * c_min).max(0.0).sqrt()
        }
        _ => c2.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{werner, WernerParameter};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(x: f64) -> DensityMatrix {
        werner(WernerParameter::new(x).unwrap())
    }

    const SQRT3: f64 = 1.7320508075688772;

    #[test]
    fn linear_werner_examples() {
        let p = OrthogonalTriad::pauli();
        let r = f_linear(&w(0.8), &p, &p, 3).unwrap();
        assert!((r.value - 2.4).abs() < 1e-13 && (r.bound - SQRT3).abs() < 1e-15 && r.violated);
        let r = f_linear(&w(0.5), &p, &p, 3).unwrap();
        assert!((r.value - 1.5).abs() < 1e-13 && !r.violated);
        let triad = OrthogonalTriad::haar_random(&mut ChaCha8Rng::seed_from_u64(4));
        let r = f_linear(&DensityMatrix::maximally_mixed(), &triad, &p, 3).unwrap();
        assert!(r.value.abs() < 1e-15 && !r.violated);
        assert!(matches!(f_linear(&w(0.5), &p, &p, 4), Err(Error::BadSettingCount { .. })));
    }

    #[test]
    fn general_linear_bound() {
        let p = OrthogonalTriad::pauli();
        assert!((linear_bound_general(&p.axes(3), 3).unwrap() - SQRT3).abs() < 1e-14);
        assert!((linear_bound_general(&p.axes(2), 2).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let u = OrthogonalTriad::haar_random(&mut ChaCha8Rng::seed_from_u64(8)).axis(1);
        assert!((linear_bound_general(&[u], 1).unwrap() - 1.0).abs() < 1e-14);
        assert!((linear_bound_general(&[u, u], 2).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn entropic_bound_at_q2() {
        assert!((entropic_bound(3, 2.0) - 1.0).abs() < 1e-15);
        assert!((entropic_bound(2, 2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn entropic_werner_examples() {
        let p = OrthogonalTriad::pauli();
        for x in [0.0, 0.3, 0.5, 0.57, 0.58, 0.8, 1.0] {
            let r = f_entropic(&w(x), &p, &p, 3, 2.0).unwrap();
            assert!((r.value - 1.5 * (1.0 - x * x)).abs() < 1e-13, "w = {x}");
            assert!((r.bound - 1.0).abs() < 1e-15);
            assert_eq!(r.violated, x > 1.0 / SQRT3, "w = {x}");
            assert_eq!(r.side, ViolationSide::SmallerViolates);
        }
        let r = f_entropic(&DensityMatrix::singlet(), &p, &p, 3, 2.0).unwrap();
        assert!(r.value.abs() < 1e-15 && r.violated);
    }

    #[test]
    fn entropic_maximally_mixed_any_q() {
        let p = OrthogonalTriad::pauli();
        for q in [0.3, 0.5, 1.5, 2.0] {
            let r = f_entropic(&DensityMatrix::maximally_mixed(), &p, &p, 3, q).unwrap();
            let want = 3.0 / (q - 1.0) * (1.0 - 4.0 * 0.25f64.powf(q) / 0.5f64.powf(q - 1.0));
            assert!((r.value - want).abs() < 1e-13, "q = {q}");
        }
        let r = f_entropic(&DensityMatrix::maximally_mixed(), &p, &p, 3, 2.0).unwrap();
        assert!((r.value - 1.5).abs() < 1e-15 && !r.violated);
    }

    #[test]
    fn entropic_rejects_bad_q() {
        let p = OrthogonalTriad::pauli();
        for q in [0.0, 1.0, 2.5, -1.0, f64::NAN] {
            assert!(matches!(f_entropic(&w(0.5), &p, &p, 3, q), Err(Error::QOutOfRange { .. })));
        }
    }

    #[test]
    fn entropic_degenerate_marginal() {
        // Alice's marginal p_- vanishes but the table carries mass there.
        let table = ProbabilityTable { joint: vec![[[0.5, 0.5], [1e-10, 0.0]]], alice_marginals: vec![[1.0, 0.0]] };
        assert!(matches!(entropic_value(&table, 2.0), Err(Error::DegenerateMarginal { setting: 0, outcome: -1, .. })));
        // zero joint with zero marginal contributes nothing
        let table = ProbabilityTable { joint: vec![[[0.5, 0.5], [0.0, 0.0]]], alice_marginals: vec![[1.0, 0.0]] };
        assert!((entropic_value(&table, 2.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rotinv_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for x in [0.2, 0.8] {
            for _ in 0..10 {
                let a = OrthogonalTriad::haar_random(&mut rng);
                let b = OrthogonalTriad::haar_random(&mut rng);
                let r = f_rotinv(&w(x), &a, &b, 3).unwrap();
                assert!((r.value - 3.0 * x).abs() < 1e-12);
                assert_eq!(r.violated, x == 0.8);
            }
        }
        let p = OrthogonalTriad::pauli();
        assert!(f_rotinv(&DensityMatrix::maximally_mixed(), &p, &p, 3).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn dimbound_examples() {
        let p = OrthogonalTriad::pauli();
        for x in [0.0, 0.3, 0.7, 1.0] {
            let r = f_dimbound(&w(x), &p, &p, 3).unwrap();
            assert!((r.value - x.powi(3)).abs() < 1e-14);
        }
        assert!((dimbound_printed_bound(3) - 1.0 / 108.0).abs() < 1e-17);
        let r = f_dimbound(&w(0.3), &p, &p, 3).unwrap();
        assert_eq!(r.db_threshold, Some(DbThreshold::Printed));
        assert!(r.violated, "0.027 exceeds 1/108");
        assert!((r.alternative_bound.unwrap() - 1.0 / (3.0 * SQRT3)).abs() < 1e-15);
        let r = f_dimbound_with(&w(0.3), &p, &p, 3, DbThreshold::MeasureImplied).unwrap();
        assert!(!r.violated);
        assert!(matches!(f_dimbound(&w(0.3), &p, &p, 2), Err(Error::BadSettingCount { .. })));
    }
}
