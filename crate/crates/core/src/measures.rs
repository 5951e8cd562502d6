//! Closed-form steerability measures on the canonical Bloch form.
//!
//! Each measure has the shape `max[0, (F - B)/(F_max - B)]`, where `F` is the
//! criterion functional optimised over measurements, `B` its LHS bound and
//! `F_max` its value on a maximally entangled state.

use std::fmt;

use crate::error::{Error, Result};
use crate::qstate::CanonicalBlochForm;

const SQRT2: f64 = std::f64::consts::SQRT_2;
const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Tolerance on `1 - a_r^2` below which the entropic term is treated as degenerate.
pub const DEGENERATE_LOCAL_TOL: f64 = 1e-10;

/// Above-one excess tolerated before a measure is reported as inconsistent.
pub const RANGE_TOL: f64 = 1e-9;

/// Raw values below this are rounding noise at a threshold and read as zero.
pub const ZERO_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureKind {
    L2,
    L3,
    E23,
    RI3,
    DB3,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 5] = [Self::L2, Self::L3, Self::E23, Self::RI3, Self::DB3];

    pub fn name(self) -> &'static str {
        match self {
            Self::L2 => "s_l2",
            Self::L3 => "s_l3",
            Self::E23 => "s_e23",
            Self::RI3 => "s_ri3",
            Self::DB3 => "s_db3",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureValue {
    pub kind: MeasureKind,
    pub value: f64,
}

fn finish(kind: MeasureKind, raw: f64) -> Result<MeasureValue> {
    if raw > 1.0 + RANGE_TOL || raw.is_nan() {
        return Err(Error::MeasureOutOfRange { kind: kind.name(), value: raw });
    }
    let value = if raw < ZERO_SNAP { 0.0 } else { raw.min(1.0) };
    Ok(MeasureValue { kind, value })
}

/// Two settings: `max[0, (sqrt(c^2 - c_min^2) - 1)/(sqrt 2 - 1)]`.
pub fn s_linear_2(f: &CanonicalBlochForm) -> Result<MeasureValue> {
    let c_min = f.c_min();
    let opt = (f.c.norm_squared() - c_min * c_min).max(0.0).sqrt();
    finish(MeasureKind::L2, (opt - 1.0) / (SQRT2 - 1.0))
}

/// Three settings: `max[0, (c - 1)/(sqrt 3 - 1)]`.
pub fn s_linear_3(f: &CanonicalBlochForm) -> Result<MeasureValue> {
    finish(MeasureKind::L3, (f.c_norm() - 1.0) / (SQRT3 - 1.0))
}

/// Tsallis `q = 2` entropic measure with Pauli settings in the canonical frame:
/// `max{0, 1 - sum_r (1 - a_r^2 - b_r^2 - c_r^2 + 2 a_r b_r c_r)/(2(1 - a_r^2))}`.
pub fn s_entropic_23(f: &CanonicalBlochForm) -> Result<MeasureValue> {
    let mut sum = 0.0;
    for r in 0..3 {
        let (a, b, c) = (f.a[r], f.b[r], f.c[r]);
        let numerator = 1.0 - a * a - b * b - c * c + 2.0 * a * b * c;
        let denominator = 1.0 - a * a;
        sum += if denominator > DEGENERATE_LOCAL_TOL {
            numerator / (2.0 * denominator)
        } else if numerator.abs() <= DEGENERATE_LOCAL_TOL {
            // Alice's outcome along r is certain; only Bob's spread remains.
            (1.0 - b * b) / 2.0
        } else {
            return Err(Error::DegenerateLocalVector { axis: r, component: a, numerator });
        };
    }
    finish(MeasureKind::E23, 1.0 - sum)
}

/// `max[0, ((|c_1| + |c_2| + |c_3|) - sqrt 3)/(3 - sqrt 3)]`.
pub fn s_rotinv_3(f: &CanonicalBlochForm) -> Result<MeasureValue> {
    let trace_norm: f64 = f.c.iter().map(|x| x.abs()).sum();
    finish(MeasureKind::RI3, (trace_norm - SQRT3) / (3.0 - SQRT3))
}

/// `|det D|` of the canonical data matrix, `c1 c2 c3 - (a1 b1 c2 c3 + a2 b2 c1 c3 + a3 b3 c1 c2)`.
pub fn canonical_data_determinant(f: &CanonicalBlochForm) -> f64 {
    let (a, b, c) = (&f.a, &f.b, &f.c);
    (c[0] * c[1] * c[2] - (a[0] * b[0] * c[1] * c[2] + a[1] * b[1] * c[0] * c[2] + a[2] * b[2] * c[0] * c[1])).abs()
}

/// `max[0, (3 sqrt 3 |det D| - 1)/(3 sqrt 3 - 1)]`.
pub fn s_dimbound_3(f: &CanonicalBlochForm) -> Result<MeasureValue> {
    let k = 3.0 * SQRT3;
    finish(MeasureKind::DB3, (k * canonical_data_determinant(f) - 1.0) / (k - 1.0))
}

/// All five measures, in [`MeasureKind::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSet {
    pub l2: f64,
    pub l3: f64,
    pub e23: f64,
    pub ri3: f64,
    pub db3: f64,
}

impl MeasureSet {
    pub fn evaluate(f: &CanonicalBlochForm) -> Result<Self> {
        Ok(Self {
            l2: s_linear_2(f)?.value,
            l3: s_linear_3(f)?.value,
            e23: s_entropic_23(f)?.value,
            ri3: s_rotinv_3(f)?.value,
            db3: s_dimbound_3(f)?.value,
        })
    }

    pub fn get(&self, kind: MeasureKind) -> f64 {
        match kind {
            MeasureKind::L2 => self.l2,
            MeasureKind::L3 => self.l3,
            MeasureKind::E23 => self.e23,
            MeasureKind::RI3 => self.ri3,
            MeasureKind::DB3 => self.db3,
        }
    }

    pub fn values(&self) -> [f64; 5] {
        MeasureKind::ALL.map(|k| self.get(k))
    }
}

pub fn evaluate(kind: MeasureKind, f: &CanonicalBlochForm) -> Result<MeasureValue> {
    match kind {
        MeasureKind::L2 => s_linear_2(f),
        MeasureKind::L3 => s_linear_3(f),
        MeasureKind::E23 => s_entropic_23(f),
        MeasureKind::RI3 => s_rotinv_3(f),
        MeasureKind::DB3 => s_dimbound_3(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{bloch_decompose, canonicalize, werner, DensityMatrix, WernerParameter};
    use nalgebra::Vector3;

    fn werner_form(w: f64) -> CanonicalBlochForm {
        canonicalize(&bloch_decompose(&werner(WernerParameter::new(w).unwrap())))
    }

    // Hand substitution into the closed forms for a = b = 0, |c_r| = w.
    fn l2(w: f64) -> f64 {
        ((SQRT2 * w - 1.0) / (SQRT2 - 1.0)).max(0.0)
    }
    fn l3(w: f64) -> f64 {
        ((SQRT3 * w - 1.0) / (SQRT3 - 1.0)).max(0.0)
    }
    fn e23(w: f64) -> f64 {
        ((3.0 * w * w - 1.0) / 2.0).max(0.0)
    }
    fn ri3(w: f64) -> f64 {
        ((3.0 * w - SQRT3) / (3.0 - SQRT3)).max(0.0)
    }
    fn db3(w: f64) -> f64 {
        ((3.0 * SQRT3 * w.powi(3) - 1.0) / (3.0 * SQRT3 - 1.0)).max(0.0)
    }

    #[test]
    fn werner_values() {
        let f = werner_form(0.8);
        assert!((s_linear_3(&f).unwrap().value - 0.526_795_7).abs() < 1e-6);
        assert!((s_entropic_23(&f).unwrap().value - 0.46).abs() < 1e-12);
        assert!((s_rotinv_3(&f).unwrap().value - 0.526_795_7).abs() < 1e-6);
        assert!((s_dimbound_3(&f).unwrap().value - 0.395_703).abs() < 1e-6);
        for w in [0.0, 0.1, 0.25, 0.5, 0.6, 0.75, 0.9, 1.0] {
            let f = werner_form(w);
            let s = MeasureSet::evaluate(&f).unwrap();
            assert!((s.l2 - l2(w)).abs() < 1e-12, "w = {w}");
            assert!((s.l3 - l3(w)).abs() < 1e-12);
            assert!((s.e23 - e23(w)).abs() < 1e-12);
            assert!((s.ri3 - ri3(w)).abs() < 1e-12);
            assert!((s.db3 - db3(w)).abs() < 1e-12);
        }
    }

    #[test]
    fn thresholds() {
        let f = werner_form(1.0 / SQRT3);
        for k in [MeasureKind::L3, MeasureKind::E23, MeasureKind::RI3, MeasureKind::DB3] {
            assert!(evaluate(k, &f).unwrap().value < 1e-12, "{k}");
        }
        assert!(s_linear_2(&werner_form(std::f64::consts::FRAC_1_SQRT_2)).unwrap().value < 1e-12);
    }

    #[test]
    fn singlet_and_mixed_endpoints() {
        let f = canonicalize(&bloch_decompose(&DensityMatrix::singlet()));
        let s = MeasureSet::evaluate(&f).unwrap();
        for v in s.values() {
            assert!((v - 1.0).abs() < 1e-12, "{s:?}");
        }
        let f = canonicalize(&bloch_decompose(&DensityMatrix::maximally_mixed()));
        assert_eq!(MeasureSet::evaluate(&f).unwrap().values(), [0.0; 5]);
    }

    #[test]
    fn out_of_range_is_reported() {
        // Not a physical state: c = 2 along one axis.
        let f = CanonicalBlochForm::from_parameters(Vector3::zeros(), Vector3::zeros(), Vector3::new(1.7, 0.0, 0.0)).unwrap();
        assert!(s_linear_3(&f).unwrap().value > 0.9);
        let f = CanonicalBlochForm { c: Vector3::new(1.5, 1.5, 1.5), ..f };
        assert!(matches!(s_rotinv_3(&f), Err(Error::MeasureOutOfRange { .. })));
    }

    #[test]
    fn degenerate_local_vector() {
        // |00>: a = b = (1,0,0) after canonicalisation, numerator vanishes on that axis.
        let f = CanonicalBlochForm::from_parameters(Vector3::x(), Vector3::x(), Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let v = s_entropic_23(&f).unwrap().value;
        // terms: limit (1 - 1)/2 = 0, then 1/2 and 1/2
        assert_eq!(v, 0.0);
        let bad = CanonicalBlochForm::from_parameters(Vector3::x(), Vector3::x(), Vector3::zeros()).unwrap();
        assert!(matches!(s_entropic_23(&bad), Err(Error::DegenerateLocalVector { axis: 0, .. })));
    }
}
