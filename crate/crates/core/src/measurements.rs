//! Dichotomic spin measurements and the statistics they generate on a
//! two-qubit state: assemblages, correlation and data matrices, and joint
//! outcome tables.
//!
//! Outcomes are labelled `+1` and `-1`; arrays indexed by outcome use slot 0
//! for `+1`.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{bloch_operator, herm2_eigenvalues, kron, max_abs_diff2, partial_trace_a, C2};
use crate::qstate::DensityMatrix;

pub const OUTCOMES: [i8; 2] = [1, -1];

/// Unit measurement axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Vector3<f64>);

impl Direction {
    pub fn new(u: Vector3<f64>) -> Result<Self> {
        let norm = u.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitVector { norm });
        }
        Ok(Self(u))
    }

    /// Normalises `u`; fails only for the zero or non-finite vector.
    pub fn normalized(u: Vector3<f64>) -> Result<Self> {
        let norm = u.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotUnitVector { norm });
        }
        Ok(Self(u / norm))
    }

    pub fn x() -> Self {
        Self(Vector3::x())
    }

    pub fn y() -> Self {
        Self(Vector3::y())
    }

    pub fn z() -> Self {
        Self(Vector3::z())
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    /// The observable `u . sigma`.
    pub fn observable(&self) -> C2 {
        bloch_operator(&self.0)
    }
}

/// Proper rotation whose rows are three orthonormal measurement axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalTriad(Matrix3<f64>);

impl OrthogonalTriad {
    pub fn new(r: Matrix3<f64>) -> Result<Self> {
        let orthogonality = (r.transpose() * r - Matrix3::identity()).abs().max();
        let det = r.determinant();
        if orthogonality > 1e-10 || (det - 1.0).abs() > 1e-10 {
            return Err(Error::NotRotation { orthogonality, det });
        }
        Ok(Self(r))
    }

    /// The Pauli axes x, y, z.
    pub fn pauli() -> Self {
        Self(Matrix3::identity())
    }

    /// Haar-distributed rotation: Gram-Schmidt on a Gaussian matrix (the QR
    /// factor with positive diagonal), then a sign flip of one row if the
    /// determinant is negative.
    pub fn haar_random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let g = Matrix3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = g.qr();
        let (mut q, r) = qr.unpack();
        for k in 0..3 {
            if r[(k, k)] < 0.0 {
                q.column_mut(k).neg_mut();
            }
        }
        let mut rows = q.transpose();
        if rows.determinant() < 0.0 {
            rows.row_mut(0).neg_mut();
        }
        Self(rows)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn axis(&self, i: usize) -> Direction {
        Direction(self.0.row(i).transpose())
    }

    /// First `m` rows as directions.
    pub fn axes(&self, m: usize) -> Vec<Direction> {
        (0..m).map(|i| self.axis(i)).collect()
    }

    /// Triad with every axis rotated by `rotation`.
    pub fn rotated(&self, rotation: &Matrix3<f64>) -> Result<Self> {
        Self::new(self.0 * rotation.transpose())
    }
}

pub(crate) fn check_settings(m: usize, allowed: &[usize], expected: &'static str) -> Result<()> {
    if allowed.contains(&m) {
        Ok(())
    } else {
        Err(Error::BadSettingCount { m, expected })
    }
}

/// Born-rule projector `(I + a u.sigma)/2`.
pub fn projector(u: &Direction, outcome: i8) -> C2 {
    let sign = if outcome >= 0 { 1.0 } else { -1.0 };
    (C2::identity() + u.observable() * Complex64::from(sign)) * Complex64::from(0.5)
}

/// Bob's unnormalised conditional states `sigma_{a|x}`; `members[x][k]` holds
/// outcome `OUTCOMES[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    members: Vec<[C2; 2]>,
}

pub const ASSEMBLAGE_PSD_TOL: f64 = 1e-10;
pub const NO_SIGNALLING_TOL: f64 = 1e-10;
pub const ASSEMBLAGE_TRACE_TOL: f64 = 1e-9;

impl Assemblage {
    /// Validates positivity, no-signalling and unit total trace.
    pub fn new(members: Vec<[C2; 2]>) -> Result<Self> {
        if !(1..=3).contains(&members.len()) {
            return Err(Error::BadSettingCount { m: members.len(), expected: "1, 2 or 3" });
        }
        for (x, pair) in members.iter().enumerate() {
            for (k, s) in pair.iter().enumerate() {
                let herm = (s - s.adjoint()).norm();
                if herm > 1e-12 {
                    return Err(Error::InvalidAssemblage(format!("member ({}, {x}) is not Hermitian", OUTCOMES[k])));
                }
                let (lo, _) = herm2_eigenvalues(s);
                if lo < -ASSEMBLAGE_PSD_TOL {
                    return Err(Error::InvalidAssemblage(format!(
                        "member ({}, {x}) has eigenvalue {lo:.3e}",
                        OUTCOMES[k]
                    )));
                }
            }
        }
        let marginal = members[0][0] + members[0][1];
        for (x, pair) in members.iter().enumerate().skip(1) {
            let dev = max_abs_diff2(&(pair[0] + pair[1]), &marginal);
            if dev > NO_SIGNALLING_TOL {
                return Err(Error::InvalidAssemblage(format!("setting {x} signals: deviation {dev:.3e}")));
            }
        }
        let tr = marginal.trace().re;
        if (tr - 1.0).abs() > ASSEMBLAGE_TRACE_TOL {
            return Err(Error::InvalidAssemblage(format!("total trace {tr} differs from 1")));
        }
        Ok(Self { members })
    }

    pub fn settings(&self) -> usize {
        self.members.len()
    }

    /// `sigma_{a|x}` with `outcome` in {+1, -1}.
    pub fn member(&self, x: usize, outcome: i8) -> &C2 {
        &self.members[x][usize::from(outcome < 0)]
    }

    pub fn members(&self) -> &[[C2; 2]] {
        &self.members
    }

    /// Bob's reduced state `sum_a sigma_{a|0}`.
    pub fn reduced_state(&self) -> C2 {
        self.members[0][0] + self.members[0][1]
    }
}

/// Assemblage generated by Alice measuring the first `m` axes of `alice`.
pub fn assemblage(rho: &DensityMatrix, alice: &OrthogonalTriad, m: usize) -> Result<Assemblage> {
    check_settings(m, &[2, 3], "2 or 3")?;
    assemblage_from_directions(rho, &alice.axes(m))
}

/// Assemblage for arbitrary (not necessarily orthogonal) Alice axes.
pub fn assemblage_from_directions(rho: &DensityMatrix, alice: &[Direction]) -> Result<Assemblage> {
    check_settings(alice.len(), &[1, 2, 3], "1, 2 or 3")?;
    let id = C2::identity();
    let members = alice
        .iter()
        .map(|u| {
            OUTCOMES.map(|a| {
                let s = partial_trace_a(&(kron(&projector(u, a), &id) * rho.matrix()));
                (s + s.adjoint()) * Complex64::from(0.5)
            })
        })
        .collect();
    Assemblage::new(members)
}

/// `M_ij = <A_i x B_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(pub DMatrix<f64>);

pub fn correlation_matrix(
    rho: &DensityMatrix,
    alice: &OrthogonalTriad,
    bob: &OrthogonalTriad,
    m: usize,
) -> Result<CorrelationMatrix> {
    check_settings(m, &[2, 3], "2 or 3")?;
    let ua = alice.axes(m);
    let vb = bob.axes(m);
    Ok(CorrelationMatrix(DMatrix::from_fn(m, m, |i, j| {
        rho.expectation(&kron(&ua[i].observable(), &vb[j].observable()))
    })))
}

/// Data matrix with `A_0 = B_0 = I`: first row Bob's marginals, first column
/// Alice's marginals, the rest the correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(pub DMatrix<f64>);

pub fn data_matrix(
    rho: &DensityMatrix,
    alice: &OrthogonalTriad,
    bob: &OrthogonalTriad,
    m: usize,
) -> Result<DataMatrix> {
    check_settings(m, &[3], "3")?;
    let id = C2::identity();
    let mut ops_a = vec![id];
    ops_a.extend(alice.axes(m).iter().map(Direction::observable));
    let mut ops_b = vec![id];
    ops_b.extend(bob.axes(m).iter().map(Direction::observable));
    let mut d = DMatrix::from_fn(m + 1, m + 1, |i, j| rho.expectation(&kron(&ops_a[i], &ops_b[j])));
    d[(0, 0)] = 1.0;
    Ok(DataMatrix(d))
}

/// Joint outcome probabilities for the aligned pairs `(A_i, B_i)`.
/// `joint[i][ka][kb]` is `p(OUTCOMES[ka], OUTCOMES[kb])` for setting `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    pub joint: Vec<[[f64; 2]; 2]>,
    pub alice_marginals: Vec<[f64; 2]>,
}

pub fn probability_table(
    rho: &DensityMatrix,
    alice: &OrthogonalTriad,
    bob: &OrthogonalTriad,
    m: usize,
) -> Result<ProbabilityTable> {
    check_settings(m, &[2, 3], "2 or 3")?;
    Ok(probability_table_from_directions(rho, &alice.axes(m), &bob.axes(m)))
}

pub(crate) fn probability_table_from_directions(
    rho: &DensityMatrix,
    alice: &[Direction],
    bob: &[Direction],
) -> ProbabilityTable {
    let mut joint = Vec::with_capacity(alice.len());
    let mut alice_marginals = Vec::with_capacity(alice.len());
    for (u, v) in alice.iter().zip(bob) {
        let mut table = [[0.0; 2]; 2];
        for (ka, &a) in OUTCOMES.iter().enumerate() {
            for (kb, &b) in OUTCOMES.iter().enumerate() {
                let p = rho.expectation(&kron(&projector(u, a), &projector(v, b)));
                table[ka][kb] = if p < 0.0 && p >= -1e-12 { 0.0 } else { p };
            }
        }
        alice_marginals.push([table[0][0] + table[0][1], table[1][0] + table[1][1]]);
        joint.push(table);
    }
    ProbabilityTable { joint, alice_marginals }
}
