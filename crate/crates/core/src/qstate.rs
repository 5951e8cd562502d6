//! Two-qubit density matrices and their Bloch parameterisation.
//!
//! A state is stored as a validated 4x4 complex matrix in the basis
//! `|00>, |01>, |10>, |11>` (Alice is the left factor). [`BlochForm`] holds
//! the local vectors and the full correlation matrix; [`CanonicalBlochForm`]
//! is the normal form reached by local rotations in which the correlation
//! matrix is diagonal. Every closed-form measure in [`crate::measures`] is
//! written in that frame.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{bloch_operator, kron, max_abs_diff4, pauli, C2, C4, ONE, ZERO};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Name of the random-state ensemble produced by [`random_state`].
pub const ENSEMBLE_NAME: &str = "hilbert-schmidt";

/// Validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: C4,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity. The stored matrix is
    /// the Hermitian part of the input.
    pub fn from_matrix(entries: C4) -> Result<Self> {
        for row in 0..4 {
            for col in 0..4 {
                let z = entries[(row, col)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        let deviation = max_abs_diff4(&entries, &entries.adjoint());
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let entries = (entries + entries.adjoint()) * Complex64::from(0.5);
        let deviation = (entries.trace() - ONE).norm();
        if deviation > TRACE_TOL {
            return Err(Error::NotUnitTrace { deviation });
        }
        let min_eigenvalue = entries.symmetric_eigenvalues().min();
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { entries })
    }

    pub fn maximally_mixed() -> Self {
        Self { entries: C4::identity() * Complex64::from(0.25) }
    }

    /// Projector onto `(|01> - |10>)/sqrt 2`.
    pub fn singlet() -> Self {
        Self { entries: singlet_projector() }
    }

    /// Pure state `|psi><psi|` from an unnormalised amplitude vector.
    pub fn pure(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::OutOfRange { what: "state norm", value: norm, range: "(0, inf)" });
        }
        let psi: Vec<Complex64> = amplitudes.iter().map(|z| z / norm).collect();
        Self::from_matrix(C4::from_fn(|i, j| psi[i] * psi[j].conj()))
    }

    pub fn matrix(&self) -> &C4 {
        &self.entries
    }

    pub fn purity(&self) -> f64 {
        (self.entries * self.entries).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Expectation value of a Hermitian two-qubit observable.
    pub fn expectation(&self, observable: &C4) -> f64 {
        (self.entries * observable).trace().re
    }

    /// Conjugate by local unitaries, `(U_A x U_B) rho (U_A x U_B)^H`.
    pub fn local_unitary(&self, alice: &C2, bob: &C2) -> Result<Self> {
        let u = kron(alice, bob);
        Self::from_matrix(u * self.entries * u.adjoint())
    }

    /// Apply proper rotations to the local Bloch frames; the rotated state has
    /// Bloch data `(R_A a, R_B b, R_A T R_B^T)`.
    pub fn rotate_local(&self, alice: &Matrix3<f64>, bob: &Matrix3<f64>) -> Result<Self> {
        self.local_unitary(&su2_from_rotation(alice), &su2_from_rotation(bob))
    }
}

fn singlet_projector() -> C4 {
    let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let psi = [ZERO, h, -h, ZERO];
    C4::from_fn(|i, j| psi[i] * psi[j].conj())
}

/// SU(2) element whose adjoint action on Bloch vectors is the rotation `r`.
pub fn su2_from_rotation(r: &Matrix3<f64>) -> C2 {
    // Axis-angle from the rotation matrix; U = cos(t/2) I - i sin(t/2) n.sigma.
    let cos_t = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let angle = cos_t.acos();
    if angle < 1e-12 {
        return C2::identity();
    }
    let axis = if std::f64::consts::PI - angle > 1e-6 {
        Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]) / (2.0 * angle.sin())
    } else {
        // Near pi the antisymmetric part vanishes; read the axis off R + I = 2 n n^T.
        let s = (r + Matrix3::identity()) * 0.5;
        let col = (0..3).max_by(|&i, &j| s[(i, i)].total_cmp(&s[(j, j)])).unwrap();
        let v = s.column(col).into_owned();
        v / v.norm()
    };
    let axis = axis / axis.norm();
    C2::identity() * Complex64::from((angle / 2.0).cos())
        - bloch_operator(&axis) * Complex64::new(0.0, (angle / 2.0).sin())
}

/// Werner mixing weight `w` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WernerParameter(f64);

impl WernerParameter {
    pub fn new(w: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&w) {
            Ok(Self(w))
        } else {
            Err(Error::OutOfRange { what: "Werner weight w", value: w, range: "[0, 1]" })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `w |psi_s><psi_s| + (1 - w)/4 I`.
pub fn werner(w: WernerParameter) -> DensityMatrix {
    let w = w.value();
    let entries = singlet_projector() * Complex64::from(w) + C4::identity() * Complex64::from((1.0 - w) / 4.0);
    DensityMatrix { entries }
}

/// Hilbert-Schmidt random state `G G^H / tr(G G^H)` with `G` a 4x4 matrix of
/// independent standard complex Gaussians.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let g = C4::from_fn(|_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let gg = g * g.adjoint();
    let gg = (gg + gg.adjoint()) * Complex64::from(0.5);
    let tr = gg.trace().re;
    DensityMatrix { entries: gg / Complex64::from(tr) }
}

/// Local Bloch vectors and the full correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochForm {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub t: Matrix3<f64>,
}

impl BlochForm {
    /// `rho = (I x I + a.sigma x I + I x b.sigma + sum_rs T_rs sigma_r x sigma_s) / 4`.
    pub fn reconstruct(&self) -> C4 {
        let id = C2::identity();
        let mut m = kron(&id, &id) + kron(&bloch_operator(&self.a), &id) + kron(&id, &bloch_operator(&self.b));
        for r in 0..3 {
            for s in 0..3 {
                m += kron(&pauli(r), &pauli(s)) * Complex64::from(self.t[(r, s)]);
            }
        }
        m * Complex64::from(0.25)
    }
}

pub fn bloch_decompose(rho: &DensityMatrix) -> BlochForm {
    let id = C2::identity();
    let a = Vector3::from_fn(|r, _| rho.expectation(&kron(&pauli(r), &id)));
    let b = Vector3::from_fn(|s, _| rho.expectation(&kron(&id, &pauli(s))));
    let t = Matrix3::from_fn(|r, s| rho.expectation(&kron(&pauli(r), &pauli(s))));
    BlochForm { a, b, t }
}

/// Bloch data after the local rotations that diagonalise the correlation
/// matrix: `a = R_A a0`, `b = R_B b0`, `diag(c) = R_A T R_B^T`.
///
/// Convention: `|c_1| >= |c_2| >= |c_3|`, `c_1, c_2 >= 0`, and `c_3` carries the
/// sign of `det T`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalBlochForm {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub c: Vector3<f64>,
    /// Rows are Alice's canonical axes expressed in the original frame.
    pub alice_rotation: Matrix3<f64>,
    pub bob_rotation: Matrix3<f64>,
}

impl CanonicalBlochForm {
    /// Builds a form directly from diagonal-frame parameters.
    pub fn from_parameters(a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64>) -> Result<Self> {
        let total = a.norm_squared() + b.norm_squared() + c.norm_squared();
        if total > 3.0 + 1e-9 {
            return Err(Error::OutOfRange { what: "a^2 + b^2 + c^2", value: total, range: "[0, 3]" });
        }
        Ok(Self { a, b, c, alice_rotation: Matrix3::identity(), bob_rotation: Matrix3::identity() })
    }

    /// Euclidean norm of the correlation vector.
    pub fn c_norm(&self) -> f64 {
        self.c.norm()
    }

    pub fn c_min(&self) -> f64 {
        self.c.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)
    }
}

pub fn canonicalize(f: &BlochForm) -> CanonicalBlochForm {
    let svd = f.t.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");

    // Stable sort keeps the original axis order among ties.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut u_sorted = Matrix3::zeros();
    let mut v_sorted = Matrix3::zeros();
    let mut c = Vector3::zeros();
    for (k, &idx) in order.iter().enumerate() {
        u_sorted.set_column(k, &u.column(idx));
        v_sorted.set_column(k, &v_t.row(idx).transpose());
        c[k] = svd.singular_values[idx];
    }
    // Make both frames proper rotations; each flip moves a sign onto c_3.
    if u_sorted.determinant() < 0.0 {
        u_sorted.column_mut(2).neg_mut();
        c[2] = -c[2];
    }
    if v_sorted.determinant() < 0.0 {
        v_sorted.column_mut(2).neg_mut();
        c[2] = -c[2];
    }
    let alice_rotation = u_sorted.transpose();
    let bob_rotation = v_sorted.transpose();
    CanonicalBlochForm {
        a: alice_rotation * f.a,
        b: bob_rotation * f.b,
        c,
        alice_rotation,
        bob_rotation,
    }
}
