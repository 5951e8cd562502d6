//! Small fixed-size helpers shared by the state, measurement and solver code.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3};
use num_complex::Complex64;

pub type C2 = Matrix2<Complex64>;
pub type C4 = Matrix4<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pauli matrix sigma_r for r in {0, 1, 2} (x, y, z).
pub fn pauli(r: usize) -> C2 {
    match r {
        0 => C2::new(ZERO, ONE, ONE, ZERO),
        1 => C2::new(ZERO, -I, I, ZERO),
        2 => C2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {r} out of range"),
    }
}

/// u . sigma
pub fn bloch_operator(u: &Vector3<f64>) -> C2 {
    pauli(0) * Complex64::from(u[0]) + pauli(1) * Complex64::from(u[1]) + pauli(2) * Complex64::from(u[2])
}

/// Bloch vector of a 2x2 operator: v_r = Re tr(sigma_r m).
pub fn bloch_vector(m: &C2) -> Vector3<f64> {
    Vector3::from_fn(|r, _| (pauli(r) * m).trace().re)
}

pub fn kron(a: &C2, b: &C2) -> C4 {
    C4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// Tr_A of a two-qubit operator, basis index = 2 * alice + bob.
pub fn partial_trace_a(m: &C4) -> C2 {
    C2::from_fn(|b, bp| m[(b, bp)] + m[(2 + b, 2 + bp)])
}

/// Tr_B of a two-qubit operator.
pub fn partial_trace_b(m: &C4) -> C2 {
    C2::from_fn(|a, ap| m[(2 * a, 2 * ap)] + m[(2 * a + 1, 2 * ap + 1)])
}

pub fn hermitian_part(m: &C2) -> C2 {
    (m + m.adjoint()) * Complex64::from(0.5)
}

/// Eigenvalues (ascending) of a 2x2 Hermitian matrix in closed form.
pub fn herm2_eigenvalues(m: &C2) -> (f64, f64) {
    let mean = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let half_diff = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    let radius = half_diff.hypot(m[(0, 1)].norm());
    (mean - radius, mean + radius)
}

/// Eigenvector of the largest eigenvalue of a 2x2 Hermitian matrix, as a
/// Bloch direction. `None` when the eigenvalues are degenerate to `tol`.
pub fn herm2_top_direction(m: &C2, tol: f64) -> Option<Vector3<f64>> {
    // Traceless part is (v . sigma)/2 with v the Bloch vector; its top eigenvector points along v.
    let v = bloch_vector(m);
    let norm = v.norm();
    (norm > tol).then(|| v / norm)
}

/// Largest step alpha with x + alpha * dx still PSD; infinite if unbounded.
/// `x` must be positive definite.
pub fn herm2_max_step(x: &C2, dx: &C2) -> f64 {
    let l11 = x[(0, 0)].re.sqrt();
    let l21 = x[(1, 0)] / l11;
    let l22 = (x[(1, 1)].re - l21.norm_sqr()).max(f64::MIN_POSITIVE).sqrt();
    let linv = C2::new(
        Complex64::from(1.0 / l11),
        ZERO,
        -l21 / (l11 * l22),
        Complex64::from(1.0 / l22),
    );
    let w = linv * dx * linv.adjoint();
    let (lo, _) = herm2_eigenvalues(&w);
    if lo < 0.0 {
        -1.0 / lo
    } else {
        f64::INFINITY
    }
}

pub fn herm2_inverse(m: &C2) -> Option<C2> {
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    if det.abs() < f64::MIN_POSITIVE {
        return None;
    }
    let inv = Complex64::from(1.0 / det);
    Some(C2::new(m[(1, 1)] * inv, -m[(0, 1)] * inv, -m[(1, 0)] * inv, m[(0, 0)] * inv))
}

/// Re tr(a b) for Hermitian a, b.
pub fn herm_inner(a: &C2, b: &C2) -> f64 {
    (a[(0, 0)] * b[(0, 0)] + a[(0, 1)] * b[(1, 0)] + a[(1, 0)] * b[(0, 1)] + a[(1, 1)] * b[(1, 1)]).re
}

pub fn max_abs_diff4(a: &C4, b: &C4) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff2(a: &C2, b: &C2) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Column-major 3x3 from rows.
pub fn matrix_from_rows(rows: [Vector3<f64>; 3]) -> Matrix3<f64> {
    Matrix3::from_rows(&[rows[0].transpose(), rows[1].transpose(), rows[2].transpose()])
}
