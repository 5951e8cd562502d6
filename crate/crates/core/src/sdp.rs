//! Primal-dual interior-point solver for small semidefinite programs whose
//! matrix variable is block diagonal with 2x2 Hermitian blocks.
//!
//! Problems are given in dual (inequality) form
//!
//! ```text
//! maximize   b^T y
//! subject to Z = C - sum_i y_i A_i  >= 0
//! ```
//!
//! paired with the primal
//!
//! ```text
//! minimize   <C, X>
//! subject to <A_i, X> = b_i,  X >= 0
//! ```
//!
//! The search direction is the HKM direction with a Mehrotra
//! predictor-corrector step. The start point `X = Z = I, y = 0` need not be
//! feasible.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{herm2_inverse, herm2_max_step, herm_inner, hermitian_part, C2};

/// `A_i` restricted to one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTerm {
    pub block: usize,
    pub matrix: C2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualProblem {
    pub constant: Vec<C2>,
    pub operators: Vec<Vec<BlockTerm>>,
    pub objective: Vec<f64>,
}

impl DualProblem {
    pub fn blocks(&self) -> usize {
        self.constant.len()
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }

    /// `Z = C - sum_i y_i A_i`.
    pub fn slack(&self, y: &[f64]) -> Vec<C2> {
        let mut z = self.constant.clone();
        for (yi, terms) in y.iter().zip(&self.operators) {
            for t in terms {
                z[t.block] -= t.matrix * Complex64::from(*yi);
            }
        }
        z
    }

    fn apply(&self, x: &[C2]) -> Vec<f64> {
        self.operators
            .iter()
            .map(|terms| terms.iter().map(|t| herm_inner(&t.matrix, &x[t.block])).sum())
            .collect()
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<C2> {
        let mut out = vec![C2::zeros(); self.blocks()];
        for (yi, terms) in y.iter().zip(&self.operators) {
            for t in terms {
                out[t.block] += t.matrix * Complex64::from(*yi);
            }
        }
        out
    }
}

/// Accumulates `Z_b = constant_b + sum_i y_i coef_{i,b}` one term at a time and
/// converts to [`DualProblem`].
#[derive(Debug, Clone)]
pub struct ProblemBuilder {
    constant: Vec<C2>,
    coefficients: Vec<Vec<BlockTerm>>,
    objective: Vec<f64>,
}

impl ProblemBuilder {
    pub fn new(blocks: usize, variables: usize) -> Self {
        Self {
            constant: vec![C2::zeros(); blocks],
            coefficients: vec![Vec::new(); variables],
            objective: vec![0.0; variables],
        }
    }

    pub fn add_constant(&mut self, block: usize, matrix: C2) {
        self.constant[block] += matrix;
    }

    pub fn add_term(&mut self, variable: usize, block: usize, matrix: C2) {
        let terms = &mut self.coefficients[variable];
        match terms.iter_mut().find(|t| t.block == block) {
            Some(t) => t.matrix += matrix,
            None => terms.push(BlockTerm { block, matrix }),
        }
    }

    pub fn set_objective(&mut self, variable: usize, weight: f64) {
        self.objective[variable] = weight;
    }

    pub fn build(self) -> DualProblem {
        let operators = self
            .coefficients
            .into_iter()
            .map(|terms| terms.into_iter().map(|t| BlockTerm { block: t.block, matrix: -t.matrix }).collect())
            .collect();
        DualProblem { constant: self.constant, operators, objective: self.objective }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub step_fraction: f64,
    /// Relative target for the primal and dual residuals and the duality gap.
    pub tolerance: f64,
    pub record_iterates: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: 200, step_fraction: 0.98, tolerance: 1e-8, record_iterates: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub complementarity: f64,
}

impl IterateRecord {
    /// One `key=value` record per line.
    pub fn to_line(&self) -> String {
        format!(
            "iteration={} primal_objective={:.15e} dual_objective={:.15e} primal_residual={:.3e} dual_residual={:.3e} complementarity={:.3e}",
            self.iteration,
            self.primal_objective,
            self.dual_objective,
            self.primal_residual,
            self.dual_residual,
            self.complementarity
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<C2>,
    pub y: Vec<f64>,
    pub z: Vec<C2>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub iterates: Vec<IterateRecord>,
}

impl Solution {
    pub fn gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }
}

struct Direction {
    dx: Vec<C2>,
    dy: Vec<f64>,
    dz: Vec<C2>,
}

pub fn solve(problem: &DualProblem, options: &SolverOptions) -> Result<Solution> {
    let nb = problem.blocks();
    let ny = problem.variables();
    let mut by_block: Vec<Vec<(usize, C2)>> = vec![Vec::new(); nb];
    for (i, terms) in problem.operators.iter().enumerate() {
        for t in terms {
            by_block[t.block].push((i, t.matrix));
        }
    }
    let b_norm = problem.objective.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = problem.constant.iter().map(|c| c.norm_squared()).sum::<f64>().sqrt();
    let dim = 2.0 * nb as f64;

    let mut x = vec![C2::identity(); nb];
    let mut z = vec![C2::identity(); nb];
    let mut y = vec![0.0; ny];
    let mut iterates = Vec::new();

    let failure = |iterations: usize, reason: &str| Error::SolverFailure { iterations, reason: reason.to_string() };

    for iteration in 0..=options.max_iterations {
        let ax = problem.apply(&x);
        let rp: Vec<f64> = problem.objective.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = problem.apply_adjoint(&y);
        let rd: Vec<C2> = (0..nb).map(|k| hermitian_part(&(problem.constant[k] - z[k] - aty[k]))).collect();
        let complementarity: f64 = x.iter().zip(&z).map(|(a, b)| herm_inner(a, b)).sum();
        let primal_objective: f64 = problem.constant.iter().zip(&x).map(|(c, a)| herm_inner(c, a)).sum();
        let dual_objective: f64 = problem.objective.iter().zip(&y).map(|(b, v)| b * v).sum();
        let primal_residual = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + b_norm);
        let dual_residual = rd.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt() / (1.0 + c_norm);
        let scale = 1.0 + primal_objective.abs() + dual_objective.abs();
        if !(complementarity.is_finite() && primal_objective.is_finite() && dual_objective.is_finite()) {
            return Err(failure(iteration, "non-finite iterate"));
        }
        if options.record_iterates {
            iterates.push(IterateRecord {
                iteration,
                primal_objective,
                dual_objective,
                primal_residual,
                dual_residual,
                complementarity,
            });
        }
        let converged = primal_residual <= options.tolerance
            && dual_residual <= options.tolerance
            && complementarity / scale <= options.tolerance
            && (primal_objective - dual_objective).abs() / scale <= options.tolerance;
        if converged || iteration == options.max_iterations {
            let status = if converged { SolveStatus::Optimal } else { SolveStatus::MaxIterations };
            return Ok(Solution {
                x,
                y,
                z,
                primal_objective,
                dual_objective,
                primal_residual,
                dual_residual,
                status,
                iterations: iteration,
                iterates,
            });
        }

        let z_inv: Vec<C2> = z
            .iter()
            .map(herm2_inverse)
            .collect::<Option<_>>()
            .ok_or_else(|| failure(iteration, "slack matrix became singular"))?;

        // Schur complement M_ij = Re tr(A_i X A_j Z^-1).
        let mut schur = DMatrix::<f64>::zeros(ny, ny);
        for (k, terms) in by_block.iter().enumerate() {
            let left: Vec<C2> = terms.iter().map(|(_, a)| a * x[k]).collect();
            let right: Vec<C2> = terms.iter().map(|(_, a)| a * z_inv[k]).collect();
            for (p, (i, _)) in terms.iter().enumerate() {
                for (q, (j, _)) in terms.iter().enumerate() {
                    schur[(*i, *j)] += herm_inner(&left[p], &right[q]);
                }
            }
        }
        let schur = (&schur + schur.transpose()) * 0.5;
        let chol = SchurSolver::new(schur).ok_or_else(|| failure(iteration, "Schur complement is not positive definite"))?;

        let mu = complementarity / dim;
        let direction = |target: f64, second_order: Option<&Direction>| -> Direction {
            let r: Vec<C2> = (0..nb)
                .map(|k| {
                    let mut r = z_inv[k] * Complex64::from(target) - x[k] - x[k] * rd[k] * z_inv[k];
                    if let Some(pred) = second_order {
                        r -= pred.dx[k] * pred.dz[k] * z_inv[k];
                    }
                    r
                })
                .collect();
            let ar = problem.apply(&r);
            let rhs = DVector::from_iterator(ny, rp.iter().zip(&ar).map(|(p, a)| p - a));
            let dy = chol.solve(&rhs);
            let dy: Vec<f64> = dy.iter().copied().collect();
            let at_dy = problem.apply_adjoint(&dy);
            let dz: Vec<C2> = (0..nb).map(|k| rd[k] - at_dy[k]).collect();
            let dx: Vec<C2> = (0..nb).map(|k| hermitian_part(&(r[k] + x[k] * at_dy[k] * z_inv[k]))).collect();
            Direction { dx, dy, dz }
        };
        let max_steps = |d: &Direction, fraction: f64| -> (f64, f64) {
            let ap = x.iter().zip(&d.dx).map(|(a, da)| herm2_max_step(a, da)).fold(f64::INFINITY, f64::min);
            let ad = z.iter().zip(&d.dz).map(|(a, da)| herm2_max_step(a, da)).fold(f64::INFINITY, f64::min);
            ((fraction * ap).min(1.0), (fraction * ad).min(1.0))
        };

        let predictor = direction(0.0, None);
        let (ap, ad) = max_steps(&predictor, 1.0);
        let affine: f64 = (0..nb)
            .map(|k| {
                herm_inner(
                    &(x[k] + predictor.dx[k] * Complex64::from(ap)),
                    &(z[k] + predictor.dz[k] * Complex64::from(ad)),
                )
            })
            .sum();
        let sigma = (affine / complementarity).clamp(0.0, 1.0).powi(3);
        let step = direction(sigma * mu, Some(&predictor));
        let (ap, ad) = max_steps(&step, options.step_fraction);

        for k in 0..nb {
            x[k] = hermitian_part(&(x[k] + step.dx[k] * Complex64::from(ap)));
            z[k] = hermitian_part(&(z[k] + step.dz[k] * Complex64::from(ad)));
        }
        for (v, dv) in y.iter_mut().zip(&step.dy) {
            *v += ad * dv;
        }
    }
    unreachable!("loop returns on the final iteration")
}

/// Symmetric positive definite solve with Jacobi equilibration, a diagonal
/// shift when the factorisation fails, and iterative refinement against the
/// unshifted matrix.
struct SchurSolver {
    matrix: DMatrix<f64>,
    scale: DVector<f64>,
    factor: Cholesky<f64, Dyn>,
}

impl SchurSolver {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        let n = m.nrows();
        let scale = DVector::from_iterator(n, m.diagonal().iter().map(|d| 1.0 / d.max(f64::MIN_POSITIVE).sqrt()));
        let scaled = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * scale[i] * scale[j]);
        let mut shift = 0.0;
        loop {
            let shifted = &scaled + DMatrix::<f64>::identity(n, n) * shift;
            if let Some(factor) = shifted.cholesky() {
                return Some(Self { matrix: m, scale, factor });
            }
            shift = if shift == 0.0 { 1e-14 } else { shift * 100.0 };
            if shift > 1e-6 {
                return None;
            }
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let once = |r: &DVector<f64>| -> DVector<f64> {
            let mut v = self.factor.solve(&r.component_mul(&self.scale));
            v.component_mul_assign(&self.scale);
            v
        };
        let mut x = once(rhs);
        for _ in 0..2 {
            let residual = rhs - &self.matrix * &x;
            x += once(&residual);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{herm2_eigenvalues, pauli, ONE, ZERO};

    fn basis() -> [C2; 4] {
        [
            C2::new(ONE, ZERO, ZERO, ZERO),
            C2::new(ZERO, ZERO, ZERO, ONE),
            pauli(0),
            pauli(1),
        ]
    }

    #[test]
    fn minimum_eigenvalue_as_sdp() {
        // max t s.t. H - t I >= 0 has optimum lambda_min(H).
        let h = C2::new(
            Complex64::new(0.4, 0.0),
            Complex64::new(0.3, -0.1),
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.0),
        );
        let mut builder = ProblemBuilder::new(1, 1);
        builder.add_constant(0, h);
        builder.add_term(0, 0, -C2::identity());
        builder.set_objective(0, 1.0);
        let sol = solve(&builder.build(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let (lo, _) = herm2_eigenvalues(&h);
        assert!((sol.dual_objective - lo).abs() < 1e-8, "{} vs {lo}", sol.dual_objective);
        assert!(sol.gap() < 1e-8);
        // primal optimum is the projector onto the minimal eigenvector
        assert!((sol.x[0].trace().re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn trace_norm_split() {
        // min tr(P) + tr(N) s.t. P - N = H, P, N >= 0 gives ||H||_1; written in dual
        // form over P's four real coordinates with N = P - H.
        let h = pauli(2) * Complex64::from(0.7) + pauli(0) * Complex64::from(0.2);
        let mut builder = ProblemBuilder::new(2, 4);
        builder.add_constant(1, -h);
        for (k, e) in basis().iter().enumerate() {
            builder.add_term(k, 0, *e);
            builder.add_term(k, 1, *e);
            builder.set_objective(k, -2.0 * e.trace().re);
        }
        let sol = solve(&builder.build(), &SolverOptions { record_iterates: true, ..Default::default() }).unwrap();
        let (lo, hi) = herm2_eigenvalues(&h);
        let trace_norm = lo.abs() + hi.abs();
        assert!((-sol.dual_objective - h.trace().re - trace_norm).abs() < 1e-7);
        assert_eq!(sol.iterates.len(), sol.iterations + 1);
        assert!(sol.iterates[0].to_line().starts_with("iteration=0 "));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mut builder = ProblemBuilder::new(1, 1);
        builder.add_constant(0, C2::identity());
        builder.add_term(0, 0, -C2::identity());
        builder.set_objective(0, 1.0);
        let opts = SolverOptions { max_iterations: 2, ..Default::default() };
        let sol = solve(&builder.build(), &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::MaxIterations);
    }
}
