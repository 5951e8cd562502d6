//! Local-hidden-state membership, steering robustness and the see-saw
//! optimisation over Alice's measurements.
//!
//! Hidden-state models use the `2^m` deterministic response functions:
//! `sigma_{a|x} = sum_lambda D(a|x, lambda) sigma_lambda` with
//! `sigma_lambda >= 0`. Robustness is taken against arbitrary assemblage noise,
//! for which the problem reduces to
//!
//! ```text
//! SR + 1 = min tr sum_lambda s_lambda
//!          s.t. sum_lambda D(a|x,lambda) s_lambda - sigma_{a|x} >= 0,  s_lambda >= 0
//!        = max sum_{a,x} tr(F_{a|x} sigma_{a|x})
//!          s.t. F_{a|x} >= 0,  I - sum_{a,x} D(a|x,lambda) F_{a|x} >= 0.
//! ```
//!
//! The maximiser `F` is the steering functional that the see-saw step uses to
//! update Alice's settings.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{herm2_eigenvalues, herm2_top_direction, herm_inner, kron, max_abs_diff2, partial_trace_b, pauli, C2, ONE, ZERO};
use crate::measurements::{assemblage, assemblage_from_directions, check_settings, Assemblage, Direction, OrthogonalTriad, OUTCOMES};
use crate::qstate::{bloch_decompose, canonicalize, DensityMatrix};
use crate::sdp::{solve, IterateRecord, ProblemBuilder, SolveStatus, SolverOptions};

/// Name of the noise set used by [`steering_robustness`].
pub const NOISE_SET: &str = "generic";

/// Hidden-state models whose smallest eigenvalue is at least `-LHS_TOL` are accepted.
pub const LHS_TOL: f64 = 1e-8;

/// Robustness below this is reported as unsteerable by the cross-checks.
pub const ZERO_ROBUSTNESS_TOL: f64 = 1e-6;

/// Noise is only reconstructed above this robustness; below it the division
/// by `epsilon` amplifies solver error.
pub const NOISE_MIN_EPSILON: f64 = 1e-7;

/// See-saw must never lose more than this between iterations.
pub const MONOTONE_TOL: f64 = 1e-7;

fn hermitian_basis() -> [C2; 4] {
    [C2::new(ONE, ZERO, ZERO, ZERO), C2::new(ZERO, ZERO, ZERO, ONE), pauli(0), pauli(1)]
}

/// All `2^m` deterministic assignments `lambda -> (a_1, ..., a_m)`, in
/// lexicographic order with `+1` before `-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicStrategyTable {
    m: usize,
    outcomes: Vec<Vec<i8>>,
}

impl DeterministicStrategyTable {
    pub fn settings(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Outcome assigned to setting `x` by strategy `lambda`.
    pub fn outcome(&self, x: usize, lambda: usize) -> i8 {
        self.outcomes[lambda][x]
    }

    /// `D(a|x, lambda)`.
    pub fn response(&self, a: i8, x: usize, lambda: usize) -> f64 {
        if self.outcome(x, lambda) == a {
            1.0
        } else {
            0.0
        }
    }
}

pub fn deterministic_strategies(m: usize) -> Result<DeterministicStrategyTable> {
    check_settings(m, &[2, 3], "2 or 3")?;
    Ok(strategies_unchecked(m))
}

fn strategies_unchecked(m: usize) -> DeterministicStrategyTable {
    let outcomes = (0..1usize << m)
        .map(|lambda| (0..m).map(|x| if lambda >> (m - 1 - x) & 1 == 0 { 1 } else { -1 }).collect())
        .collect();
    DeterministicStrategyTable { m, outcomes }
}

fn outcome_slot(a: i8) -> usize {
    usize::from(a < 0)
}

/// Unnormalised hidden states `sigma_lambda`, indexed like [`DeterministicStrategyTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct LhsModel {
    pub sigma_lambda: Vec<C2>,
}

impl LhsModel {
    /// `sum_lambda D(a|x, lambda) sigma_lambda` as `[x][slot]`.
    pub fn assemblage_members(&self, strategies: &DeterministicStrategyTable) -> Vec<[C2; 2]> {
        (0..strategies.settings())
            .map(|x| {
                OUTCOMES.map(|a| {
                    (0..strategies.len())
                        .filter(|&l| strategies.outcome(x, l) == a)
                        .map(|l| self.sigma_lambda[l])
                        .sum()
                })
            })
            .collect()
    }

    /// Largest entrywise deviation from `target` over all blocks.
    pub fn residual(&self, target: &Assemblage) -> f64 {
        let strategies = strategies_unchecked(target.settings());
        self.assemblage_members(&strategies)
            .iter()
            .zip(target.members())
            .flat_map(|(got, want)| (0..2).map(move |k| max_abs_diff2(&got[k], &want[k])))
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.sigma_lambda.iter().map(|s| herm2_eigenvalues(s).0).fold(f64::INFINITY, f64::min)
    }
}

/// Linear steering functional `W(sigma) = sum_{a,x} tr(F_{a|x} sigma_{a|x})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringWitness {
    /// `coefficients[x][slot]` is `F_{a|x}`.
    pub coefficients: Vec<[C2; 2]>,
}

impl SteeringWitness {
    pub fn evaluate(&self, asm: &Assemblage) -> f64 {
        self.coefficients
            .iter()
            .zip(asm.members())
            .map(|(f, s)| herm_inner(&f[0], &s[0]) + herm_inner(&f[1], &s[1]))
            .sum()
    }

    /// Maximum of `W` over all unit-trace LHS assemblages:
    /// `max_lambda lambda_max(sum_x F_{lambda(x)|x})`.
    pub fn lhs_bound(&self) -> f64 {
        let strategies = strategies_unchecked(self.coefficients.len());
        (0..strategies.len())
            .map(|l| {
                let op: C2 = (0..strategies.settings())
                    .map(|x| self.coefficients[x][outcome_slot(strategies.outcome(x, l))])
                    .sum();
                herm2_eigenvalues(&op).1
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LhsVerdict {
    /// `margin` is the smallest eigenvalue over the returned hidden states.
    Feasible { model: LhsModel, margin: f64 },
    /// `margin = witness(target) - witness.lhs_bound() > 0`.
    Infeasible { witness: SteeringWitness, value: f64, lhs_bound: f64, margin: f64 },
}

impl LhsVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible { .. })
    }
}

/// Characters `chi_S(lambda) = prod_{x in S} a_x(lambda)` for every subset `S`
/// with at least two settings.
fn interaction_subsets(m: usize) -> Vec<usize> {
    (0..1usize << m).filter(|s| s.count_ones() >= 2).collect()
}

fn character(strategies: &DeterministicStrategyTable, subset: usize, lambda: usize) -> f64 {
    (0..strategies.settings())
        .filter(|x| subset >> x & 1 == 1)
        .map(|x| f64::from(strategies.outcome(x, lambda)))
        .product()
}

/// Decides whether the assemblage admits a hidden-state model.
///
/// Every model with the right marginals is `sigma_lambda = 2^-m [rho_B +
/// sum_x a_x(lambda) (sigma_{+|x} - sigma_{-|x})] + 2^-m sum_S chi_S(lambda) G_S`
/// over subsets `|S| >= 2`; the solver maximises the smallest eigenvalue `t`
/// over the free `G_S`. If `t < -LHS_TOL` the optimal dual point is turned
/// into a steering witness.
pub fn lhs_feasibility(asm: &Assemblage) -> Result<LhsVerdict> {
    lhs_feasibility_with(asm, &SolverOptions::default())
}

pub fn lhs_feasibility_with(asm: &Assemblage, options: &SolverOptions) -> Result<LhsVerdict> {
    let m = asm.settings();
    let strategies = strategies_unchecked(m);
    let n_lambda = strategies.len();
    let scale = Complex64::from(1.0 / n_lambda as f64);
    let subsets = interaction_subsets(m);
    let basis = hermitian_basis();
    let rho_b = asm.reduced_state();
    let diffs: Vec<C2> = (0..m).map(|x| asm.member(x, 1) - asm.member(x, -1)).collect();

    let particular: Vec<C2> = (0..n_lambda)
        .map(|l| {
            let mut s = rho_b;
            for (x, d) in diffs.iter().enumerate() {
                s += d * Complex64::from(f64::from(strategies.outcome(x, l)));
            }
            s * scale
        })
        .collect();

    let t_var = 4 * subsets.len();
    let mut builder = ProblemBuilder::new(n_lambda, t_var + 1);
    for (l, p) in particular.iter().enumerate() {
        builder.add_constant(l, *p);
        builder.add_term(t_var, l, -C2::identity());
        for (si, &subset) in subsets.iter().enumerate() {
            let chi = character(&strategies, subset, l);
            for (k, e) in basis.iter().enumerate() {
                builder.add_term(4 * si + k, l, e * scale * Complex64::from(chi));
            }
        }
    }
    builder.set_objective(t_var, 1.0);
    let problem = builder.build();
    let sol = solve(&problem, options)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::SolverFailure { iterations: sol.iterations, reason: "LHS feasibility hit the iteration cap".into() });
    }

    let t = sol.dual_objective;
    if t >= -LHS_TOL {
        let sigma_lambda: Vec<C2> = (0..n_lambda)
            .map(|l| {
                let mut s = particular[l];
                for (si, &subset) in subsets.iter().enumerate() {
                    let chi = character(&strategies, subset, l);
                    for (k, e) in basis.iter().enumerate() {
                        s += e * scale * Complex64::from(chi * sol.y[4 * si + k]);
                    }
                }
                s
            })
            .collect();
        let model = LhsModel { sigma_lambda };
        let margin = model.min_eigenvalue();
        return Ok(LhsVerdict::Feasible { model, margin });
    }

    // Keep only the affine (degree <= 1) part of the primal blocks X_lambda,
    // then read off F_{a|x} = -(X_hat_empty / m + a X_hat_x) / 2^m.
    let x_empty: C2 = sol.x.iter().sum();
    let x_single: Vec<C2> = (0..m)
        .map(|x| (0..n_lambda).map(|l| sol.x[l] * Complex64::from(f64::from(strategies.outcome(x, l)))).sum())
        .collect();
    let coefficients: Vec<[C2; 2]> = (0..m)
        .map(|x| OUTCOMES.map(|a| -(x_empty / Complex64::from(m as f64) + x_single[x] * Complex64::from(f64::from(a))) * scale))
        .collect();
    let witness = SteeringWitness { coefficients };
    let value = witness.evaluate(asm);
    let lhs_bound = witness.lhs_bound();
    Ok(LhsVerdict::Infeasible { margin: value - lhs_bound, witness, value, lhs_bound })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessResult {
    pub epsilon: f64,
    /// Hidden-state model of the noise-mixed assemblage `(sigma + eps pi)/(1 + eps)`.
    pub model: LhsModel,
    /// Optimal noise `pi_{a|x}`; `None` when `epsilon <= NOISE_MIN_EPSILON`.
    pub noise: Option<Vec<[C2; 2]>>,
    /// Optimal dual functional; `witness.evaluate(sigma) - 1` equals `epsilon`.
    pub witness: SteeringWitness,
    pub status: SolveStatus,
    pub primal_dual_gap: f64,
    pub iterations: usize,
    pub noise_set: &'static str,
    pub iterates: Vec<IterateRecord>,
}

impl RobustnessResult {
    pub fn witness_value(&self, asm: &Assemblage) -> f64 {
        self.witness.evaluate(asm) - 1.0
    }
}

pub fn steering_robustness(asm: &Assemblage) -> Result<RobustnessResult> {
    steering_robustness_with(asm, &SolverOptions::default())
}

pub fn steering_robustness_with(asm: &Assemblage, options: &SolverOptions) -> Result<RobustnessResult> {
    let m = asm.settings();
    let strategies = strategies_unchecked(m);
    let n_lambda = strategies.len();
    let basis = hermitian_basis();
    let block = |x: usize, a: i8| n_lambda + 2 * x + outcome_slot(a);

    let mut builder = ProblemBuilder::new(n_lambda + 2 * m, 4 * n_lambda);
    for l in 0..n_lambda {
        for (k, e) in basis.iter().enumerate() {
            let var = 4 * l + k;
            builder.add_term(var, l, *e);
            for x in 0..m {
                builder.add_term(var, block(x, strategies.outcome(x, l)), *e);
            }
            builder.set_objective(var, -e.trace().re);
        }
    }
    for x in 0..m {
        for a in OUTCOMES {
            builder.add_constant(block(x, a), -asm.member(x, a));
        }
    }
    let problem = builder.build();
    let sol = solve(&problem, options)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::SolverFailure { iterations: sol.iterations, reason: "steering robustness hit the iteration cap".into() });
    }

    let tilde: Vec<C2> = (0..n_lambda)
        .map(|l| basis.iter().enumerate().map(|(k, e)| e * Complex64::from(sol.y[4 * l + k])).sum())
        .collect();
    let epsilon = -sol.dual_objective - 1.0;
    let normalise = Complex64::from(1.0 / (1.0 + epsilon));
    let model = LhsModel { sigma_lambda: tilde.iter().map(|s| s * normalise).collect() };
    let noise = (epsilon > NOISE_MIN_EPSILON).then(|| {
        let lhs = LhsModel { sigma_lambda: tilde.clone() }.assemblage_members(&strategies);
        lhs.iter()
            .enumerate()
            .map(|(x, pair)| OUTCOMES.map(|a| (pair[outcome_slot(a)] - asm.member(x, a)) / Complex64::from(epsilon)))
            .collect()
    });
    let coefficients = (0..m).map(|x| OUTCOMES.map(|a| sol.x[block(x, a)])).collect();
    Ok(RobustnessResult {
        epsilon,
        model,
        noise,
        witness: SteeringWitness { coefficients },
        status: sol.status,
        primal_dual_gap: sol.gap(),
        iterations: sol.iterations,
        noise_set: NOISE_SET,
        iterates: sol.iterates,
    })
}

/// Largest `t` such that some unit-trace `sigma_lambda` satisfies
/// `sigma_lambda >= t I` and `(1 + eps) sum_lambda D sigma_lambda - sigma_{a|x} >= t I`.
///
/// `t >= 0` exactly when noise of weight `eps` suffices, i.e. when
/// `eps >= SR`. This parameterises the robustness definition directly at a
/// fixed noise weight and is independent of [`steering_robustness`].
pub fn noise_feasibility_margin(asm: &Assemblage, epsilon: f64) -> Result<f64> {
    let m = asm.settings();
    let strategies = strategies_unchecked(m);
    let n_lambda = strategies.len();
    let basis = hermitian_basis();
    let block = |x: usize, a: i8| n_lambda + 2 * x + outcome_slot(a);
    let stretch = Complex64::from(1.0 + epsilon);

    // Variables: every (lambda, k) coordinate except the last lambda's lower
    // diagonal, which the trace condition fixes; then t.
    let last = (n_lambda - 1, 1usize);
    let coords: Vec<(usize, usize)> = (0..n_lambda)
        .flat_map(|l| (0..4).map(move |k| (l, k)))
        .filter(|&c| c != last)
        .collect();
    let t_var = coords.len();
    let mut builder = ProblemBuilder::new(n_lambda + 2 * m, t_var + 1);

    // contribution of sigma_lambda += coef to every block that contains it
    let push = |builder: &mut ProblemBuilder, var: Option<usize>, l: usize, coef: C2| {
        let mut targets = vec![(l, coef)];
        for x in 0..m {
            targets.push((block(x, strategies.outcome(x, l)), coef * stretch));
        }
        for (b, c) in targets {
            match var {
                Some(v) => builder.add_term(v, b, c),
                None => builder.add_constant(b, c),
            }
        }
    };
    let e_last = basis[last.1];
    push(&mut builder, None, last.0, e_last);
    for (v, &(l, k)) in coords.iter().enumerate() {
        push(&mut builder, Some(v), l, basis[k]);
        if k < 2 {
            push(&mut builder, Some(v), last.0, -e_last);
        }
    }
    for x in 0..m {
        for a in OUTCOMES {
            builder.add_constant(block(x, a), -asm.member(x, a));
        }
    }
    for b in 0..n_lambda + 2 * m {
        builder.add_term(t_var, b, -C2::identity());
    }
    builder.set_objective(t_var, 1.0);
    let sol = solve(&builder.build(), &SolverOptions::default())?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::SolverFailure { iterations: sol.iterations, reason: "noise feasibility hit the iteration cap".into() });
    }
    Ok(sol.dual_objective)
}

/// Alice's Pauli axes in the frame that diagonalises the correlation matrix.
pub fn canonical_alice_triad(rho: &DensityMatrix) -> Result<OrthogonalTriad> {
    OrthogonalTriad::new(canonicalize(&bloch_decompose(rho)).alice_rotation)
}

/// Robustness of the assemblage Alice creates by measuring her first `m`
/// canonical Pauli axes.
pub fn canonical_pauli_robustness(rho: &DensityMatrix, m: usize) -> Result<RobustnessResult> {
    steering_robustness(&assemblage(rho, &canonical_alice_triad(rho)?, m)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeeSawResult {
    pub epsilon: f64,
    pub initial_epsilon: f64,
    /// Alice's final measurement axes; they need not stay orthogonal.
    pub alice: Vec<Direction>,
    pub iterations: usize,
    /// Robustness after each solve, starting with the initial settings.
    pub trace: Vec<f64>,
}

/// See-saw from the Pauli axes of the computational frame.
pub fn see_saw(rho: &DensityMatrix, m: usize, max_iters: usize, tol: f64) -> Result<SeeSawResult> {
    check_settings(m, &[2, 3], "2 or 3")?;
    see_saw_from(rho, &OrthogonalTriad::pauli().axes(m), max_iters, tol)
}

/// Alternates a robustness solve at fixed settings with an update of every
/// setting to the projective measurement that maximises the current dual
/// functional. Stops once an iteration gains less than `tol`.
pub fn see_saw_from(rho: &DensityMatrix, initial: &[Direction], max_iters: usize, tol: f64) -> Result<SeeSawResult> {
    check_settings(initial.len(), &[2, 3], "2 or 3")?;
    let mut alice = initial.to_vec();
    let mut current = steering_robustness(&assemblage_from_directions(rho, &alice)?)?;
    let initial_epsilon = current.epsilon;
    let mut trace = vec![initial_epsilon];
    let mut iterations = 0;
    let id = C2::identity();

    while iterations < max_iters {
        iterations += 1;
        let mut updated = alice.clone();
        for (x, setting) in updated.iter_mut().enumerate() {
            let [f_plus, f_minus] = current.witness.coefficients[x];
            // Alice-side operator whose top eigenvector maximises the functional.
            let effective = partial_trace_b(&(kron(&id, &(f_plus - f_minus)) * rho.matrix()));
            if let Some(u) = herm2_top_direction(&effective, 1e-12) {
                *setting = Direction::normalized(u)?;
            }
        }
        let next = steering_robustness(&assemblage_from_directions(rho, &updated)?)?;
        if next.epsilon < current.epsilon - MONOTONE_TOL {
            return Err(Error::NonMonotone { iteration: iterations, previous: current.epsilon, current: next.epsilon });
        }
        trace.push(next.epsilon);
        let gain = next.epsilon - current.epsilon;
        if gain > 0.0 {
            alice = updated;
            current = next;
        }
        if gain < tol {
            break;
        }
    }
    Ok(SeeSawResult { epsilon: current.epsilon, initial_epsilon, alice, iterations, trace })
}
