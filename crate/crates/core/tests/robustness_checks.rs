use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use steerq::linalg::C2;
use steerq::measurements::{assemblage, Assemblage, OrthogonalTriad};
use steerq::measures::MeasureSet;
use steerq::qstate::{bloch_decompose, canonicalize, random_state, DensityMatrix};
use steerq::robustness::{
    canonical_alice_triad, lhs_feasibility, noise_feasibility_margin, see_saw_from, steering_robustness, LhsVerdict,
    ZERO_ROBUSTNESS_TOL,
};
use steerq::sdp::SolveStatus;
use steerq::Error;

fn states(seed: u64, n: usize) -> Vec<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_state(&mut rng)).collect()
}

fn canonical_assemblage(rho: &DensityMatrix, m: usize) -> Assemblage {
    assemblage(rho, &canonical_alice_triad(rho).unwrap(), m).unwrap()
}

#[test]
fn primal_dual_and_feasibility_agree() {
    for (i, rho) in states(31, 200).iter().enumerate() {
        let asm = canonical_assemblage(rho, 3);
        let sr = steering_robustness(&asm).unwrap();
        assert_eq!(sr.status, SolveStatus::Optimal);
        assert!(sr.primal_dual_gap <= 1e-6, "state {i}");
        assert!(sr.epsilon >= -1e-9);
        assert!((sr.witness_value(&asm) - sr.epsilon).abs() <= 1e-6, "state {i}");
        assert!(sr.model.min_eigenvalue() >= -1e-9);
        match lhs_feasibility(&asm).unwrap() {
            LhsVerdict::Feasible { model, .. } => {
                assert!(sr.epsilon <= ZERO_ROBUSTNESS_TOL, "state {i}: {}", sr.epsilon);
                assert!(model.residual(&asm) <= 1e-7);
            }
            LhsVerdict::Infeasible { margin, .. } => {
                assert!(sr.epsilon > ZERO_ROBUSTNESS_TOL, "state {i}: {}", sr.epsilon);
                assert!(margin > 0.0);
            }
        }
    }
}

#[test]
fn noise_is_a_valid_assemblage_that_makes_the_mixture_local() {
    let mut checked = 0;
    for rho in states(32, 400) {
        let asm = canonical_assemblage(&rho, 3);
        let sr = steering_robustness(&asm).unwrap();
        let Some(noise) = sr.noise.clone() else { continue };
        let noise = Assemblage::new(noise).unwrap();
        let eps = Complex64::from(sr.epsilon);
        let mixed: Vec<[C2; 2]> = asm
            .members()
            .iter()
            .zip(noise.members())
            .map(|(s, p)| [0, 1].map(|k| (s[k] + p[k] * eps) / (Complex64::from(1.0) + eps)))
            .collect();
        assert!(sr.model.residual(&Assemblage::new(mixed).unwrap()) < 1e-7);
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn conic_form_matches_fixed_noise_bisection() {
    let mut checked = 0;
    for rho in states(33, 2000) {
        let asm = canonical_assemblage(&rho, 3);
        let sr = steering_robustness(&asm).unwrap().epsilon;
        if sr < 1e-3 {
            continue;
        }
        let (mut lo, mut hi) = (0.0, 2.0 * sr + 0.01);
        assert!(noise_feasibility_margin(&asm, hi).unwrap() >= 0.0);
        assert!(noise_feasibility_margin(&asm, lo).unwrap() < 0.0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if noise_feasibility_margin(&asm, mid).unwrap() >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((0.5 * (lo + hi) - sr).abs() < 1e-6, "{} vs {sr}", 0.5 * (lo + hi));
        checked += 1;
        if checked == 20 {
            break;
        }
    }
    assert_eq!(checked, 20);
}

#[test]
fn criterion_violation_implies_robustness() {
    for rho in states(34, 1500) {
        let s = MeasureSet::evaluate(&canonicalize(&bloch_decompose(&rho))).unwrap();
        if s.values().iter().any(|&v| v > 0.01) {
            let sr = steering_robustness(&canonical_assemblage(&rho, 3)).unwrap();
            assert!(sr.epsilon > ZERO_ROBUSTNESS_TOL, "{s:?}");
        }
    }
}

#[test]
fn two_settings_never_exceed_three() {
    for rho in states(35, 100) {
        let e2 = steering_robustness(&canonical_assemblage(&rho, 2)).unwrap().epsilon;
        let e3 = steering_robustness(&canonical_assemblage(&rho, 3)).unwrap().epsilon;
        assert!(e2 <= e3 + 1e-7);
    }
}

#[test]
fn see_saw_never_loses_robustness() {
    for rho in states(36, 150) {
        let triad = canonical_alice_triad(&rho).unwrap();
        let fixed = steering_robustness(&assemblage(&rho, &triad, 3).unwrap()).unwrap().epsilon;
        let r = see_saw_from(&rho, &triad.axes(3), 30, 1e-9).unwrap();
        assert!(r.epsilon >= fixed - 1e-7);
        assert_eq!(r.trace.len(), r.iterations + 1);
        assert!((r.initial_epsilon - fixed).abs() < 1e-12);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let rho = DensityMatrix::singlet();
    let asm = assemblage(&rho, &OrthogonalTriad::pauli(), 3).unwrap();
    let doubled: Vec<[C2; 2]> = asm.members().iter().map(|p| p.map(|s| s * Complex64::from(2.0))).collect();
    assert!(matches!(Assemblage::new(doubled), Err(Error::InvalidAssemblage(_))));
    assert!(matches!(steerq::robustness::see_saw(&rho, 4, 5, 1e-9), Err(Error::BadSettingCount { .. })));
}
