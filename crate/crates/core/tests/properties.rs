use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use steerq::linalg::max_abs_diff4;
use steerq::measurements::OrthogonalTriad;
use steerq::measures::MeasureSet;
use steerq::qstate::{bloch_decompose, canonicalize, random_state, DensityMatrix};

fn state(seed: u64) -> DensityMatrix {
    random_state(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn rotation(seed: u64) -> nalgebra::Matrix3<f64> {
    *OrthogonalTriad::haar_random(&mut ChaCha8Rng::seed_from_u64(seed)).matrix()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bloch_round_trip(seed in any::<u64>()) {
        let rho = state(seed);
        let back = bloch_decompose(&rho).reconstruct();
        prop_assert!(max_abs_diff4(&back, rho.matrix()) < 1e-12);
    }

    #[test]
    fn canonical_form_is_ordered_and_bounded(seed in any::<u64>()) {
        let f = canonicalize(&bloch_decompose(&state(seed)));
        prop_assert!(f.c[0] >= f.c[1].abs() - 1e-14);
        prop_assert!(f.c[1] >= f.c[2].abs() - 1e-14);
        prop_assert!(f.c[1] >= 0.0);
        prop_assert!(f.a.norm_squared() + f.b.norm_squared() + f.c.norm_squared() <= 3.0 + 1e-9);
        let det_a = f.alice_rotation.determinant();
        let det_b = f.bob_rotation.determinant();
        prop_assert!((det_a - 1.0).abs() < 1e-10 && (det_b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn canonical_frame_diagonalises_correlations(seed in any::<u64>()) {
        let bloch = bloch_decompose(&state(seed));
        let f = canonicalize(&bloch);
        let d = f.alice_rotation * bloch.t * f.bob_rotation.transpose();
        for r in 0..3 {
            for s in 0..3 {
                let want = if r == s { f.c[r] } else { 0.0 };
                prop_assert!((d[(r, s)] - want).abs() < 1e-12);
            }
        }
        prop_assert!((f.c[0] * f.c[1] * f.c[2] - bloch.t.determinant()).abs() < 1e-12);
    }

    #[test]
    fn measures_are_local_rotation_invariant(seed in any::<u64>(), ra in any::<u64>(), rb in any::<u64>()) {
        let rho = state(seed);
        let rotated = rho.rotate_local(&rotation(ra), &rotation(rb)).unwrap();
        let f0 = canonicalize(&bloch_decompose(&rho));
        let f1 = canonicalize(&bloch_decompose(&rotated));
        prop_assert!((f0.c - f1.c).abs().max() < 1e-10);
        prop_assert!((f0.a.norm() - f1.a.norm()).abs() < 1e-10);
        let s0 = MeasureSet::evaluate(&f0).unwrap().values();
        let s1 = MeasureSet::evaluate(&f1).unwrap().values();
        for (x, y) in s0.iter().zip(&s1) {
            prop_assert!((x - y).abs() < 1e-8, "{:?} vs {:?}", s0, s1);
        }
    }

    #[test]
    fn measures_lie_in_unit_interval(seed in any::<u64>()) {
        let s = MeasureSet::evaluate(&canonicalize(&bloch_decompose(&state(seed)))).unwrap();
        for v in s.values() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn entropic_dominates_linear(seed in any::<u64>()) {
        // S_E23 >= (c^2 - 1)/2 holds for every state, so the linear measure
        // cannot be positive where the entropic one vanishes.
        let f = canonicalize(&bloch_decompose(&state(seed)));
        let s = MeasureSet::evaluate(&f).unwrap();
        prop_assert!(s.e23 >= (f.c.norm_squared() - 1.0) / 2.0 - 1e-12);
        if s.l3 > 0.0 {
            prop_assert!(s.e23 > 0.0);
        }
    }
}
