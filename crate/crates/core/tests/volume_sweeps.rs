use steerq::criteria::{CriterionKind, DbThreshold};
use steerq::qstate::{werner, WernerParameter};
use steerq::volume::{estimate_volume, werner_volume_sweep, wilson_interval, VolumeCriterion};

const THRESHOLD: f64 = 0.577_350_269_189_625_8;

fn all(m: usize) -> Vec<VolumeCriterion> {
    CriterionKind::ALL
        .iter()
        .filter(|k| m == 3 || **k != CriterionKind::DimBound)
        .map(|k| VolumeCriterion::from_kind(*k))
        .collect()
}

#[test]
fn rotation_invariant_sweeps_are_steps() {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    for c in [VolumeCriterion::RotInv, VolumeCriterion::from_kind(CriterionKind::DimBound)] {
        for (x, est) in werner_volume_sweep(c, 3, &grid, 2000, 4).unwrap() {
            let want = if x > THRESHOLD { 1.0 } else { 0.0 };
            assert_eq!(est.fraction, want, "{c:?} at w = {x}");
        }
    }
}

#[test]
fn printed_dimbound_threshold_fires_below_the_steering_threshold() {
    // |det D| = w^3 exceeds 1/108 already at w = 0.3, where the state has a
    // hidden-state model for all projective measurements.
    let printed = VolumeCriterion::DimBound { threshold: DbThreshold::Printed };
    let est = estimate_volume(&werner(WernerParameter::new(0.3).unwrap()), printed, 3, 500, 1).unwrap();
    assert_eq!(est.fraction, 1.0);
}

#[test]
fn two_settings_share_a_threshold() {
    let below = werner(WernerParameter::new(0.70).unwrap());
    let at_one = werner(WernerParameter::new(1.0).unwrap());
    for c in all(2) {
        assert_eq!(estimate_volume(&below, c, 2, 4000, 6).unwrap().violations, 0, "{c:?}");
        assert!(estimate_volume(&at_one, c, 2, 4000, 6).unwrap().violations > 0, "{c:?}");
    }
    let w06 = werner(WernerParameter::new(0.6).unwrap());
    for c in all(2) {
        assert_eq!(estimate_volume(&w06, c, 2, 2000, 8).unwrap().fraction, 0.0);
    }
}

#[test]
fn unentangled_end_never_violates() {
    let rho = werner(WernerParameter::new(0.0).unwrap());
    for m in [2, 3] {
        for c in all(m) {
            assert_eq!(estimate_volume(&rho, c, m, 1000, 2).unwrap().violations, 0);
        }
    }
}

#[test]
fn rotation_invariant_dominates_linear_and_entropic() {
    let grid = [0.6, 0.7, 0.8, 0.9, 1.0];
    let ri = werner_volume_sweep(VolumeCriterion::RotInv, 3, &grid, 3000, 5).unwrap();
    for c in [VolumeCriterion::Linear, VolumeCriterion::from_kind(CriterionKind::Entropic)] {
        let sweep = werner_volume_sweep(c, 3, &grid, 3000, 5).unwrap();
        for ((x, a), (_, b)) in sweep.iter().zip(&ri) {
            assert!(a.fraction <= b.fraction, "{c:?} at {x}");
            assert!(a.fraction > 0.0 && a.fraction < 1.0, "{c:?} at {x}: {}", a.fraction);
        }
    }
}

#[test]
fn counts_do_not_depend_on_thread_count() {
    let rho = werner(WernerParameter::new(0.9).unwrap());
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_volume(&rho, VolumeCriterion::Linear, 3, 5000, 77).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn interval_is_consistent_with_counts() {
    let rho = werner(WernerParameter::new(1.0).unwrap());
    let est = estimate_volume(&rho, VolumeCriterion::Linear, 3, 3000, 12).unwrap();
    let (lo, hi) = wilson_interval(est.violations, est.samples);
    assert!((est.lower() - lo).abs() < 1e-15 && (est.upper() - hi).abs() < 1e-15);
    assert!(est.lower() <= est.fraction && est.fraction <= est.upper());
}
