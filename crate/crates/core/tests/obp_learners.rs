mod common;

use common::{custom_space, repeated_stream};
use metapersuasion::obp::{judge_prosecutor, Adversary, ObpTaskStream, ResponseModel};
use metapersuasion::obp_bandit::{run_bandit_baseline, run_bandit_meta, ExpertGrid, Geometry};
use metapersuasion::obp_full::{run_full_baseline, run_full_meta, MetaConstants};
use metapersuasion::rng;
use proptest::prelude::*;

/// Unit-square corners: the start `argmin ‖z‖²` is the origin, and a task
/// facing only type 1 has its optimum at (1, 0).
fn square() -> metapersuasion::obp::LossSpace {
    custom_space(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]])
}

/// A hull whose origin-projection is far from the type-0 optimum (0, 1).
fn wedge() -> metapersuasion::obp::LossSpace {
    custom_space(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]])
}

#[test]
fn identical_tasks_meta_beats_restarts() {
    let space = wedge();
    let stream = repeated_stream(&space, &[0; 5], 10);
    let c = MetaConstants::from_interval(0.05, 0.25, 5).unwrap();
    let meta = run_full_meta(&stream, &c, &mut rng::stream(1, &[rng::ALGORITHM, 0])).unwrap();
    let base = run_full_baseline(&stream, c.midpoint(), &mut rng::stream(1, &[rng::ALGORITHM, 1])).unwrap();
    assert_eq!(meta[1].init, vec![0.0, 1.0]);
    let tail = |v: &[metapersuasion::obp_full::FullTaskRecord]| v[1..].iter().map(|r| r.expected_regret).sum::<f64>();
    assert!(tail(&meta) < 1e-12, "meta regret {}", tail(&meta));
    assert!(tail(&base) > 0.5, "baseline regret {}", tail(&base));
    // Repeated zero-distance tasks push ε-EWOO toward the interval's low end.
    assert!(meta.last().unwrap().eta < meta[0].eta);
}

#[test]
fn square_optimum_and_init() {
    let stream = repeated_stream(&square(), &[1, 1, 1], 3);
    let c = MetaConstants::from_interval(0.05, 0.25, 3).unwrap();
    let meta = run_full_meta(&stream, &c, &mut rng::stream(0, &[])).unwrap();
    assert_eq!(meta[0].init, vec![0.0, 0.0]);
    assert_eq!(meta[0].optimum, vec![0.0, 0.0]);
    assert!(meta.iter().all(|r| r.expected_regret.abs() < 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ogd_envelope_holds(seed in 0u64..1000) {
        let stream = ObpTaskStream::generate(
            &judge_prosecutor(), 0.05, 0.25, ResponseModel::BestResponse, 5, 5, Adversary::Uniform, seed,
        ).unwrap();
        let c = MetaConstants::from_interval(0.05, 0.25, 5).unwrap();
        let recs = run_full_meta(&stream, &c, &mut rng::stream(seed, &[rng::ALGORITHM, 0])).unwrap();
        for r in &recs {
            prop_assert!(r.expected_regret <= r.ogd_bound + 1e-6);
            prop_assert!(r.eta >= 0.05 - 1e-15 && r.eta <= 0.25 + 1e-15);
        }
    }

    #[test]
    fn bandit_estimators_bounded(seed in 0u64..1000, ball in any::<bool>()) {
        let geometry = if ball { Geometry::Ball } else { Geometry::Polytope };
        let stream = ObpTaskStream::generate(
            &judge_prosecutor(), 0.05, 0.25, ResponseModel::Obedient, 4, 5, Adversary::Uniform, seed,
        ).unwrap();
        let grid = ExpertGrid::default_for(2, 5, 4).unwrap();
        let meta = run_bandit_meta(&stream, grid, geometry, &mut rng::stream(seed, &[rng::ALGORITHM, 0])).unwrap();
        let base = run_bandit_baseline(&stream, 0.1, geometry, &mut rng::stream(seed, &[rng::ALGORITHM, 1])).unwrap();
        for r in meta.iter().chain(&base) {
            prop_assert!(r.max_estimator_norm <= 2.0 + 1e-9);
        }
        for r in &meta {
            prop_assert!((r.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
