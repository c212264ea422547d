//! Evaluator against the brute-force reference in `common`.

mod common;

use common::{micro_eval, oracle_ap, OMETRICS};
use proptest::prelude::*;
use synthlidar::eval::{evaluate, EvalConfig, Metric};
use synthlidar::labels::Difficulty;
use synthlidar::Executor;

fn compare(seed: u64) -> Result<(), TestCaseError> {
    let (dets, gts) = micro_eval(seed);
    let report = evaluate(&dets, &gts, &EvalConfig::default(), &Executor::sequential()).unwrap();
    for (m, om) in Metric::ALL.iter().zip(OMETRICS) {
        for (k, d) in Difficulty::EVALUATED.iter().enumerate() {
            let got = report.get(*m, *d).map(|v| v / 100.0);
            let want = oracle_ap(&dets, &gts, om, k);
            match (got, want) {
                (Some(g), Some(w)) => prop_assert!((g - w).abs() <= 1e-9, "{m:?}/{d:?}: {g} vs {w}"),
                (g, w) => prop_assert_eq!(g.is_some(), w.is_some()),
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn matches_reference(seed in any::<u64>()) {
        compare(seed)?;
    }
}

#[test]
fn perfect_detections_score_full_marks() {
    let (_, gts) = micro_eval(3);
    let dets = gts
        .iter()
        .map(|(id, g)| {
            let d = g
                .iter()
                .filter(|l| l.class == "Car")
                .map(|l| {
                    let mut l = l.clone();
                    l.score = Some(0.9);
                    l
                })
                .collect();
            (*id, d)
        })
        .collect();
    let report = evaluate(&dets, &gts, &EvalConfig::default(), &Executor::sequential()).unwrap();
    for m in Metric::ALL {
        for d in Difficulty::EVALUATED {
            if let Some(v) = report.get(m, d) {
                assert!((v - 100.0).abs() < 1e-9, "{m:?}/{d:?}: {v}");
            }
        }
    }
}

#[test]
fn parallel_equals_sequential() {
    let (dets, gts) = micro_eval(44);
    let cfg = EvalConfig::default();
    let a = evaluate(&dets, &gts, &cfg, &Executor::sequential()).unwrap();
    let b = evaluate(&dets, &gts, &cfg, &Executor::with_workers(4)).unwrap();
    assert_eq!(a, b);
}
