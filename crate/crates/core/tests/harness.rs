use frugal_core::envmodel::{CueDefinition, Environment, SimSpec, WeightProfile};
use frugal_core::harness::{
    cross_validate, emit_report, evaluate_classifier, ConfusionMatrix, CrossValidateOptions, EnvSource, ReportFormat,
    StrategySpec, Task,
};
use proptest::prelude::*;

fn specs(json: &str) -> Vec<StrategySpec> {
    serde_json::from_str(json).unwrap()
}

fn noisy() -> SimSpec {
    SimSpec { n_objects: 40, n_cues: 4, weight_profile: WeightProfile::Uniform, redundancy: 0.2, noise: 0.25, seed: 0 }
}

/// Validity by listing every (positive, negative) pair.
fn brute_validity(env: &Environment, cue: usize) -> f64 {
    let (mut right, mut wrong) = (0, 0);
    for i in 0..env.n_objects() {
        for j in 0..env.n_objects() {
            if env.criterion()[i] && !env.criterion()[j] {
                let (a, b) = (env.value(i, cue), env.value(j, cue));
                if a > b {
                    right += 1;
                } else if a < b {
                    wrong += 1;
                }
            }
        }
    }
    if right + wrong == 0 { 0.5 } else { right as f64 / (right + wrong) as f64 }
}

#[test]
fn ttb_predictions_match_lexicographic_oracle() {
    let cues = vec![CueDefinition::binary("a"), CueDefinition::binary("b"), CueDefinition::binary("c")];
    let train = Environment::from_rows(
        cues.clone(),
        &[
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![1.0, 1.0, 1.0],
        ],
        &[true, true, false, false, true, false, false, true],
    )
    .unwrap();
    // Every test row is distinct, so no unequal-criterion pair is a guess.
    let test_rows: Vec<Vec<f64>> = (0..8).map(|m| (0..3).map(|k| ((m >> (2 - k)) & 1) as f64).collect()).collect();
    let test_crit = [false, true, false, true, true, false, true, true];
    let test = Environment::from_rows(cues, &test_rows, &test_crit).unwrap();

    // Oracle: brute-force validities, stable descending sort, flip directions below 0.5.
    let mut order: Vec<(usize, f64)> = (0..3).map(|k| (k, brute_validity(&train, k))).collect();
    order.sort_by(|x, y| (y.1 - 0.5).abs().total_cmp(&(x.1 - 0.5).abs()));
    let mut expected = ConfusionMatrix::default();
    for i in 0..8 {
        for j in i + 1..8 {
            if test_crit[i] == test_crit[j] {
                continue;
            }
            let pick_i = order
                .iter()
                .find_map(|&(k, v)| {
                    let (a, b) = (test_rows[i][k], test_rows[j][k]);
                    (a != b).then_some((a > b) == (v >= 0.5))
                })
                .unwrap();
            expected.record(
                frugal_core::envmodel::Label::from_bool(pick_i),
                frugal_core::envmodel::Label::from_bool(test_crit[i]),
            );
        }
    }
    let ev = evaluate_classifier(&specs(r#"[{"kind":"ttb"}]"#)[0], &train, &test, Task::PairedComparison, 3).unwrap();
    assert_eq!(ev.test, expected);
}

#[test]
fn flexible_models_fit_better_than_they_predict() {
    let report = cross_validate(
        &EnvSource::Simulated(noisy()),
        &specs(r#"[{"kind":"linear"},{"kind":"logistic"}]"#),
        &CrossValidateOptions::new(200, 0.5, 21, Task::Classification),
    )
    .unwrap();
    for s in &report.strategies {
        let (fit, pred) = (s.fit_acc.unwrap().mean, s.pred_acc.unwrap().mean);
        assert!(fit - pred >= -0.005, "{}: fit {fit}, predict {pred}", s.strategy);
    }
}

#[test]
fn frugality_is_bounded_by_structure() {
    let report = cross_validate(
        &EnvSource::Simulated(noisy()),
        &specs(r#"[{"kind":"fft","max_depth":2},{"kind":"threshold"},{"kind":"linear"},{"kind":"logistic"}]"#),
        &CrossValidateOptions::new(20, 0.5, 2, Task::Classification),
    )
    .unwrap();
    let frugality = |name: &str| report.strategy(name).unwrap().frugality.unwrap();
    assert!(frugality("fft") <= 2.0);
    assert_eq!(frugality("threshold"), 1.0);
    assert_eq!(frugality("linear"), 4.0);
    assert_eq!(frugality("logistic"), 4.0);
}

#[test]
fn every_strategy_sees_the_same_partition() {
    let strategies = specs(r#"[{"kind":"ttb"},{"kind":"tallying"},{"kind":"linear"}]"#);
    let opts = CrossValidateOptions::new(6, 0.5, 8, Task::PairedComparison);
    let together = cross_validate(&EnvSource::Simulated(noisy()), &strategies, &opts).unwrap();
    for s in &strategies {
        let alone = cross_validate(&EnvSource::Simulated(noisy()), std::slice::from_ref(s), &opts).unwrap();
        assert_eq!(alone.metadata.partition_hashes, together.metadata.partition_hashes);
        assert_eq!(alone.strategies[0], together.strategies.iter().find(|r| r.strategy == s.name()).unwrap().clone());
    }
}

#[test]
fn emitted_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let strategies = specs(r#"[{"kind":"ttb"},{"kind":"logistic"}]"#);
    let opts = CrossValidateOptions::new(10, 0.5, 77, Task::PairedComparison);
    for format in [ReportFormat::Csv, ReportFormat::Json] {
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        for path in [&a, &b] {
            let report = cross_validate(&EnvSource::Simulated(noisy()), &strategies, &opts).unwrap();
            emit_report(&report, format, path).unwrap();
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
    let missing = dir.path().join("no/such/dir/report.csv");
    let report = cross_validate(&EnvSource::Simulated(noisy()), &strategies, &opts).unwrap();
    assert!(emit_report(&report, ReportFormat::Csv, &missing).is_err());
}

proptest! {
    #[test]
    fn confusion_identities(tp in 0u64..1000, fp in 0u64..1000, tn in 0u64..1000, fn_ in 0u64..1000) {
        let cm = ConfusionMatrix::new(tp, fp, tn, fn_);
        if let (Some(s), Some(m)) = (cm.sensitivity(), cm.false_negative_rate()) {
            prop_assert!((s + m - 1.0).abs() <= 1e-15);
        }
        if let (Some(s), Some(f)) = (cm.specificity(), cm.false_alarm_rate()) {
            prop_assert!((s + f - 1.0).abs() <= 1e-15);
        }
        if cm.total() > 0 {
            prop_assert_eq!(cm.accuracy().unwrap(), (tp + tn) as f64 / cm.total() as f64);
        }
    }
}
