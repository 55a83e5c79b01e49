use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::ConfusionMatrix;
use super::strategy::{evaluate_classifier, Evaluation, StrategySpec, Task};
use super::HarnessError;
use crate::envmodel::{simulate_environment, split_environment, Environment, SimSpec};
use crate::seed::child_seed;

/// Where each replication's environment comes from.
#[derive(Debug, Clone)]
pub enum EnvSource {
    /// One environment, re-split every replication.
    Fixed(Environment),
    /// A fresh environment per replication.
    Simulated(SimSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SourceInfo {
    Fixed { n_objects: usize, n_cues: usize },
    Simulated { spec: SimSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossValidateOptions {
    pub reps: usize,
    pub train_fraction: f64,
    pub master_seed: u64,
    pub task: Task,
    /// Record wall-clock time per strategy. Off by default, since timings
    /// make reports irreproducible.
    pub timing: bool,
}

impl CrossValidateOptions {
    pub fn new(reps: usize, train_fraction: f64, master_seed: u64, task: Task) -> Self {
        Self { reps, train_fraction, master_seed, task, timing: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean; 0 for a single replication.
    pub se: f64,
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let se = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
        };
        Some(Self { mean, se })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCell {
    pub rep: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: String,
    pub kind: String,
    pub completed: usize,
    pub fit_acc: Option<Estimate>,
    pub pred_acc: Option<Estimate>,
    /// Mean cues consulted per test case.
    pub frugality: Option<f64>,
    /// Rates of the test confusion matrix pooled over replications.
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub test_confusion: ConfusionMatrix,
    pub wall_ms: Option<f64>,
    pub failures: Vec<FailedCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub master_seed: u64,
    pub reps: usize,
    pub train_fraction: f64,
    pub task: Task,
    pub source: SourceInfo,
    pub strategies: Vec<StrategySpec>,
    /// Hash of each replication's train/test partition, shared by every
    /// strategy; `None` when the replication could not be split.
    pub partition_hashes: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub metadata: RunMetadata,
    pub strategies: Vec<StrategyReport>,
}

/// FNV-1a over the train ids, a separator, then the test ids.
pub fn partition_hash(train: &Environment, test: &Environment) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for id in train.objects() {
        feed(id.as_bytes());
        feed(b"\n");
    }
    feed(b"|");
    for id in test.objects() {
        feed(id.as_bytes());
        feed(b"\n");
    }
    format!("{h:016x}")
}

struct RepOutcome {
    hash: Option<String>,
    cells: Vec<Result<(Evaluation, f64), String>>,
}

fn run_rep(source: &EnvSource, strategies: &[StrategySpec], opts: &CrossValidateOptions, rep: usize) -> RepOutcome {
    let rep_seed = child_seed(opts.master_seed, rep as u64);
    let env = match source {
        EnvSource::Fixed(env) => Ok(std::borrow::Cow::Borrowed(env)),
        EnvSource::Simulated(spec) => {
            simulate_environment(&spec.with_seed(child_seed(rep_seed, 0))).map(std::borrow::Cow::Owned)
        }
    };
    let split = env.and_then(|env| split_environment(&env, opts.train_fraction, child_seed(rep_seed, 1)));
    let split = match split {
        Ok(s) => s,
        Err(e) => {
            let msg = e.to_string();
            return RepOutcome { hash: None, cells: strategies.iter().map(|_| Err(msg.clone())).collect() };
        }
    };
    let eval_seed = child_seed(rep_seed, 2);
    let cells = strategies
        .iter()
        .map(|spec| {
            let start = Instant::now();
            let result = evaluate_classifier(spec, &split.train, &split.test, opts.task, eval_seed);
            let ms = start.elapsed().as_secs_f64() * 1e3;
            result.map(|ev| (ev, ms)).map_err(|e| e.to_string())
        })
        .collect();
    RepOutcome { hash: Some(partition_hash(&split.train, &split.test)), cells }
}

/// Runs `reps` paired replications. Replication `r` uses the seed
/// `child_seed(master_seed, r)`, from which the environment (stream 0), the
/// split (stream 1) and the guess coins (stream 2) are derived; every
/// strategy sees the same split. Replications run in parallel and are
/// aggregated in replication order.
pub fn cross_validate(
    source: &EnvSource,
    strategies: &[StrategySpec],
    opts: &CrossValidateOptions,
) -> Result<BenchmarkReport, HarnessError> {
    if opts.reps == 0 {
        return Err(HarnessError::InvalidArgument("reps must be >= 1".into()));
    }
    if strategies.is_empty() {
        return Err(HarnessError::InvalidArgument("no strategies given".into()));
    }
    if !(opts.train_fraction > 0.0 && opts.train_fraction < 1.0) {
        return Err(HarnessError::InvalidArgument(format!(
            "train_fraction must lie in (0, 1), got {}",
            opts.train_fraction
        )));
    }
    for (i, s) in strategies.iter().enumerate() {
        s.validate()?;
        if strategies[..i].iter().any(|t| t.name() == s.name()) {
            return Err(HarnessError::InvalidStrategy(format!("duplicate strategy name `{}`", s.name())));
        }
    }
    let source_info = match source {
        EnvSource::Fixed(env) => SourceInfo::Fixed { n_objects: env.n_objects(), n_cues: env.n_cues() },
        EnvSource::Simulated(spec) => {
            spec.validate()?;
            SourceInfo::Simulated { spec: spec.clone() }
        }
    };

    let outcomes: Vec<RepOutcome> = (0..opts.reps).into_par_iter().map(|r| run_rep(source, strategies, opts, r)).collect();

    let reports = strategies
        .iter()
        .enumerate()
        .map(|(s, spec)| {
            let (mut fit, mut pred, mut frugal, mut wall) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            let mut pooled = ConfusionMatrix::default();
            let mut failures = Vec::new();
            for (rep, outcome) in outcomes.iter().enumerate() {
                match &outcome.cells[s] {
                    Ok((ev, ms)) => {
                        fit.push(ev.train.accuracy().expect("nonempty"));
                        pred.push(ev.test.accuracy().expect("nonempty"));
                        frugal.push(ev.frugality);
                        wall.push(*ms);
                        pooled = pooled.merge(&ev.test);
                    }
                    Err(error) => failures.push(FailedCell { rep, error: error.clone() }),
                }
            }
            StrategyReport {
                strategy: spec.name().to_string(),
                kind: spec.kind_name().to_string(),
                completed: pred.len(),
                fit_acc: Estimate::of(&fit),
                pred_acc: Estimate::of(&pred),
                frugality: Estimate::of(&frugal).map(|e| e.mean),
                sensitivity: pooled.sensitivity(),
                specificity: pooled.specificity(),
                balanced_accuracy: pooled.balanced_accuracy(),
                test_confusion: pooled,
                wall_ms: if opts.timing { Estimate::of(&wall).map(|e| e.mean) } else { None },
                failures,
            }
        })
        .collect();

    Ok(BenchmarkReport {
        metadata: RunMetadata {
            master_seed: opts.master_seed,
            reps: opts.reps,
            train_fraction: opts.train_fraction,
            task: opts.task,
            source: source_info,
            strategies: strategies.to_vec(),
            partition_hashes: outcomes.into_iter().map(|o| o.hash).collect(),
        },
        strategies: reports,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    LessIsMore,
    LessIsEqual,
    MoreIsMore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub frugal: String,
    pub greedy: String,
    /// Frugal minus greedy mean prediction accuracy.
    pub difference: f64,
    pub combined_se: f64,
    pub verdict: ProbeVerdict,
}

/// Compares every pair of strategies that differ in frugality. The pair is
/// less-is-more when the frugal one predicts better by more than two
/// combined standard errors `sqrt(se_a^2 + se_b^2)`, less-is-equal within
/// two, and more-is-more otherwise. Strategies without accuracy or
/// frugality are skipped.
pub fn less_is_more_probe(report: &BenchmarkReport) -> Vec<Finding> {
    let usable: Vec<(&StrategyReport, Estimate, f64)> = report
        .strategies
        .iter()
        .filter_map(|s| Some((s, s.pred_acc?, s.frugality?)))
        .collect();
    let mut findings = Vec::new();
    for (i, a) in usable.iter().enumerate() {
        for b in &usable[i + 1..] {
            let (frugal, greedy) = match a.2.total_cmp(&b.2) {
                std::cmp::Ordering::Less => (a, b),
                std::cmp::Ordering::Greater => (b, a),
                std::cmp::Ordering::Equal => continue,
            };
            let difference = frugal.1.mean - greedy.1.mean;
            let combined_se = (frugal.1.se.powi(2) + greedy.1.se.powi(2)).sqrt();
            let verdict = if difference > 2.0 * combined_se {
                ProbeVerdict::LessIsMore
            } else if difference.abs() <= 2.0 * combined_se {
                ProbeVerdict::LessIsEqual
            } else {
                ProbeVerdict::MoreIsMore
            };
            findings.push(Finding {
                frugal: frugal.0.strategy.clone(),
                greedy: greedy.0.strategy.clone(),
                difference,
                combined_se,
                verdict,
            });
        }
    }
    findings
}

/// `x` rounded to 6 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

fn round_opt(x: Option<f64>) -> Option<f64> {
    x.map(round_sig)
}

impl BenchmarkReport {
    /// Copy with every computed value rounded to 6 significant digits.
    pub fn rounded(&self) -> Self {
        let mut out = self.clone();
        for s in &mut out.strategies {
            let est = |e: Option<Estimate>| e.map(|e| Estimate { mean: round_sig(e.mean), se: round_sig(e.se) });
            s.fit_acc = est(s.fit_acc);
            s.pred_acc = est(s.pred_acc);
            s.frugality = round_opt(s.frugality);
            s.sensitivity = round_opt(s.sensitivity);
            s.specificity = round_opt(s.specificity);
            s.balanced_accuracy = round_opt(s.balanced_accuracy);
            s.wall_ms = round_opt(s.wall_ms);
        }
        out
    }

    pub fn strategy(&self, name: &str) -> Option<&StrategyReport> {
        self.strategies.iter().find(|s| s.strategy == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` means JSON; anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

pub const CSV_HEADER: [&str; 8] = ["strategy", "fit_acc", "pred_acc", "pred_se", "frugality", "sens", "spec", "wall_ms"];

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| round_sig(v).to_string())
}

pub fn render_report(report: &BenchmarkReport, format: ReportFormat) -> Result<String, HarnessError> {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(&report.rounded()).map_err(|e| HarnessError::Json(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Csv => {
            let mut wtr = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| HarnessError::Io(e.to_string());
            wtr.write_record(CSV_HEADER).map_err(io)?;
            for s in &report.strategies {
                wtr.write_record([
                    s.strategy.clone(),
                    cell(s.fit_acc.map(|e| e.mean)),
                    cell(s.pred_acc.map(|e| e.mean)),
                    cell(s.pred_acc.map(|e| e.se)),
                    cell(s.frugality),
                    cell(s.sensitivity),
                    cell(s.specificity),
                    cell(s.wall_ms),
                ])
                .map_err(io)?;
            }
            let bytes = wtr.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

pub fn emit_report(report: &BenchmarkReport, format: ReportFormat, path: &Path) -> Result<(), HarnessError> {
    let text = render_report(report, format)?;
    std::fs::write(path, text).map_err(|e| HarnessError::Io(e.to_string()))
}

pub fn parse_json_report(text: &str) -> Result<BenchmarkReport, HarnessError> {
    serde_json::from_str(text).map_err(|e| HarnessError::Json(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envmodel::WeightProfile;
    use crate::harness::StrategyKind;

    fn sim() -> SimSpec {
        SimSpec {
            n_objects: 40,
            n_cues: 4,
            weight_profile: WeightProfile::Noncompensatory,
            redundancy: 0.0,
            noise: 0.1,
            seed: 0,
        }
    }

    fn strategies() -> Vec<StrategySpec> {
        serde_json::from_str(r#"[{"kind":"ttb"},{"kind":"tallying"},{"kind":"linear"},{"kind":"fft"}]"#).unwrap()
    }

    #[test]
    fn single_rep_matches_direct_evaluation() {
        let opts = CrossValidateOptions::new(1, 0.5, 11, Task::PairedComparison);
        let report = cross_validate(&EnvSource::Simulated(sim()), &strategies(), &opts).unwrap();
        let rep_seed = child_seed(11, 0);
        let env = simulate_environment(&sim().with_seed(child_seed(rep_seed, 0))).unwrap();
        let split = split_environment(&env, 0.5, child_seed(rep_seed, 1)).unwrap();
        let ev = evaluate_classifier(&strategies()[0], &split.train, &split.test, Task::PairedComparison, child_seed(rep_seed, 2))
            .unwrap();
        let ttb = report.strategy("ttb").unwrap();
        assert_eq!(ttb.pred_acc, Some(Estimate { mean: ev.test.accuracy().unwrap(), se: 0.0 }));
        assert_eq!(ttb.fit_acc.unwrap().mean, ev.train.accuracy().unwrap());
        assert_eq!(ttb.frugality, Some(ev.frugality));
        assert_eq!(report.metadata.partition_hashes, vec![Some(partition_hash(&split.train, &split.test))]);
    }

    #[test]
    fn failed_cells_are_recorded() {
        let opts = CrossValidateOptions::new(3, 0.5, 1, Task::PairedComparison);
        let report = cross_validate(&EnvSource::Simulated(sim()), &strategies(), &opts).unwrap();
        let fft = report.strategy("fft").unwrap();
        assert_eq!((fft.completed, fft.failures.len()), (0, 3));
        assert_eq!(fft.pred_acc, None);
        assert_eq!(report.strategy("linear").unwrap().completed, 3);
    }

    #[test]
    fn reports_are_deterministic() {
        let opts = CrossValidateOptions::new(8, 0.5, 5, Task::PairedComparison);
        let a = cross_validate(&EnvSource::Simulated(sim()), &strategies(), &opts).unwrap();
        let b = cross_validate(&EnvSource::Simulated(sim()), &strategies(), &opts).unwrap();
        for format in [ReportFormat::Csv, ReportFormat::Json] {
            assert_eq!(render_report(&a, format).unwrap(), render_report(&b, format).unwrap());
        }
    }

    #[test]
    fn json_round_trip_and_csv_header() {
        let opts = CrossValidateOptions::new(4, 0.5, 2, Task::PairedComparison);
        let report = cross_validate(&EnvSource::Simulated(sim()), &strategies(), &opts).unwrap();
        let json = render_report(&report, ReportFormat::Json).unwrap();
        assert_eq!(parse_json_report(&json).unwrap(), report.rounded());
        let csv = render_report(&report, ReportFormat::Csv).unwrap();
        assert!(csv.starts_with("strategy,fit_acc,pred_acc,pred_se,frugality,sens,spec,wall_ms\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn invalid_runs_rejected() {
        let opts = CrossValidateOptions::new(0, 0.5, 0, Task::Classification);
        assert!(cross_validate(&EnvSource::Simulated(sim()), &strategies(), &opts).is_err());
        let opts = CrossValidateOptions::new(1, 0.5, 0, Task::Classification);
        assert!(cross_validate(&EnvSource::Simulated(sim()), &[], &opts).is_err());
        let dup = vec![StrategySpec::from(StrategyKind::Linear), StrategySpec::from(StrategyKind::Linear)];
        assert!(cross_validate(&EnvSource::Simulated(sim()), &dup, &opts).is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.123456789), 0.123457);
        assert_eq!(round_sig(1234567.0), 1234570.0);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(cell(Some(2.0 / 3.0)), "0.666667");
        assert_eq!(cell(None), "NA");
    }

    fn report_with(entries: &[(&str, f64, f64, f64)]) -> BenchmarkReport {
        let strategies = entries
            .iter()
            .map(|&(name, mean, se, frugality)| StrategyReport {
                strategy: name.into(),
                kind: name.into(),
                completed: 10,
                fit_acc: None,
                pred_acc: Some(Estimate { mean, se }),
                frugality: Some(frugality),
                sensitivity: None,
                specificity: None,
                balanced_accuracy: None,
                test_confusion: ConfusionMatrix::default(),
                wall_ms: None,
                failures: vec![],
            })
            .collect();
        BenchmarkReport {
            metadata: RunMetadata {
                master_seed: 0,
                reps: 10,
                train_fraction: 0.5,
                task: Task::PairedComparison,
                source: SourceInfo::Fixed { n_objects: 10, n_cues: 4 },
                strategies: vec![],
                partition_hashes: vec![],
            },
            strategies,
        }
    }

    #[test]
    fn probe_verdicts() {
        let f = less_is_more_probe(&report_with(&[("ttb", 0.75, 0.005, 1.5), ("logistic", 0.70, 0.005, 4.0)]));
        assert_eq!(f[0].verdict, ProbeVerdict::LessIsMore);
        assert_eq!((f[0].frugal.as_str(), f[0].greedy.as_str()), ("ttb", "logistic"));
        let f = less_is_more_probe(&report_with(&[("logistic", 0.7, 0.01, 4.0), ("ttb", 0.7, 0.01, 1.5)]));
        assert_eq!(f[0].verdict, ProbeVerdict::LessIsEqual);
        let f = less_is_more_probe(&report_with(&[("ttb", 0.70, 0.01, 1.5), ("logistic", 0.70 + 5.0 * 0.01 * 2f64.sqrt(), 0.01, 4.0)]));
        assert_eq!(f[0].verdict, ProbeVerdict::MoreIsMore);
        assert!(less_is_more_probe(&report_with(&[("ttb", 0.7, 0.0, 1.0)])).is_empty());
    }
}
