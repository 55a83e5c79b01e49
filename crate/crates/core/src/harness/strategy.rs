use rand::Rng;
use serde::{Deserialize, Serialize};

use super::metrics::ConfusionMatrix;
use super::HarnessError;
use crate::baselines::{fit_linear, fit_logistic, LinearModel, LogisticModel, LogisticOptions, ScoreModel};
use crate::envmodel::{Direction, Environment, Label};
use crate::fftbuild::{
    binarize_cue, build_fft, compute_cue_stats, order_cues, Binarization, CostRatio, ExitPolicy, FastFrugalTree,
    OrderingRule,
};
use crate::seed::child_seed;
use crate::toolbox::{
    fft_classify, tallying_compare_rows, threshold_classify, ttb_compare_rows, Choice, CueOrder, InferenceOutcome,
    Polarity, Side,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Label each object positive or negative.
    Classification,
    /// For each pair of objects with unequal criterion, infer which one is
    /// positive.
    PairedComparison,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Classification => "classification",
            Task::PairedComparison => "paired_comparison",
        })
    }
}

fn default_ordering() -> OrderingRule {
    OrderingRule::ByValidity
}
fn default_exit() -> ExitPolicy {
    ExitPolicy::Zigzag
}
fn default_depth() -> usize {
    3
}
fn one() -> f64 {
    1.0
}
fn default_max_iter() -> usize {
    LogisticOptions::default().max_iter
}
fn default_tol() -> f64 {
    LogisticOptions::default().tol
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    Ttb {
        #[serde(default = "default_ordering")]
        ordering: OrderingRule,
    },
    Tallying,
    Fft {
        #[serde(default = "default_ordering")]
        ordering: OrderingRule,
        #[serde(default = "default_exit")]
        exit_policy: ExitPolicy,
        #[serde(default = "default_depth")]
        max_depth: usize,
        #[serde(default = "one")]
        cost_fn: f64,
        #[serde(default = "one")]
        cost_fp: f64,
    },
    /// One clever cue. Without `cue` the most valid training cue is used;
    /// without `threshold` the balanced-accuracy split of that cue.
    Threshold {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cue: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        polarity: Option<Polarity>,
    },
    Linear,
    Logistic {
        #[serde(default = "default_max_iter")]
        max_iter: usize,
        #[serde(default = "default_tol")]
        tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    #[serde(flatten)]
    pub kind: StrategyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl From<StrategyKind> for StrategySpec {
    fn from(kind: StrategyKind) -> Self {
        Self { kind, label: None }
    }
}

impl StrategySpec {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            StrategyKind::Ttb { .. } => "ttb",
            StrategyKind::Tallying => "tallying",
            StrategyKind::Fft { .. } => "fft",
            StrategyKind::Threshold { .. } => "threshold",
            StrategyKind::Linear => "linear",
            StrategyKind::Logistic { .. } => "logistic",
        }
    }

    /// The label if given, else the kind.
    pub fn name(&self) -> &str {
        self.label.as_deref().unwrap_or(self.kind_name())
    }

    pub fn with_label(self, label: impl Into<String>) -> Self {
        Self { label: Some(label.into()), ..self }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidStrategy(format!("{}: {m}", self.name())));
        match self.kind {
            StrategyKind::Fft { max_depth, cost_fn, cost_fp, .. } => {
                if max_depth == 0 {
                    return bad("max_depth must be >= 1".into());
                }
                if CostRatio::new(cost_fn, cost_fp).is_err() {
                    return bad(format!("costs must be positive and finite, got {cost_fn}/{cost_fp}"));
                }
            }
            StrategyKind::Threshold { threshold: Some(t), .. } if !t.is_finite() => {
                return bad("threshold must be finite".into());
            }
            StrategyKind::Logistic { max_iter, tol } if max_iter == 0 || tol.is_nan() || tol <= 0.0 => {
                return bad("max_iter must be >= 1 and tol > 0".into());
            }
            _ => {}
        }
        Ok(())
    }

    pub fn applies_to(&self, task: Task) -> bool {
        match self.kind {
            StrategyKind::Ttb { .. } | StrategyKind::Tallying => task == Task::PairedComparison,
            StrategyKind::Fft { .. } => task == Task::Classification,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum ThresholdRule {
    Split(Binarization),
    Manual(f64, Polarity),
}

#[derive(Debug, Clone)]
enum Fitted {
    Lexicographic(CueOrder),
    Tally(CueOrder),
    Tree(FastFrugalTree),
    OneCue { cue: usize, direction: Direction, rule: ThresholdRule },
    Linear(LinearModel),
    Logistic(LogisticModel),
}

/// Non-constant cues in descending validity, directions set so that higher
/// adjusted values favor the positive class.
fn informative_order(train: &Environment, rule: OrderingRule) -> Option<CueOrder> {
    let stats = compute_cue_stats(train);
    let keep: Vec<_> = order_cues(&stats, rule)
        .entries()
        .iter()
        .copied()
        .filter(|&(c, _)| !stats[c].constant)
        .collect();
    if keep.is_empty() {
        None
    } else {
        Some(CueOrder::new(keep).expect("subset of a valid order"))
    }
}

fn fit(spec: &StrategySpec, train: &Environment, task: Task) -> Result<Fitted, String> {
    let no_cue = || "no cue varies on the training data".to_string();
    Ok(match &spec.kind {
        StrategyKind::Ttb { ordering } => Fitted::Lexicographic(informative_order(train, *ordering).ok_or_else(no_cue)?),
        StrategyKind::Tallying => Fitted::Tally(informative_order(train, OrderingRule::ByValidity).ok_or_else(no_cue)?),
        StrategyKind::Fft { ordering, exit_policy, max_depth, cost_fn, cost_fp } => {
            let costs = CostRatio::new(*cost_fn, *cost_fp).map_err(|e| e.to_string())?;
            Fitted::Tree(build_fft(train, *ordering, *exit_policy, *max_depth, costs).map_err(|e| e.to_string())?)
        }
        StrategyKind::Threshold { cue, threshold, polarity } => {
            let stats = compute_cue_stats(train);
            let index = match cue {
                Some(name) => train.cue_index(name).ok_or_else(|| format!("unknown cue `{name}`"))?,
                None => {
                    let mut best: Option<(usize, f64)> = None;
                    for s in stats.iter().filter(|s| !s.constant) {
                        let strength = (s.validity - 0.5).abs();
                        if best.is_none_or(|(_, b)| strength > b) {
                            best = Some((s.cue, strength));
                        }
                    }
                    best.ok_or_else(no_cue)?.0
                }
            };
            let defined = train.cues()[index].direction;
            let direction = if stats[index].validity < 0.5 { defined.flip() } else { defined };
            let rule = match (threshold, task) {
                (Some(t), _) => ThresholdRule::Manual(*t, polarity.unwrap_or(Polarity::AboveIsPositive)),
                (None, Task::Classification) => ThresholdRule::Split(binarize_cue(train, index).map_err(|e| e.to_string())?),
                // Paired comparison reads the raw cue; the threshold is unused.
                (None, Task::PairedComparison) => ThresholdRule::Manual(0.0, Polarity::AboveIsPositive),
            };
            Fitted::OneCue { cue: index, direction, rule }
        }
        StrategyKind::Linear => Fitted::Linear(fit_linear(train)),
        StrategyKind::Logistic { max_iter, tol } => Fitted::Logistic(
            fit_logistic(train, LogisticOptions { max_iter: *max_iter, tol: *tol }).map_err(|e| e.to_string())?,
        ),
    })
}

/// Confusion matrices on both parts and mean cues consulted on the test part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub train: ConfusionMatrix,
    pub test: ConfusionMatrix,
    pub frugality: f64,
}

fn classify(model: &Fitted, row: &[f64]) -> (Label, usize) {
    match model {
        Fitted::Tree(tree) => {
            let out = fft_classify(tree, row).expect("tree bound to the training cues");
            (out.label, out.cues_consulted)
        }
        Fitted::OneCue { cue, rule, .. } => {
            let label = match *rule {
                ThresholdRule::Split(b) => Label::from_bool(b.comparison.holds(row[*cue], b.threshold)),
                ThresholdRule::Manual(t, p) => threshold_classify(row[*cue], t, p).unwrap_or(Label::Negative),
            };
            (label, 1)
        }
        Fitted::Linear(m) => (Label::from_bool(m.predict_score(row).expect("width checked") >= 0.5), row.len()),
        Fitted::Logistic(m) => (Label::from_bool(m.predict_score(row).expect("width checked") >= 0.5), row.len()),
        Fitted::Lexicographic(_) | Fitted::Tally(_) => unreachable!("filtered by applies_to"),
    }
}

fn by_score(sa: f64, sb: f64, tie_seed: u64, consulted: usize) -> InferenceOutcome {
    let choice = if sa > sb {
        Choice::A
    } else if sb > sa {
        Choice::B
    } else {
        Choice::Guess(if crate::seed::rng(tie_seed).random_bool(0.5) { Side::A } else { Side::B })
    };
    InferenceOutcome { choice, deciding_cue: None, cues_consulted: consulted }
}

fn compare(model: &Fitted, a: &[f64], b: &[f64], tie_seed: u64) -> InferenceOutcome {
    match model {
        Fitted::Lexicographic(order) => ttb_compare_rows(a, b, order, tie_seed),
        Fitted::Tally(order) => tallying_compare_rows(a, b, order, tie_seed),
        Fitted::OneCue { cue, direction, .. } => {
            let order = CueOrder::new(vec![(*cue, *direction)]).expect("single cue");
            ttb_compare_rows(a, b, &order, tie_seed)
        }
        Fitted::Linear(m) => by_score(m.predict_score(a).unwrap(), m.predict_score(b).unwrap(), tie_seed, a.len()),
        Fitted::Logistic(m) => by_score(m.predict_score(a).unwrap(), m.predict_score(b).unwrap(), tie_seed, a.len()),
        Fitted::Tree(_) => unreachable!("filtered by applies_to"),
    }
}

/// Scores `model` on `env`: the confusion matrix and mean cues consulted.
/// In paired comparison every unordered pair `(i, j)`, `i < j`, with unequal
/// criterion is one case whose truth is "object i is the positive one".
fn score(model: &Fitted, env: &Environment, task: Task, seed: u64) -> Option<(ConfusionMatrix, f64)> {
    let mut cm = ConfusionMatrix::default();
    let mut consulted = 0usize;
    match task {
        Task::Classification => {
            for i in 0..env.n_objects() {
                let (label, used) = classify(model, env.row(i));
                cm.record(label, env.label(i));
                consulted += used;
            }
        }
        Task::PairedComparison => {
            let crit = env.criterion();
            let mut case = 0u64;
            for i in 0..env.n_objects() {
                for j in i + 1..env.n_objects() {
                    if crit[i] == crit[j] {
                        continue;
                    }
                    let out = compare(model, env.row(i), env.row(j), child_seed(seed, case));
                    cm.record(Label::from_bool(out.choice.resolved() == Side::A), Label::from_bool(crit[i]));
                    consulted += out.cues_consulted;
                    case += 1;
                }
            }
        }
    }
    let total = cm.total();
    (total > 0).then(|| (cm, consulted as f64 / total as f64))
}

/// Fits `strategy` on `train` only and scores it on both parts. Guesses are
/// resolved by coins derived from `seed`.
pub fn evaluate_classifier(
    strategy: &StrategySpec,
    train: &Environment,
    test: &Environment,
    task: Task,
    seed: u64,
) -> Result<Evaluation, HarnessError> {
    strategy.validate()?;
    if train.cue_names() != test.cue_names() {
        return Err(HarnessError::CueMismatch);
    }
    if !strategy.applies_to(task) {
        return Err(HarnessError::Inapplicable { strategy: strategy.name().to_string(), task });
    }
    let failed = |message: String| HarnessError::Strategy { strategy: strategy.name().to_string(), message };
    let model = fit(strategy, train, task).map_err(failed)?;
    let no_cases = || failed("no object pair with unequal criterion".into());
    let (train_cm, _) = score(&model, train, task, child_seed(seed, 0)).ok_or_else(no_cases)?;
    let (test_cm, frugality) = score(&model, test, task, child_seed(seed, 1)).ok_or_else(no_cases)?;
    Ok(Evaluation { train: train_cm, test: test_cm, frugality })
}
