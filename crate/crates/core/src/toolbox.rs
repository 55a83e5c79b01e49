//! Executable heuristics. Each one is a search rule (which cue next), a
//! stopping rule (when to stop looking) and a decision rule, and reports
//! how much information it consumed.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envmodel::{Direction, Environment, Label};
use crate::fftbuild::FastFrugalTree;
use crate::seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ToolboxError {
    #[error("unknown object id `{0}`")]
    UnknownObject(String),
    #[error("cannot compare an object with itself (`{0}`)")]
    SameObject(String),
    #[error("cue order is empty")]
    EmptyOrder,
    #[error("cue order repeats cue {0}")]
    DuplicateCue(usize),
    #[error("cue index {index} out of range for {n_cues} cues")]
    CueOutOfRange { index: usize, n_cues: usize },
    #[error("missing cue value: tree needs {needed} values, got {given}")]
    MissingCueValue { needed: usize, given: usize },
    #[error("option `{option}` lacks cue `{cue}`")]
    MissingAttribute { option: String, cue: String },
    #[error("non-finite input")]
    NonFinite,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Ordered list of (cue index, direction) pairs with distinct cues.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueOrder(Vec<(usize, Direction)>);

impl CueOrder {
    pub fn new(entries: Vec<(usize, Direction)>) -> Result<Self, ToolboxError> {
        let mut seen = BTreeSet::new();
        for &(c, _) in &entries {
            if !seen.insert(c) {
                return Err(ToolboxError::DuplicateCue(c));
            }
        }
        Ok(Self(entries))
    }

    /// The given cues in the given order, with directions taken from the
    /// environment's cue definitions.
    pub fn from_definitions(env: &Environment, cues: &[usize]) -> Result<Self, ToolboxError> {
        let entries = cues
            .iter()
            .map(|&c| {
                env.cues()
                    .get(c)
                    .map(|d| (c, d.direction))
                    .ok_or(ToolboxError::CueOutOfRange { index: c, n_cues: env.n_cues() })
            })
            .collect::<Result<_, _>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(usize, Direction)] {
        &self.0
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|&(c, _)| c).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }

    fn check(&self, env: &Environment) -> Result<(), ToolboxError> {
        if self.0.is_empty() {
            return Err(ToolboxError::EmptyOrder);
        }
        match self.0.iter().find(|&&(c, _)| c >= env.n_cues()) {
            Some(&(index, _)) => Err(ToolboxError::CueOutOfRange { index, n_cues: env.n_cues() }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Choice {
    A,
    B,
    /// No cue decided; the payload is the fair-coin resolution.
    Guess(Side),
}

impl Choice {
    pub fn resolved(self) -> Side {
        match self {
            Choice::A => Side::A,
            Choice::B => Side::B,
            Choice::Guess(side) => side,
        }
    }

    pub fn is_guess(self) -> bool {
        matches!(self, Choice::Guess(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceOutcome {
    pub choice: Choice,
    pub deciding_cue: Option<usize>,
    pub cues_consulted: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationOutcome {
    pub label: Label,
    /// 1-based node at which search stopped.
    pub exit_depth: usize,
    pub cues_consulted: usize,
}

fn coin(tie_seed: u64) -> Side {
    if seed::rng(tie_seed).random::<bool>() {
        Side::A
    } else {
        Side::B
    }
}

fn resolve_pair(env: &Environment, a: &str, b: &str) -> Result<(usize, usize), ToolboxError> {
    let ia = env.object_index(a).ok_or_else(|| ToolboxError::UnknownObject(a.to_string()))?;
    let ib = env.object_index(b).ok_or_else(|| ToolboxError::UnknownObject(b.to_string()))?;
    if ia == ib {
        return Err(ToolboxError::SameObject(a.to_string()));
    }
    Ok((ia, ib))
}

/// Take-the-best on two objects given by id.
pub fn ttb_compare(env: &Environment, order: &CueOrder, a: &str, b: &str, tie_seed: u64) -> Result<InferenceOutcome, ToolboxError> {
    let (ia, ib) = resolve_pair(env, a, b)?;
    order.check(env)?;
    Ok(ttb_compare_rows(env.row(ia), env.row(ib), order, tie_seed))
}

/// Take-the-best on two cue rows: the first cue (in order) whose
/// direction-adjusted values differ decides for the higher object. When no
/// cue discriminates, a coin seeded by `tie_seed` decides and every cue
/// counts as consulted.
pub fn ttb_compare_rows(a: &[f64], b: &[f64], order: &CueOrder, tie_seed: u64) -> InferenceOutcome {
    for (pos, &(cue, dir)) in order.entries().iter().enumerate() {
        let (va, vb) = (dir.adjust(a[cue]), dir.adjust(b[cue]));
        if va != vb {
            return InferenceOutcome {
                choice: if va > vb { Choice::A } else { Choice::B },
                deciding_cue: Some(cue),
                cues_consulted: pos + 1,
            };
        }
    }
    InferenceOutcome {
        choice: Choice::Guess(coin(tie_seed)),
        deciding_cue: None,
        cues_consulted: order.len(),
    }
}

/// Tallying on two objects given by id; see [`tallying_compare_rows`].
pub fn tallying_compare(env: &Environment, cues: &CueOrder, a: &str, b: &str, tie_seed: u64) -> Result<InferenceOutcome, ToolboxError> {
    let (ia, ib) = resolve_pair(env, a, b)?;
    cues.check(env)?;
    Ok(tallying_compare_rows(env.row(ia), env.row(ib), cues, tie_seed))
}

/// Unit-weight tally: every cue votes for the object with the higher
/// direction-adjusted value, and the object with more votes wins. For
/// binary cues this is the sign of the difference of unit-weight sums. All
/// cues are always consulted; on a decision the last cue of the subset is
/// reported as deciding, since the tally is only complete there.
pub fn tallying_compare_rows(a: &[f64], b: &[f64], cues: &CueOrder, tie_seed: u64) -> InferenceOutcome {
    let tally: i64 = cues
        .entries()
        .iter()
        .map(|&(cue, dir)| {
            let (va, vb) = (dir.adjust(a[cue]), dir.adjust(b[cue]));
            (va > vb) as i64 - (vb > va) as i64
        })
        .sum();
    let last = cues.entries().last().map(|&(c, _)| c);
    let (choice, deciding_cue) = match tally.signum() {
        1 => (Choice::A, last),
        -1 => (Choice::B, last),
        _ => (Choice::Guess(coin(tie_seed)), None),
    };
    InferenceOutcome {
        choice,
        deciding_cue,
        cues_consulted: cues.len(),
    }
}

pub fn fft_classify(tree: &FastFrugalTree, cue_values: &[f64]) -> Result<ClassificationOutcome, ToolboxError> {
    let needed = tree.required_width();
    if cue_values.len() < needed {
        return Err(ToolboxError::MissingCueValue { needed, given: cue_values.len() });
    }
    let (label, depth) = tree.route(cue_values);
    Ok(ClassificationOutcome {
        label,
        exit_depth: depth,
        cues_consulted: depth,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    AboveIsPositive,
    BelowIsPositive,
}

/// One-clever-cue classification. The boundary value belongs to the
/// positive side under either polarity.
pub fn threshold_classify(value: f64, threshold: f64, polarity: Polarity) -> Result<Label, ToolboxError> {
    if !value.is_finite() || !threshold.is_finite() {
        return Err(ToolboxError::NonFinite);
    }
    Ok(Label::from_bool(match polarity {
        Polarity::AboveIsPositive => value >= threshold,
        Polarity::BelowIsPositive => value <= threshold,
    }))
}

/// Keys of the `k` highest scores, extended to every key tied with the
/// score at the boundary.
pub fn top_k_select<K: Ord + Clone>(scores: &[(K, f64)], k: usize) -> BTreeSet<K> {
    if k == 0 || scores.is_empty() {
        return BTreeSet::new();
    }
    let mut sorted: Vec<&(K, f64)> = scores.iter().collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
    let cut = sorted[k.min(sorted.len()) - 1].1;
    sorted
        .into_iter()
        .take_while(|(_, s)| *s >= cut)
        .map(|(key, _)| key.clone())
        .collect()
}

/// Top-X% rule: the smallest descending-score prefix holding at least
/// `ceil(fraction * n)` objects, boundary ties included.
pub fn top_fraction_select<K: Ord + Clone>(scores: &[(K, f64)], fraction: f64) -> Result<BTreeSet<K>, ToolboxError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(ToolboxError::InvalidArgument(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    if scores.is_empty() {
        return Err(ToolboxError::InvalidArgument("no scores given".into()));
    }
    if scores.iter().any(|(_, s)| !s.is_finite()) {
        return Err(ToolboxError::NonFinite);
    }
    // Shave representation error so that e.g. 0.1 * 30 yields 3, not 4.
    let k = ((fraction * scores.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(top_k_select(scores, k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatisficingOption {
    pub id: String,
    pub attributes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatisficingOutcome {
    pub chosen: Option<String>,
    pub examined: usize,
}

/// Aspiration-level search: returns the first option (in the given order)
/// meeting every minimum, not the best one.
pub fn satisficing_select(options: &[SatisficingOption], thresholds: &BTreeMap<String, f64>) -> Result<SatisficingOutcome, ToolboxError> {
    for opt in options {
        if let Some(cue) = thresholds.keys().find(|c| !opt.attributes.contains_key(*c)) {
            return Err(ToolboxError::MissingAttribute { option: opt.id.clone(), cue: cue.clone() });
        }
    }
    for (n, opt) in options.iter().enumerate() {
        if thresholds.iter().all(|(cue, min)| opt.attributes[cue] >= *min) {
            return Ok(SatisficingOutcome { chosen: Some(opt.id.clone()), examined: n + 1 });
        }
    }
    Ok(SatisficingOutcome { chosen: None, examined: options.len() })
}
