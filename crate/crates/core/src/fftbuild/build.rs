//! Tree construction and cost tuning.
//!
//! The tree's structure (cue order, split points, which branch exits at
//! each node) is fixed from cost-neutral training statistics. Costs then
//! label every exit cell: a cell holding `pos` positives and `neg`
//! negatives of the training residue is labelled positive iff
//! `cost_fn * pos / P > cost_fp * neg / N` (ties positive iff
//! `cost_fn >= cost_fp`), where `P` and `N` are the training class totals.
//! Because the partition does not move with the costs and each cell label is
//! monotone in `cost_fn`, raising `cost_fn` can only turn negative
//! classifications into positive ones.

use log::warn;
use serde::{Deserialize, Serialize};

use super::stats::{compute_cue_stats, order_cues, OrderingRule};
use super::tree::{Condition, ExitNode, FastFrugalTree, FinalNode};
use super::FftError;
use crate::envmodel::{Environment, Label};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRatio {
    pub cost_fn: f64,
    pub cost_fp: f64,
}

impl CostRatio {
    pub fn new(cost_fn: f64, cost_fp: f64) -> Result<Self, FftError> {
        if !(cost_fn.is_finite() && cost_fn > 0.0 && cost_fp.is_finite() && cost_fp > 0.0) {
            return Err(FftError::InvalidCost { cost_fn, cost_fp });
        }
        Ok(Self { cost_fn, cost_fp })
    }

    pub fn neutral() -> Self {
        Self { cost_fn: 1.0, cost_fp: 1.0 }
    }

    pub fn weighted_errors(&self, false_negatives: usize, false_positives: usize) -> f64 {
        self.cost_fn * false_negatives as f64 + self.cost_fp * false_positives as f64
    }
}

impl Default for CostRatio {
    fn default() -> Self {
        Self::neutral()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitPolicy {
    /// Alternate exit branches, starting from the branch the first cue
    /// predicts better.
    Zigzag,
    /// At each node exit the branch with the larger predictive value on the
    /// training residue: the positive-indicating branch iff `ppv >= npv`.
    #[serde(alias = "max")]
    MaxSide,
}

#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    pos: usize,
    neg: usize,
}

impl Cell {
    fn add(&mut self, positive: bool) {
        if positive {
            self.pos += 1;
        } else {
            self.neg += 1;
        }
    }

    fn total(&self) -> usize {
        self.pos + self.neg
    }
}

fn cell_label(cell: Cell, default: Label, costs: CostRatio, p_total: usize, n_total: usize) -> Label {
    if cell.total() == 0 {
        return default;
    }
    let lhs = costs.cost_fn * cell.pos as f64 * n_total as f64;
    let rhs = costs.cost_fp * cell.neg as f64 * p_total as f64;
    if lhs > rhs {
        Label::Positive
    } else if lhs < rhs {
        Label::Negative
    } else {
        Label::from_bool(costs.cost_fn >= costs.cost_fp)
    }
}

/// Builds a fast-and-frugal tree on `train`.
///
/// Cues that cannot be binarized (constant on the training data) are never
/// used. A `max_depth` beyond the number of usable cues is clamped with a
/// warning.
pub fn build_fft(
    train: &Environment,
    ordering: OrderingRule,
    exit_policy: ExitPolicy,
    max_depth: usize,
    costs: CostRatio,
) -> Result<FastFrugalTree, FftError> {
    if max_depth == 0 {
        return Err(FftError::InvalidDepth);
    }
    CostRatio::new(costs.cost_fn, costs.cost_fp)?;
    if !train.has_both_classes() {
        return Err(FftError::SingleClass);
    }
    let stats = compute_cue_stats(train);
    let order: Vec<usize> = order_cues(&stats, ordering)
        .indices()
        .into_iter()
        .filter(|&c| stats[c].split.is_some())
        .collect();
    if order.is_empty() {
        return Err(FftError::NoUsableCue);
    }
    let depth = if max_depth > order.len() {
        warn!(
            "max_depth {max_depth} exceeds the {} usable cues; clamping",
            order.len()
        );
        order.len()
    } else {
        max_depth
    };

    let p_total = train.n_positive();
    let n_total = train.n_objects() - p_total;
    let mut residue: Vec<usize> = (0..train.n_objects()).collect();
    let mut nodes = Vec::with_capacity(depth - 1);
    // Zigzag state: whether the positive-indicating branch exits next.
    let mut zig_positive: Option<bool> = None;

    for (k, &cue) in order.iter().take(depth).enumerate() {
        let split = stats[cue].split.expect("filtered to binarizable cues");
        let (mut above, mut below) = (Cell::default(), Cell::default());
        let (mut rest_above, mut rest_below) = (Vec::new(), Vec::new());
        for &i in &residue {
            let positive = train.criterion()[i];
            if split.comparison.holds(train.value(i, cue), split.threshold) {
                above.add(positive);
                rest_above.push(i);
            } else {
                below.add(positive);
                rest_below.push(i);
            }
        }
        let condition = Condition::single(cue, split.threshold, split.comparison);

        if k + 1 == depth {
            let last = FinalNode {
                condition,
                when_true: cell_label(above, Label::Positive, costs, p_total, n_total),
                when_false: cell_label(below, Label::Negative, costs, p_total, n_total),
            };
            return FastFrugalTree::new(train.cue_names(), nodes, last);
        }

        let ppv = (above.total() > 0).then(|| above.pos as f64 / above.total() as f64);
        let npv = (below.total() > 0).then(|| below.neg as f64 / below.total() as f64);
        let prefers_positive = match (ppv, npv) {
            (Some(a), Some(b)) => a >= b,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => true,
        };
        let positive_side_exits = match exit_policy {
            ExitPolicy::MaxSide => prefers_positive,
            ExitPolicy::Zigzag => {
                let side = zig_positive.unwrap_or(prefers_positive);
                zig_positive = Some(!side);
                side
            }
        };
        let node = if positive_side_exits {
            residue = rest_below;
            ExitNode {
                condition,
                exit: cell_label(above, Label::Positive, costs, p_total, n_total),
            }
        } else {
            residue = rest_above;
            ExitNode {
                condition: Condition { comparison: split.comparison.negate(), ..condition },
                exit: cell_label(below, Label::Negative, costs, p_total, n_total),
            }
        };
        nodes.push(node);
    }
    unreachable!("loop returns at the final node")
}

/// Builds one tree per candidate cost ratio and keeps the one with the
/// smallest weighted error `ref.cost_fn * fn + ref.cost_fp * fp` on
/// `validation`. Ties keep the earliest candidate.
pub fn tune_fft_cost(
    train: &Environment,
    validation: &Environment,
    candidates: &[CostRatio],
    ordering: OrderingRule,
    exit_policy: ExitPolicy,
    max_depth: usize,
    reference: CostRatio,
) -> Result<(FastFrugalTree, CostRatio), FftError> {
    if candidates.is_empty() {
        return Err(FftError::NoCandidates);
    }
    if validation.cue_names() != train.cue_names() {
        return Err(FftError::CueMismatch);
    }
    let mut best: Option<(f64, FastFrugalTree, CostRatio)> = None;
    for &costs in candidates {
        let tree = build_fft(train, ordering, exit_policy, max_depth, costs)?;
        let (mut fn_, mut fp) = (0, 0);
        for i in 0..validation.n_objects() {
            let (label, _) = tree.route(validation.row(i));
            match (label, validation.criterion()[i]) {
                (Label::Negative, true) => fn_ += 1,
                (Label::Positive, false) => fp += 1,
                _ => {}
            }
        }
        let loss = reference.weighted_errors(fn_, fp);
        if best.as_ref().is_none_or(|(b, ..)| loss < *b) {
            best = Some((loss, tree, costs));
        }
    }
    let (_, tree, costs) = best.expect("candidates nonempty");
    Ok((tree, costs))
}
