use serde::{Deserialize, Serialize};

use super::tree::Comparison;
use super::FftError;
use crate::envmodel::{Direction, Environment};
use crate::toolbox::CueOrder;

/// Split point turning a cue into a binary "indicates positive" test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binarization {
    pub threshold: f64,
    /// `value <comparison> threshold` indicates the positive class.
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueStats {
    pub cue: usize,
    /// Direction under which `validity` was measured (the cue's definition).
    pub direction: Direction,
    /// Correct / discriminating pairs among pairs with unequal criterion;
    /// 0.5 when the cue never discriminates such a pair.
    pub validity: f64,
    /// Discriminated pairs / all unordered object pairs.
    pub discrimination_rate: f64,
    pub constant: bool,
    pub split: Option<Binarization>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
    pub hit_rate: Option<f64>,
    pub false_alarm_rate: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Correct and wrong counts over (positive, negative) pairs, by sorting
/// negatives and binary-searching each positive's adjusted value.
fn pair_counts(pos: &[f64], neg: &[f64]) -> (u64, u64) {
    let mut sorted = neg.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut correct, mut wrong) = (0u64, 0u64);
    for &p in pos {
        let below = sorted.partition_point(|&n| n < p);
        let not_above = sorted.partition_point(|&n| n <= p);
        correct += below as u64;
        wrong += (sorted.len() - not_above) as u64;
    }
    (correct, wrong)
}

fn discriminated_pairs(values: &[f64]) -> u64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as u64;
    let mut tied = 0u64;
    for group in sorted.chunk_by(|a, b| a == b) {
        let g = group.len() as u64;
        tied += g * (g - 1) / 2;
    }
    n * (n - 1) / 2 - tied
}

pub fn compute_cue_stats(env: &Environment) -> Vec<CueStats> {
    let two_class = env.has_both_classes();
    (0..env.n_cues())
        .map(|cue| {
            let direction = env.cues()[cue].direction;
            let values: Vec<f64> = env.column(cue).collect();
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            for (i, &v) in values.iter().enumerate() {
                let adjusted = direction.adjust(v);
                if env.criterion()[i] {
                    pos.push(adjusted);
                } else {
                    neg.push(adjusted);
                }
            }
            let (correct, wrong) = pair_counts(&pos, &neg);
            let validity = if correct + wrong == 0 {
                0.5
            } else {
                correct as f64 / (correct + wrong) as f64
            };
            let n = values.len() as u64;
            let discrimination_rate = discriminated_pairs(&values) as f64 / (n * (n - 1) / 2) as f64;
            let constant = values.iter().all(|&v| v == values[0]);
            let split = if two_class && !constant {
                binarize_cue(env, cue).ok()
            } else {
                None
            };
            let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
            if let Some(b) = split {
                for (i, &v) in values.iter().enumerate() {
                    match (b.comparison.holds(v, b.threshold), env.criterion()[i]) {
                        (true, true) => tp += 1,
                        (true, false) => fp += 1,
                        (false, false) => tn += 1,
                        (false, true) => fn_ += 1,
                    }
                }
            }
            let binarized = split.is_some();
            CueStats {
                cue,
                direction,
                validity,
                discrimination_rate,
                constant,
                split,
                ppv: ratio(tp, tp + fp).filter(|_| binarized),
                npv: ratio(tn, tn + fn_).filter(|_| binarized),
                hit_rate: ratio(tp, tp + fn_).filter(|_| binarized),
                false_alarm_rate: ratio(fp, fp + tn).filter(|_| binarized),
            }
        })
        .collect()
}

/// Threshold maximizing balanced accuracy over midpoints of consecutive
/// distinct values. Scores are compared as exact integers
/// (`2 P N * balanced accuracy`); ties go to the smaller threshold and then
/// to `>=`.
pub fn binarize_cue(env: &Environment, cue: usize) -> Result<Binarization, FftError> {
    if cue >= env.n_cues() {
        return Err(FftError::UnknownCue(format!("#{cue}")));
    }
    let name = &env.cues()[cue].name;
    let p = env.n_positive() as u128;
    let n = (env.n_objects() - env.n_positive()) as u128;
    if p == 0 || n == 0 {
        return Err(FftError::SingleClass);
    }
    let mut rows: Vec<(f64, bool)> = env.column(cue).zip(env.criterion().iter().copied()).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if rows.first().map(|r| r.0) == rows.last().map(|r| r.0) {
        return Err(FftError::ConstantCue(name.clone()));
    }

    // Sweep upward: everything left of the cut is "below".
    let (mut pos_below, mut neg_below) = (0u128, 0u128);
    let mut best: Option<(u128, Binarization)> = None;
    let mut i = 0;
    while i < rows.len() {
        let v = rows[i].0;
        while i < rows.len() && rows[i].0 == v {
            if rows[i].1 {
                pos_below += 1;
            } else {
                neg_below += 1;
            }
            i += 1;
        }
        if i == rows.len() {
            break;
        }
        let threshold = v + (rows[i].0 - v) / 2.0;
        // >= : positives above are hits, negatives below are correct rejections.
        let ge = (p - pos_below) * n + neg_below * p;
        let lt = 2 * p * n - ge;
        for (score, comparison) in [(ge, Comparison::Ge), (lt, Comparison::Lt)] {
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, Binarization { threshold, comparison }));
            }
        }
    }
    Ok(best.expect("at least two distinct values").1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingRule {
    /// Descending validity, using `max(v, 1 - v)` with the direction flipped
    /// for cues that point the other way.
    #[serde(alias = "validity")]
    ByValidity,
    /// Descending `max(ppv, npv)` of the binarized cue.
    #[serde(alias = "maxpv")]
    ByMaxPredictiveValue,
}

/// Orders cues by `rule`. Constant cues and cues without a defined key sort
/// last; equal keys keep ascending cue index.
pub fn order_cues(stats: &[CueStats], rule: OrderingRule) -> CueOrder {
    let key = |s: &CueStats| -> Option<f64> {
        if s.constant {
            return None;
        }
        match rule {
            OrderingRule::ByValidity => Some(s.validity.max(1.0 - s.validity)),
            OrderingRule::ByMaxPredictiveValue => match (s.ppv, s.npv) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (Some(a), None) | (None, Some(a)) => Some(a),
                (None, None) => None,
            },
        }
    };
    let mut ranked: Vec<(Option<f64>, &CueStats)> = stats.iter().map(|s| (key(s), s)).collect();
    ranked.sort_by(|(ka, a), (kb, b)| match (ka, kb) {
        (Some(x), Some(y)) => y.total_cmp(x).then(a.cue.cmp(&b.cue)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.cue.cmp(&b.cue),
    });
    let entries = ranked
        .into_iter()
        .map(|(_, s)| {
            let direction = if s.validity >= 0.5 { s.direction } else { s.direction.flip() };
            (s.cue, direction)
        })
        .collect();
    CueOrder::new(entries).expect("stats hold distinct cues")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envmodel::CueDefinition;

    fn env1(values: &[f64], crit: &[u8]) -> Environment {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        let crit: Vec<bool> = crit.iter().map(|&c| c == 1).collect();
        Environment::from_rows(vec![CueDefinition::numeric("x")], &rows, &crit).unwrap()
    }

    fn stat(cue: usize, validity: f64, ppv: Option<f64>, npv: Option<f64>) -> CueStats {
        CueStats {
            cue,
            direction: Direction::Positive,
            validity,
            discrimination_rate: 0.5,
            constant: false,
            split: None,
            ppv,
            npv,
            hit_rate: None,
            false_alarm_rate: None,
        }
    }

    #[test]
    fn perfect_cue() {
        let crit = [1, 0, 1, 1, 0, 0, 0, 1];
        let values: Vec<f64> = crit.iter().map(|&c| c as f64).collect();
        let s = &compute_cue_stats(&env1(&values, &crit))[0];
        assert_eq!(s.validity, 1.0);
        assert_eq!(s.ppv, Some(1.0));
        assert_eq!(s.npv, Some(1.0));
        // 4 positives x 4 negatives discriminated, out of C(8,2) = 28 pairs.
        assert!((s.discrimination_rate - 16.0 / 28.0).abs() < 1e-15);
    }

    #[test]
    fn constant_cue_is_guarded() {
        let s = &compute_cue_stats(&env1(&[3.0, 3.0, 3.0], &[1, 0, 1]))[0];
        assert_eq!(s.discrimination_rate, 0.0);
        assert_eq!(s.validity, 0.5);
        assert!(s.constant && s.split.is_none() && s.ppv.is_none());
    }

    #[test]
    fn four_object_pair_count() {
        let s = &compute_cue_stats(&env1(&[1.0, 0.0, 0.0, 0.0], &[1, 1, 0, 0]))[0];
        // Discriminating unequal-criterion pairs: (o1,o3), (o1,o4), both correct.
        assert_eq!(s.validity, 1.0);
        // (o1,o2), (o1,o3), (o1,o4) out of 6 pairs.
        assert_eq!(s.discrimination_rate, 0.5);
    }

    #[test]
    fn single_class_keeps_validity_but_no_predictive_values() {
        let s = &compute_cue_stats(&env1(&[1.0, 0.0, 2.0], &[1, 1, 1]))[0];
        assert_eq!(s.validity, 0.5);
        assert!(s.ppv.is_none() && s.npv.is_none() && s.split.is_none());
    }

    #[test]
    fn negative_direction_inverts_validity() {
        let env = Environment::from_rows(
            vec![CueDefinition::new("x", crate::envmodel::CueKind::Binary, Direction::Negative)],
            &[vec![1.0], vec![0.0], vec![0.0]],
            &[true, false, true],
        )
        .unwrap();
        // Adjusted positives {-1, 0} against negative {0}: one wrong pair, one tie.
        assert_eq!(compute_cue_stats(&env)[0].validity, 0.0);
        let env = Environment::from_rows(
            vec![CueDefinition::new("x", crate::envmodel::CueKind::Binary, Direction::Negative)],
            &[vec![1.0], vec![0.0]],
            &[true, false],
        )
        .unwrap();
        assert_eq!(compute_cue_stats(&env)[0].validity, 0.0);
    }

    #[test]
    fn binarize_examples() {
        let b = binarize_cue(&env1(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1]), 0).unwrap();
        assert_eq!(b, Binarization { threshold: 2.5, comparison: Comparison::Ge });
        let b = binarize_cue(&env1(&[0.0, 1.0, 1.0, 0.0], &[0, 1, 0, 0]), 0).unwrap();
        assert_eq!(b, Binarization { threshold: 0.5, comparison: Comparison::Ge });
        let b = binarize_cue(&env1(&[1.0, 2.0, 3.0, 4.0], &[1, 1, 0, 0]), 0).unwrap();
        assert_eq!(b, Binarization { threshold: 2.5, comparison: Comparison::Lt });
        assert!(matches!(binarize_cue(&env1(&[2.0, 2.0], &[1, 0]), 0), Err(FftError::ConstantCue(_))));
        assert!(matches!(binarize_cue(&env1(&[1.0, 2.0], &[1, 1]), 0), Err(FftError::SingleClass)));
    }

    #[test]
    fn binarize_ties_prefer_smaller_threshold() {
        // Cuts at 1.5 and 2.5 both separate perfectly except one object.
        let b = binarize_cue(&env1(&[1.0, 2.0, 3.0], &[0, 1, 1]), 0).unwrap();
        assert_eq!(b.threshold, 1.5);
        let b = binarize_cue(&env1(&[1.0, 2.0, 3.0, 4.0], &[0, 1, 0, 1]), 0).unwrap();
        assert_eq!(b, Binarization { threshold: 1.5, comparison: Comparison::Ge });
    }

    #[test]
    fn order_examples() {
        let stats = vec![stat(0, 0.9, None, None), stat(1, 0.6, None, None), stat(2, 0.75, None, None)];
        assert_eq!(order_cues(&stats, OrderingRule::ByValidity).indices(), vec![0, 2, 1]);
        let flat = vec![stat(0, 0.7, None, None), stat(1, 0.7, None, None), stat(2, 0.7, None, None)];
        assert_eq!(order_cues(&flat, OrderingRule::ByValidity).indices(), vec![0, 1, 2]);
        let pv = vec![stat(0, 0.7, Some(0.8), Some(0.4)), stat(1, 0.7, Some(0.3), Some(0.9))];
        assert_eq!(order_cues(&pv, OrderingRule::ByMaxPredictiveValue).indices(), vec![1, 0]);
    }

    #[test]
    fn anti_aligned_cue_flips_direction_and_constants_sort_last() {
        let mut constant = stat(0, 0.5, None, None);
        constant.constant = true;
        let stats = vec![constant, stat(1, 0.2, None, None), stat(2, 0.7, None, None)];
        let order = order_cues(&stats, OrderingRule::ByValidity);
        assert_eq!(order.entries(), &[(1, Direction::Negative), (2, Direction::Positive), (0, Direction::Positive)]);
    }
}
