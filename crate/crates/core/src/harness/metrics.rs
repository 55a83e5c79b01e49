use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::envmodel::Label;

/// Counts of the four signal-detection outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

fn rate(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn record(&mut self, predicted: Label, truth: Label) {
        match (predicted.is_positive(), truth.is_positive()) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self::new(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn_ + other.fn_)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> Option<f64> {
        rate(self.tp + self.tn, self.total())
    }

    /// Hit rate, `tp / (tp + fn)`.
    pub fn sensitivity(&self) -> Option<f64> {
        rate(self.tp, self.tp + self.fn_)
    }

    pub fn specificity(&self) -> Option<f64> {
        rate(self.tn, self.tn + self.fp)
    }

    pub fn false_negative_rate(&self) -> Option<f64> {
        rate(self.fn_, self.tp + self.fn_)
    }

    pub fn false_alarm_rate(&self) -> Option<f64> {
        rate(self.fp, self.tn + self.fp)
    }

    pub fn ppv(&self) -> Option<f64> {
        rate(self.tp, self.tp + self.fp)
    }

    pub fn npv(&self) -> Option<f64> {
        rate(self.tn, self.tn + self.fn_)
    }

    /// Mean of sensitivity and specificity; undefined unless both are.
    pub fn balanced_accuracy(&self) -> Option<f64> {
        Some((self.sensitivity()? + self.specificity()?) / 2.0)
    }
}

pub fn confusion_of(predictions: &[Label], truth: &[Label]) -> Result<ConfusionMatrix, HarnessError> {
    if predictions.len() != truth.len() {
        return Err(HarnessError::LengthMismatch { predictions: predictions.len(), truth: truth.len() });
    }
    if predictions.is_empty() {
        return Err(HarnessError::InvalidArgument("no predictions".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predictions.iter().zip(truth) {
        cm.record(p, t);
    }
    Ok(cm)
}
