use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::EnvError;

/// Binary class label of an object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Positive => f.write_str("positive"),
            Label::Negative => f.write_str("negative"),
        }
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(Label::Positive),
            "negative" => Ok(Label::Negative),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// Sign telling which end of a cue points towards the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+1")]
    Positive,
    #[serde(rename = "-1")]
    Negative,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Positive => Direction::Negative,
            Direction::Negative => Direction::Positive,
        }
    }

    /// Direction-adjusted value: larger always means "more positive".
    pub fn adjust(self, value: f64) -> f64 {
        match self {
            Direction::Positive => value,
            Direction::Negative => -value,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Positive => f.write_str("+1"),
            Direction::Negative => f.write_str("-1"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueKind {
    Binary,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueDefinition {
    pub name: String,
    pub kind: CueKind,
    pub direction: Direction,
}

impl CueDefinition {
    pub fn new(name: impl Into<String>, kind: CueKind, direction: Direction) -> Self {
        Self {
            name: name.into(),
            kind,
            direction,
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self::new(name, CueKind::Binary, Direction::Positive)
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        Self::new(name, CueKind::Numeric, Direction::Positive)
    }
}

/// Objects × cues matrix with a binary criterion.
///
/// Immutable after construction; every constructor checks the shape and
/// finiteness invariants, so downstream code indexes without re-checking.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    objects: Vec<String>,
    cues: Vec<CueDefinition>,
    values: Vec<f64>,
    criterion: Vec<bool>,
    index: HashMap<String, usize>,
}

impl Environment {
    /// Builds an environment from row-major values (`objects.len() × cues.len()`).
    pub fn new(
        objects: Vec<String>,
        cues: Vec<CueDefinition>,
        values: Vec<f64>,
        criterion: Vec<bool>,
    ) -> Result<Self, EnvError> {
        if objects.len() < 2 {
            return Err(EnvError::Shape(format!(
                "need at least 2 objects, got {}",
                objects.len()
            )));
        }
        if cues.is_empty() {
            return Err(EnvError::Shape("need at least 1 cue".into()));
        }
        if criterion.len() != objects.len() {
            return Err(EnvError::Shape(format!(
                "criterion has {} entries for {} objects",
                criterion.len(),
                objects.len()
            )));
        }
        if values.len() != objects.len() * cues.len() {
            return Err(EnvError::Shape(format!(
                "value matrix has {} cells, expected {} x {}",
                values.len(),
                objects.len(),
                cues.len()
            )));
        }
        let mut seen = HashMap::with_capacity(cues.len());
        for (k, cue) in cues.iter().enumerate() {
            if let Some(first) = seen.insert(cue.name.as_str(), k) {
                return Err(EnvError::Schema {
                    row: None,
                    column: cue.name.clone(),
                    message: format!("duplicate cue name (columns {} and {})", first + 1, k + 1),
                });
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos / cues.len(), pos % cues.len());
            return Err(EnvError::Schema {
                row: Some(row + 1),
                column: cues[col].name.clone(),
                message: "non-finite value".into(),
            });
        }
        let mut index = HashMap::with_capacity(objects.len());
        for (i, id) in objects.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(EnvError::Schema {
                    row: Some(i + 1),
                    column: "id".into(),
                    message: format!("duplicate object id `{id}`"),
                });
            }
        }
        Ok(Self {
            objects,
            cues,
            values,
            criterion,
            index,
        })
    }

    /// Convenience constructor from rows of cue values.
    pub fn from_rows(
        cues: Vec<CueDefinition>,
        rows: &[Vec<f64>],
        criterion: &[bool],
    ) -> Result<Self, EnvError> {
        let width = cues.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != width) {
            return Err(EnvError::Shape(format!(
                "row {} has {} values, expected {width}",
                bad + 1,
                rows[bad].len()
            )));
        }
        let objects = (1..=rows.len()).map(|i| format!("o{i}")).collect();
        let values = rows.iter().flatten().copied().collect();
        Self::new(objects, cues, values, criterion.to_vec())
    }

    pub fn n_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn n_cues(&self) -> usize {
        self.cues.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn cues(&self) -> &[CueDefinition] {
        &self.cues
    }

    pub fn cue_names(&self) -> Vec<String> {
        self.cues.iter().map(|c| c.name.clone()).collect()
    }

    pub fn cue_index(&self, name: &str) -> Option<usize> {
        self.cues.iter().position(|c| c.name == name)
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn value(&self, object: usize, cue: usize) -> f64 {
        self.values[object * self.cues.len() + cue]
    }

    pub fn row(&self, object: usize) -> &[f64] {
        let w = self.cues.len();
        &self.values[object * w..(object + 1) * w]
    }

    pub fn column(&self, cue: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.objects.len()).map(move |i| self.value(i, cue))
    }

    pub fn criterion(&self) -> &[bool] {
        &self.criterion
    }

    pub fn label(&self, object: usize) -> Label {
        Label::from_bool(self.criterion[object])
    }

    pub fn n_positive(&self) -> usize {
        self.criterion.iter().filter(|&&c| c).count()
    }

    pub fn has_both_classes(&self) -> bool {
        let pos = self.n_positive();
        pos > 0 && pos < self.objects.len()
    }

    /// Environment restricted to the given object indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self, EnvError> {
        let objects = indices.iter().map(|&i| self.objects[i].clone()).collect();
        let values = indices.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        let criterion = indices.iter().map(|&i| self.criterion[i]).collect();
        Self::new(objects, self.cues.clone(), values, criterion)
    }

    /// Returns a copy with one extra cue column appended.
    pub fn with_cue(&self, cue: CueDefinition, column: &[f64]) -> Result<Self, EnvError> {
        if column.len() != self.n_objects() {
            return Err(EnvError::Shape(format!(
                "new cue column has {} values for {} objects",
                column.len(),
                self.n_objects()
            )));
        }
        let mut cues = self.cues.clone();
        cues.push(cue);
        let values = (0..self.n_objects())
            .flat_map(|i| self.row(i).iter().copied().chain(std::iter::once(column[i])))
            .collect();
        Self::new(self.objects.clone(), cues, values, self.criterion.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cues(n: usize) -> Vec<CueDefinition> {
        (0..n).map(|k| CueDefinition::binary(format!("c{k}"))).collect()
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Environment::from_rows(cues(1), &[vec![1.0]], &[true]).is_err());
        assert!(Environment::from_rows(cues(0), &[vec![], vec![]], &[true, false]).is_err());
        assert!(Environment::from_rows(cues(2), &[vec![1.0, 0.0], vec![1.0]], &[true, false]).is_err());
        assert!(Environment::from_rows(cues(1), &[vec![1.0], vec![0.0]], &[true]).is_err());
    }

    #[test]
    fn rejects_non_finite_and_duplicates() {
        let err = Environment::from_rows(cues(1), &[vec![1.0], vec![f64::NAN]], &[true, false])
            .unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        let dup = vec![CueDefinition::binary("a"), CueDefinition::binary("a")];
        assert!(Environment::from_rows(dup, &[vec![1.0, 0.0], vec![0.0, 1.0]], &[true, false]).is_err());
    }

    #[test]
    fn subset_and_with_cue() {
        let env = Environment::from_rows(
            cues(2),
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            &[true, false, true],
        )
        .unwrap();
        let sub = env.subset(&[2, 0]).unwrap();
        assert_eq!(sub.objects(), &["o3".to_string(), "o1".to_string()]);
        assert_eq!(sub.row(0), &[1.0, 1.0]);
        let wider = env.with_cue(CueDefinition::numeric("x"), &[5.0, 6.0, 7.0]).unwrap();
        assert_eq!(wider.row(1), &[0.0, 1.0, 6.0]);
        assert_eq!(wider.object_index("o2"), Some(1));
    }
}
