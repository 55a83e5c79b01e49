//! Fast-and-frugal tree structure and its line-oriented text form.
//!
//! ```text
//! # cues: st_change,chest_pain_chief,s1,s2,s3,s4,s5
//! st_change >= 0.5 -> EXIT(positive)
//! chest_pain_chief < 0.5 -> EXIT(negative)
//! s1|s2|s3|s4|s5 >= 0.5 -> EXIT(positive) else EXIT(negative)
//! ```
//!
//! A node lists one cue, or several joined by `|` meaning "any of". The
//! optional `# cues:` line fixes the cue universe (and hence cue indices);
//! without it the universe is the cue names in order of first appearance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FftError;
use crate::envmodel::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
}

impl Comparison {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::Ge => value >= threshold,
            Comparison::Lt => value < threshold,
        }
    }

    pub fn negate(self) -> Self {
        match self {
            Comparison::Ge => Comparison::Lt,
            Comparison::Lt => Comparison::Ge,
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Ge => ">=",
            Comparison::Lt => "<",
        })
    }
}

/// Exit condition shared by all node kinds: holds when any listed cue
/// satisfies `value <comparison> threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub cues: Vec<usize>,
    pub threshold: f64,
    pub comparison: Comparison,
}

impl Condition {
    pub fn single(cue: usize, threshold: f64, comparison: Comparison) -> Self {
        Self {
            cues: vec![cue],
            threshold,
            comparison,
        }
    }

    pub fn holds(&self, values: &[f64]) -> bool {
        self.cues
            .iter()
            .any(|&c| self.comparison.holds(values[c], self.threshold))
    }
}

/// Non-final node: exits with `exit` when the condition holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitNode {
    pub condition: Condition,
    pub exit: Label,
}

/// Final node: exits on both branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalNode {
    pub condition: Condition,
    pub when_true: Label,
    pub when_false: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastFrugalTree {
    cue_names: Vec<String>,
    nodes: Vec<ExitNode>,
    last: FinalNode,
}

fn valid_cue_name(name: &str) -> bool {
    !name.is_empty() && !name.contains(|c: char| c.is_whitespace() || c == '|' || c == ',' || c == '#')
}

impl FastFrugalTree {
    pub fn new(cue_names: Vec<String>, nodes: Vec<ExitNode>, last: FinalNode) -> Result<Self, FftError> {
        if let Some(bad) = cue_names.iter().find(|n| !valid_cue_name(n)) {
            return Err(FftError::InvalidCueName(bad.clone()));
        }
        let conditions = nodes.iter().map(|n| &n.condition).chain(std::iter::once(&last.condition));
        for cond in conditions {
            if cond.cues.is_empty() {
                return Err(FftError::InvalidTree("node references no cue".into()));
            }
            if let Some(&c) = cond.cues.iter().find(|&&c| c >= cue_names.len()) {
                return Err(FftError::InvalidTree(format!(
                    "cue index {c} out of range for {} cues",
                    cue_names.len()
                )));
            }
            if !cond.threshold.is_finite() {
                return Err(FftError::InvalidTree("non-finite threshold".into()));
            }
        }
        Ok(Self {
            cue_names,
            nodes,
            last,
        })
    }

    pub fn depth(&self) -> usize {
        self.nodes.len() + 1
    }

    pub fn cue_names(&self) -> &[String] {
        &self.cue_names
    }

    pub fn nodes(&self) -> &[ExitNode] {
        &self.nodes
    }

    pub fn final_node(&self) -> &FinalNode {
        &self.last
    }

    /// Largest cue index referenced plus one.
    pub fn required_width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| &n.condition)
            .chain(std::iter::once(&self.last.condition))
            .flat_map(|c| c.cues.iter().copied())
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Label and 1-based exit depth. `values` must cover [`Self::required_width`].
    pub(crate) fn route(&self, values: &[f64]) -> (Label, usize) {
        for (k, node) in self.nodes.iter().enumerate() {
            if node.condition.holds(values) {
                return (node.exit, k + 1);
            }
        }
        let label = if self.last.condition.holds(values) {
            self.last.when_true
        } else {
            self.last.when_false
        };
        (label, self.depth())
    }

    /// Re-indexes the tree against another cue universe, matching by name.
    pub fn bind(&self, cue_names: &[String]) -> Result<Self, FftError> {
        let remap = |cond: &Condition| -> Result<Condition, FftError> {
            let cues = cond
                .cues
                .iter()
                .map(|&c| {
                    let name = &self.cue_names[c];
                    cue_names
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| FftError::UnknownCue(name.clone()))
                })
                .collect::<Result<_, _>>()?;
            Ok(Condition { cues, ..cond.clone() })
        };
        let nodes = self
            .nodes
            .iter()
            .map(|n| Ok(ExitNode { condition: remap(&n.condition)?, exit: n.exit }))
            .collect::<Result<_, FftError>>()?;
        let last = FinalNode {
            condition: remap(&self.last.condition)?,
            ..self.last.clone()
        };
        Self::new(cue_names.to_vec(), nodes, last)
    }

    fn fmt_condition(&self, cond: &Condition) -> String {
        let names: Vec<&str> = cond.cues.iter().map(|&c| self.cue_names[c].as_str()).collect();
        format!("{} {} {}", names.join("|"), cond.comparison, cond.threshold)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# cues: {}\n", self.cue_names.join(","));
        for node in &self.nodes {
            out.push_str(&format!("{} -> EXIT({})\n", self.fmt_condition(&node.condition), node.exit));
        }
        out.push_str(&format!(
            "{} -> EXIT({}) else EXIT({})\n",
            self.fmt_condition(&self.last.condition),
            self.last.when_true,
            self.last.when_false
        ));
        out
    }
}

impl fmt::Display for FastFrugalTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_exit(token: &str, line: usize) -> Result<Label, FftError> {
    let inner = token
        .strip_prefix("EXIT(")
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| FftError::Parse { line, message: format!("expected EXIT(label), found `{token}`") })?;
    inner.parse().map_err(|message| FftError::Parse { line, message })
}

/// Line number, cue names, comparison, threshold, exit labels.
type ParsedLine = (usize, Vec<String>, Comparison, f64, Vec<Label>);

impl FromStr for FastFrugalTree {
    type Err = FftError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut universe: Option<Vec<String>> = None;
        let mut seen: Vec<String> = Vec::new();
        let mut parsed: Vec<ParsedLine> = Vec::new();

        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(list) = comment.trim().strip_prefix("cues:") {
                    universe = Some(list.trim().split(',').map(|s| s.trim().to_string()).collect());
                }
                continue;
            }
            let err = |message: String| FftError::Parse { line, message };
            let (lhs, rhs) = trimmed
                .split_once("->")
                .ok_or_else(|| err("missing `->`".into()))?;
            let mut parts = lhs.split_whitespace();
            let (Some(cues), Some(op), Some(threshold), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(err(format!("expected `cue <op> threshold`, found `{}`", lhs.trim())));
            };
            let comparison = match op {
                ">=" => Comparison::Ge,
                "<" => Comparison::Lt,
                other => return Err(err(format!("unknown comparison `{other}`"))),
            };
            let threshold: f64 = threshold
                .parse()
                .map_err(|_| err(format!("bad threshold `{threshold}`")))?;
            let names: Vec<String> = cues.split('|').map(str::to_string).collect();
            for name in &names {
                if !seen.contains(name) {
                    seen.push(name.clone());
                }
            }
            let labels = match rhs.trim().split_once(" else ") {
                Some((a, b)) => vec![parse_exit(a.trim(), line)?, parse_exit(b.trim(), line)?],
                None => vec![parse_exit(rhs.trim(), line)?],
            };
            parsed.push((line, names, comparison, threshold, labels));
        }

        let cue_names = universe.unwrap_or(seen);
        let Some((final_line, ..)) = parsed.last() else {
            return Err(FftError::Parse { line: 0, message: "empty tree".into() });
        };
        let final_line = *final_line;
        let mut nodes = Vec::new();
        let mut last = None;
        for (line, names, comparison, threshold, labels) in parsed {
            let cues = names
                .iter()
                .map(|name| {
                    cue_names
                        .iter()
                        .position(|c| c == name)
                        .ok_or_else(|| FftError::UnknownCue(name.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let condition = Condition { cues, threshold, comparison };
            match (labels.as_slice(), line == final_line) {
                ([exit], false) => nodes.push(ExitNode { condition, exit: *exit }),
                ([when_true, when_false], true) => {
                    last = Some(FinalNode { condition, when_true: *when_true, when_false: *when_false })
                }
                (_, false) => {
                    return Err(FftError::Parse { line, message: "only the final node may exit both ways".into() })
                }
                (_, true) => {
                    return Err(FftError::Parse { line, message: "final node must exit both ways".into() })
                }
            }
        }
        Self::new(cue_names, nodes, last.expect("final node parsed"))
    }
}
