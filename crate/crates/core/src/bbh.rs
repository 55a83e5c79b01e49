//! Bibliometric indicators and bibliometrics-based heuristics.
//!
//! Percentiles use the mid-rank convention: a paper's percentile in its
//! field-year cell is `(strictly fewer + 0.5 * equal) / cell size`. A
//! paper counts as "top X%" when its percentile is at least `1 - X`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envmodel::{DocType, InstitutionRecord, PaperRecord, ResearcherRecord};
use crate::seed;
use crate::toolbox::top_k_select;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BbhError {
    #[error("no citation distribution for field {field}, year {year}")]
    MissingCell { field: u32, year: i32 },
    #[error("paper `{0}` is not part of its field-year distribution")]
    NotInCell(String),
    #[error("no papers to assess")]
    NoPapers,
    #[error("academic ages differ: {a} vs {b} (tolerance {tolerance})")]
    AgeMismatch { a: u32, b: u32, tolerance: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("I/O error: {0}")]
    Io(String),
}

/// Slack for comparing mid-rank percentiles against `1 - top_fraction`.
const PERCENTILE_EPS: f64 = 1e-12;

/// Default top share for "highly cited" papers.
pub const TOP_DECILE: f64 = 0.10;

/// Sorted citation counts of every paper, keyed by (field, publication year).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FieldYearDistribution {
    cells: BTreeMap<(u32, i32), Vec<u64>>,
}

impl FieldYearDistribution {
    pub fn from_papers<'a>(papers: impl IntoIterator<Item = &'a PaperRecord>) -> Self {
        let mut cells: BTreeMap<(u32, i32), Vec<u64>> = BTreeMap::new();
        for p in papers {
            cells.entry((p.field_id, p.pub_year)).or_default().push(p.citations);
        }
        for counts in cells.values_mut() {
            counts.sort_unstable();
        }
        Self { cells }
    }

    pub fn cell(&self, field: u32, year: i32) -> Option<&[u64]> {
        self.cells.get(&(field, year)).map(Vec::as_slice)
    }

    pub fn cells(&self) -> impl Iterator<Item = ((u32, i32), &[u64])> {
        self.cells.iter().map(|(k, v)| (*k, v.as_slice()))
    }
}

pub fn citation_percentile(paper: &PaperRecord, dist: &FieldYearDistribution) -> Result<f64, BbhError> {
    let cell = dist
        .cell(paper.field_id, paper.pub_year)
        .ok_or(BbhError::MissingCell { field: paper.field_id, year: paper.pub_year })?;
    let below = cell.partition_point(|&c| c < paper.citations);
    let not_above = cell.partition_point(|&c| c <= paper.citations);
    if not_above == below {
        return Err(BbhError::NotInCell(paper.id.clone()));
    }
    Ok((below as f64 + 0.5 * (not_above - below) as f64) / cell.len() as f64)
}

fn check_fraction(top_fraction: f64) -> Result<(), BbhError> {
    if top_fraction > 0.0 && top_fraction <= 1.0 {
        Ok(())
    } else {
        Err(BbhError::InvalidArgument(format!("top_fraction must lie in (0, 1], got {top_fraction}")))
    }
}

pub fn is_top_paper(paper: &PaperRecord, dist: &FieldYearDistribution, top_fraction: f64) -> Result<bool, BbhError> {
    Ok(citation_percentile(paper, dist)? + PERCENTILE_EPS >= 1.0 - top_fraction)
}

fn count_top(papers: &[PaperRecord], dist: &FieldYearDistribution, top_fraction: f64) -> Result<usize, BbhError> {
    papers.iter().try_fold(0, |n, p| Ok(n + is_top_paper(p, dist, top_fraction)? as usize))
}

/// Share of `papers` in the top `top_fraction` of their field-year cells.
pub fn pptop_share(papers: &[PaperRecord], dist: &FieldYearDistribution, top_fraction: f64) -> Result<f64, BbhError> {
    check_fraction(top_fraction)?;
    if papers.is_empty() {
        return Err(BbhError::NoPapers);
    }
    Ok(count_top(papers, dist, top_fraction)? as f64 / papers.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AboveAverage,
    NotAbove,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstitutionAssessment {
    pub verdict: Verdict,
    pub share: f64,
    pub n_papers: usize,
    /// First and last publication year among the assessed papers.
    pub year_span: (i32, i32),
}

/// Above average iff the institution's top-paper share is strictly more
/// than `x_threshold`.
pub fn assess_institution(
    inst: &InstitutionRecord,
    dist: &FieldYearDistribution,
    x_threshold: f64,
    top_fraction: f64,
) -> Result<InstitutionAssessment, BbhError> {
    let share = pptop_share(&inst.papers, dist, top_fraction)?;
    let first = inst.papers.iter().map(|p| p.pub_year).min().expect("nonempty");
    let last = inst.papers.iter().map(|p| p.pub_year).max().expect("nonempty");
    Ok(InstitutionAssessment {
        verdict: if share > x_threshold { Verdict::AboveAverage } else { Verdict::NotAbove },
        share,
        n_papers: inst.papers.len(),
        year_span: (first, last),
    })
}

/// Articles and reviews.
pub fn substantial() -> BTreeSet<DocType> {
    [DocType::Article, DocType::Review].into_iter().collect()
}

/// Papers of the given types published inside `window` (inclusive), or over
/// the whole career when `window` is `None`.
pub fn count_publications(
    researcher: &ResearcherRecord,
    window: Option<(i32, i32)>,
    doc_types: &BTreeSet<DocType>,
) -> Result<usize, BbhError> {
    if doc_types.is_empty() {
        return Err(BbhError::InvalidArgument("doc_types must be nonempty".into()));
    }
    Ok(researcher
        .papers
        .iter()
        .filter(|p| doc_types.contains(&p.doc_type))
        .filter(|p| window.is_none_or(|(from, to)| (from..=to).contains(&p.pub_year)))
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityComparison {
    AMoreActive,
    BMoreActive,
    Indeterminate,
}

/// Compares whole-career counts of publications of `doc_types` between two
/// researchers of the same academic age (within `age_tolerance` years).
pub fn compare_researchers(
    a: &ResearcherRecord,
    b: &ResearcherRecord,
    doc_types: &BTreeSet<DocType>,
    age_tolerance: u32,
) -> Result<ActivityComparison, BbhError> {
    if a.academic_age.abs_diff(b.academic_age) > age_tolerance {
        return Err(BbhError::AgeMismatch { a: a.academic_age, b: b.academic_age, tolerance: age_tolerance });
    }
    let (na, nb) = (count_publications(a, None, doc_types)?, count_publications(b, None, doc_types)?);
    Ok(match na.cmp(&nb) {
        std::cmp::Ordering::Greater => ActivityComparison::AMoreActive,
        std::cmp::Ordering::Less => ActivityComparison::BMoreActive,
        std::cmp::Ordering::Equal => ActivityComparison::Indeterminate,
    })
}

/// Candidates with the most substantial publications inside their own PhD
/// window: the top `k`, plus anyone tied with the k-th.
pub fn preselect_candidates(candidates: &[ResearcherRecord], k: usize) -> Result<BTreeSet<String>, BbhError> {
    if candidates.is_empty() || k == 0 {
        return Err(BbhError::InvalidArgument("need candidates and k >= 1".into()));
    }
    let types = substantial();
    let scores = candidates
        .iter()
        .map(|c| Ok((c.id.clone(), count_publications(c, Some((c.phd_start, c.phd_end)), &types)? as f64)))
        .collect::<Result<Vec<_>, BbhError>>()?;
    Ok(top_k_select(&scores, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefineRule {
    /// Keep candidates whose total citations reach the threshold.
    MinCitations(u64),
    /// Keep the `k` candidates with the most top-decile papers, boundary ties included.
    TopCited(usize),
}

pub fn refine_preselection(
    preselected: &[ResearcherRecord],
    dist: &FieldYearDistribution,
    rule: RefineRule,
) -> Result<BTreeSet<String>, BbhError> {
    if preselected.is_empty() {
        return Err(BbhError::InvalidArgument("no preselected candidates".into()));
    }
    match rule {
        RefineRule::MinCitations(threshold) => Ok(preselected
            .iter()
            .filter(|c| c.papers.iter().map(|p| p.citations).sum::<u64>() >= threshold)
            .map(|c| c.id.clone())
            .collect()),
        RefineRule::TopCited(k) => top_cited(preselected, dist, k),
    }
}

fn top_cited(candidates: &[ResearcherRecord], dist: &FieldYearDistribution, k: usize) -> Result<BTreeSet<String>, BbhError> {
    let scores = candidates
        .iter()
        .map(|c| Ok((c.id.clone(), count_top(&c.papers, dist, TOP_DECILE)? as f64)))
        .collect::<Result<Vec<_>, BbhError>>()?;
    Ok(top_k_select(&scores, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    HighlyCited,
    Lottery { seed: u64 },
}

/// Final-round selection: most top-decile papers (ties at the boundary all
/// selected, so the result may exceed `n_awards`), or a seeded lottery
/// drawing `n_awards` candidates uniformly without replacement.
pub fn select_final_round(
    candidates: &[ResearcherRecord],
    dist: &FieldYearDistribution,
    n_awards: usize,
    mode: SelectionMode,
) -> Result<BTreeSet<String>, BbhError> {
    if candidates.is_empty() {
        return Err(BbhError::InvalidArgument("no candidates".into()));
    }
    match mode {
        SelectionMode::HighlyCited => top_cited(candidates, dist, n_awards),
        SelectionMode::Lottery { seed } => {
            let amount = n_awards.min(candidates.len());
            let picks = index::sample(&mut seed::rng(seed), candidates.len(), amount);
            Ok(picks.into_iter().map(|i| candidates[i].id.clone()).collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FIndex {
    /// More statistical tests than stated hypotheses.
    pub flag: bool,
    pub excess: i64,
}

pub fn f_index(paper: &PaperRecord) -> FIndex {
    FIndex {
        flag: paper.n_tests > paper.n_hypotheses,
        excess: paper.n_tests as i64 - paper.n_hypotheses as i64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JournalFIndex {
    /// Total tests over `max(1, total hypotheses)`.
    pub ratio: f64,
    pub flagged_share: f64,
}

pub fn f_index_journal(papers: &[PaperRecord]) -> Result<JournalFIndex, BbhError> {
    if papers.is_empty() {
        return Err(BbhError::NoPapers);
    }
    let tests: u64 = papers.iter().map(|p| p.n_tests as u64).sum();
    let hypotheses: u64 = papers.iter().map(|p| p.n_hypotheses as u64).sum();
    let flagged = papers.iter().filter(|p| f_index(p).flag).count();
    Ok(JournalFIndex {
        ratio: tests as f64 / hypotheses.max(1) as f64,
        flagged_share: flagged as f64 / papers.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorValue {
    pub name: String,
    pub value: f64,
    pub unit: String,
    /// Ids of the records that entered the value.
    pub provenance: Vec<String>,
}

/// Indicator rows for one institution: top share, verdict (1/0), paper
/// count and covered year span.
pub fn institution_indicators(
    inst: &InstitutionRecord,
    dist: &FieldYearDistribution,
    x_threshold: f64,
    top_fraction: f64,
) -> Result<Vec<IndicatorValue>, BbhError> {
    let a = assess_institution(inst, dist, x_threshold, top_fraction)?;
    let ids: Vec<String> = inst.papers.iter().map(|p| p.id.clone()).collect();
    let row = |name: &str, value: f64, unit: &str| IndicatorValue {
        name: name.to_string(),
        value,
        unit: unit.to_string(),
        provenance: ids.clone(),
    };
    Ok(vec![
        row("pptop_share", a.share, "fraction"),
        row("above_average", (a.verdict == Verdict::AboveAverage) as u8 as f64, "flag"),
        row("n_papers", a.n_papers as f64, "count"),
        row("first_year", a.year_span.0 as f64, "year"),
        row("last_year", a.year_span.1 as f64, "year"),
    ])
}

/// Writes `unit_id,indicator,value` rows.
pub fn write_indicator_csv<'a, W: Write>(
    writer: W,
    rows: impl IntoIterator<Item = (&'a str, &'a IndicatorValue)>,
) -> Result<(), BbhError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| BbhError::Io(e.to_string());
    wtr.write_record(["unit_id", "indicator", "value"]).map_err(io)?;
    for (unit, ind) in rows {
        wtr.write_record([unit, ind.name.as_str(), &ind.value.to_string()]).map_err(io)?;
    }
    wtr.flush().map_err(|e| BbhError::Io(e.to_string()))
}
