//! Bibliometric entities and a synthetic bibliometric world.
//!
//! Per-paper citations follow a discretized lognormal,
//! `floor(exp(mu + sigma Z))`, with `(mu, sigma)` configured per field.
//! Paper counts per researcher are Poisson.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::bbh::FieldYearDistribution;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Article,
    Review,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: String,
    pub field_id: u32,
    pub pub_year: i32,
    pub citations: u64,
    pub doc_type: DocType,
    pub n_hypotheses: u32,
    /// Statistical tests reported, including p-values and confidence intervals.
    pub n_tests: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResearcherRecord {
    pub id: String,
    /// Years since first publication.
    pub academic_age: u32,
    pub phd_start: i32,
    pub phd_end: i32,
    pub papers: Vec<PaperRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstitutionRecord {
    pub id: String,
    pub papers: Vec<PaperRecord>,
    pub mission: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub mu: f64,
    pub sigma: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self { mu: 1.0, sigma: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    /// Citation law per field; fields beyond the list reuse the last entry.
    pub fields: Vec<FieldParams>,
    pub first_year: i32,
    pub last_year: i32,
    pub mean_papers: f64,
    /// Relative frequencies of article, review, other.
    pub doc_type_mix: [f64; 3],
    pub mean_hypotheses: f64,
    pub mean_tests: f64,
    pub phd_years: i32,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            fields: vec![FieldParams::default()],
            first_year: 2010,
            last_year: 2019,
            mean_papers: 8.0,
            doc_type_mix: [0.7, 0.1, 0.2],
            mean_hypotheses: 2.0,
            mean_tests: 3.0,
            phd_years: 4,
        }
    }
}

impl WorldConfig {
    fn field(&self, field: u32) -> FieldParams {
        self.fields
            .get(field as usize)
            .or_else(|| self.fields.last())
            .copied()
            .unwrap_or_default()
    }
}

/// Paper plus the author and affiliation it was simulated under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthoredPaper {
    pub paper: PaperRecord,
    pub researcher_id: String,
    pub institution_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BibliometricWorld {
    pub researchers: Vec<ResearcherRecord>,
    pub institutions: Vec<InstitutionRecord>,
    pub papers: Vec<AuthoredPaper>,
    pub distribution: FieldYearDistribution,
}

pub fn simulate_bibliometric_world(
    n_researchers: usize,
    n_institutions: usize,
    n_fields: usize,
    seed: u64,
) -> Result<BibliometricWorld, EnvError> {
    simulate_bibliometric_world_with(n_researchers, n_institutions, n_fields, seed, &WorldConfig::default())
}

pub fn simulate_bibliometric_world_with(
    n_researchers: usize,
    n_institutions: usize,
    n_fields: usize,
    seed: u64,
    config: &WorldConfig,
) -> Result<BibliometricWorld, EnvError> {
    if n_researchers == 0 || n_institutions == 0 || n_fields == 0 {
        return Err(EnvError::InvalidArgument(
            "researcher, institution and field counts must all be >= 1".into(),
        ));
    }
    if config.first_year > config.last_year {
        return Err(EnvError::InvalidArgument("first_year after last_year".into()));
    }
    let bad_dist = |e: rand_distr::PoissonError| EnvError::InvalidArgument(e.to_string());
    let paper_law = Poisson::new(config.mean_papers).map_err(bad_dist)?;
    let hyp_law = Poisson::new(config.mean_hypotheses).map_err(bad_dist)?;
    let test_law = Poisson::new(config.mean_tests).map_err(bad_dist)?;
    let mix_total: f64 = config.doc_type_mix.iter().sum();

    let mut rng = seed::rng(seed);
    let mut researchers = Vec::with_capacity(n_researchers);
    let mut papers = Vec::new();
    let mut by_institution: Vec<Vec<PaperRecord>> = vec![Vec::new(); n_institutions];

    for r in 0..n_researchers {
        let researcher_id = format!("r{}", r + 1);
        let inst = rng.random_range(0..n_institutions);
        let field = rng.random_range(0..n_fields) as u32;
        let params = config.field(field);
        let start = rng.random_range(config.first_year - 10..=config.last_year);
        let count = paper_law.sample(&mut rng) as usize;
        let mut own = Vec::with_capacity(count);
        for _ in 0..count {
            let year = rng.random_range(start.max(config.first_year)..=config.last_year);
            let z: f64 = rng.sample(StandardNormal);
            let citations = (params.mu + params.sigma * z).exp().floor() as u64;
            let u = rng.random::<f64>() * mix_total;
            let doc_type = if u < config.doc_type_mix[0] {
                DocType::Article
            } else if u < config.doc_type_mix[0] + config.doc_type_mix[1] {
                DocType::Review
            } else {
                DocType::Other
            };
            let paper = PaperRecord {
                id: format!("p{}", papers.len() + 1),
                field_id: field,
                pub_year: year,
                citations,
                doc_type,
                n_hypotheses: hyp_law.sample(&mut rng) as u32,
                n_tests: test_law.sample(&mut rng) as u32,
            };
            by_institution[inst].push(paper.clone());
            own.push(paper.clone());
            papers.push(AuthoredPaper {
                paper,
                researcher_id: researcher_id.clone(),
                institution_id: format!("i{}", inst + 1),
            });
        }
        researchers.push(ResearcherRecord {
            id: researcher_id,
            academic_age: (config.last_year - start) as u32,
            phd_start: start,
            phd_end: start + config.phd_years,
            papers: own,
        });
    }

    const MISSIONS: [&str; 3] = ["research", "teaching", "transfer"];
    let institutions = by_institution
        .into_iter()
        .enumerate()
        .map(|(j, papers)| InstitutionRecord {
            id: format!("i{}", j + 1),
            papers,
            mission: MISSIONS[j % MISSIONS.len()].to_string(),
        })
        .collect();
    let distribution = FieldYearDistribution::from_papers(papers.iter().map(|p| &p.paper));
    Ok(BibliometricWorld {
        researchers,
        institutions,
        papers,
        distribution,
    })
}

// CSV layouts:
//   researchers.csv  id,academic_age,phd_start,phd_end
//   institutions.csv id,mission
//   papers.csv       id,researcher_id,institution_id,field_id,pub_year,citations,doc_type,n_hypotheses,n_tests

#[derive(Debug, Serialize, Deserialize)]
struct ResearcherRow {
    id: String,
    academic_age: u32,
    phd_start: i32,
    phd_end: i32,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstitutionRow {
    id: String,
    mission: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct PaperRow {
    id: String,
    researcher_id: String,
    institution_id: String,
    field_id: u32,
    pub_year: i32,
    citations: u64,
    doc_type: DocType,
    n_hypotheses: u32,
    n_tests: u32,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> EnvError + '_ {
    move |e| EnvError::Parse(format!("{}: {e}", path.display()))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), EnvError> {
    let mut wtr = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        wtr.serialize(row).map_err(csv_err(path))?;
    }
    wtr.flush().map_err(|e| EnvError::Io(format!("{}: {e}", path.display())))
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, EnvError> {
    let file = File::open(path).map_err(|e| EnvError::Io(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    rdr.deserialize().map(|r| r.map_err(csv_err(path))).collect()
}

impl BibliometricWorld {
    /// Writes `researchers.csv`, `institutions.csv` and `papers.csv` into `dir`.
    pub fn write_csv(&self, dir: impl AsRef<Path>) -> Result<(), EnvError> {
        let dir = dir.as_ref();
        write_rows(
            &dir.join("researchers.csv"),
            self.researchers.iter().map(|r| ResearcherRow {
                id: r.id.clone(),
                academic_age: r.academic_age,
                phd_start: r.phd_start,
                phd_end: r.phd_end,
            }),
        )?;
        write_rows(
            &dir.join("institutions.csv"),
            self.institutions.iter().map(|i| InstitutionRow {
                id: i.id.clone(),
                mission: i.mission.clone(),
            }),
        )?;
        write_rows(
            &dir.join("papers.csv"),
            self.papers.iter().map(|a| PaperRow {
                id: a.paper.id.clone(),
                researcher_id: a.researcher_id.clone(),
                institution_id: a.institution_id.clone(),
                field_id: a.paper.field_id,
                pub_year: a.paper.pub_year,
                citations: a.paper.citations,
                doc_type: a.paper.doc_type,
                n_hypotheses: a.paper.n_hypotheses,
                n_tests: a.paper.n_tests,
            }),
        )
    }
}

pub fn load_papers(path: impl AsRef<Path>) -> Result<Vec<AuthoredPaper>, EnvError> {
    let rows: Vec<PaperRow> = read_rows(path.as_ref())?;
    Ok(rows
        .into_iter()
        .map(|r| AuthoredPaper {
            paper: PaperRecord {
                id: r.id,
                field_id: r.field_id,
                pub_year: r.pub_year,
                citations: r.citations,
                doc_type: r.doc_type,
                n_hypotheses: r.n_hypotheses,
                n_tests: r.n_tests,
            },
            researcher_id: r.researcher_id,
            institution_id: r.institution_id,
        })
        .collect())
}

/// Loads researchers and attaches their papers (matched on `researcher_id`).
pub fn load_researchers(path: impl AsRef<Path>, papers: &[AuthoredPaper]) -> Result<Vec<ResearcherRecord>, EnvError> {
    let path = path.as_ref();
    let rows: Vec<ResearcherRow> = read_rows(path)?;
    let mut owned: BTreeMap<&str, Vec<PaperRecord>> = BTreeMap::new();
    for p in papers {
        owned.entry(p.researcher_id.as_str()).or_default().push(p.paper.clone());
    }
    rows.into_iter()
        .enumerate()
        .map(|(n, r)| {
            if r.phd_start > r.phd_end {
                return Err(EnvError::Schema {
                    row: Some(n + 2),
                    column: "phd_end".into(),
                    message: format!("phd_start {} after phd_end {}", r.phd_start, r.phd_end),
                });
            }
            let papers = owned.remove(r.id.as_str()).unwrap_or_default();
            Ok(ResearcherRecord {
                id: r.id,
                academic_age: r.academic_age,
                phd_start: r.phd_start,
                phd_end: r.phd_end,
                papers,
            })
        })
        .collect()
}

/// Loads institutions and attaches their papers (matched on `institution_id`).
pub fn load_institutions(path: impl AsRef<Path>, papers: &[AuthoredPaper]) -> Result<Vec<InstitutionRecord>, EnvError> {
    let rows: Vec<InstitutionRow> = read_rows(path.as_ref())?;
    let mut owned: BTreeMap<&str, Vec<PaperRecord>> = BTreeMap::new();
    for p in papers {
        owned.entry(p.institution_id.as_str()).or_default().push(p.paper.clone());
    }
    Ok(rows
        .into_iter()
        .map(|r| InstitutionRecord {
            papers: owned.remove(r.id.as_str()).unwrap_or_default(),
            id: r.id,
            mission: r.mission,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_gives_identical_counts_per_cell() {
        let config = WorldConfig {
            fields: vec![FieldParams { mu: 2.0, sigma: 0.0 }],
            ..WorldConfig::default()
        };
        let world = simulate_bibliometric_world_with(50, 3, 1, 5, &config).unwrap();
        let expected = 2.0f64.exp().floor() as u64;
        assert!(!world.papers.is_empty());
        assert!(world.papers.iter().all(|p| p.paper.citations == expected));
    }

    #[test]
    fn fixed_seed_reproduces_world() {
        let a = simulate_bibliometric_world(40, 4, 2, 99).unwrap();
        let b = simulate_bibliometric_world(40, 4, 2, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_bibliometric_world(40, 4, 2, 100).unwrap());
    }

    #[test]
    fn records_are_consistent() {
        let world = simulate_bibliometric_world(60, 5, 3, 1).unwrap();
        let total: usize = world.researchers.iter().map(|r| r.papers.len()).sum();
        assert_eq!(total, world.papers.len());
        let inst_total: usize = world.institutions.iter().map(|i| i.papers.len()).sum();
        assert_eq!(inst_total, world.papers.len());
        for r in &world.researchers {
            assert!(r.phd_start <= r.phd_end);
            assert!(r.papers.iter().all(|p| p.pub_year >= r.phd_start.max(2010)));
        }
        assert!(world.papers.iter().all(|p| p.paper.field_id < 3));
    }

    #[test]
    fn rejects_zero_counts() {
        assert!(simulate_bibliometric_world(0, 1, 1, 0).is_err());
        assert!(simulate_bibliometric_world(1, 0, 1, 0).is_err());
        assert!(simulate_bibliometric_world(1, 1, 0, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let world = simulate_bibliometric_world(20, 3, 2, 8).unwrap();
        let dir = tempfile::tempdir().unwrap();
        world.write_csv(dir.path()).unwrap();
        let papers = load_papers(dir.path().join("papers.csv")).unwrap();
        assert_eq!(papers, world.papers);
        let researchers = load_researchers(dir.path().join("researchers.csv"), &papers).unwrap();
        assert_eq!(researchers, world.researchers);
        let institutions = load_institutions(dir.path().join("institutions.csv"), &papers).unwrap();
        assert_eq!(institutions, world.institutions);
    }
}
