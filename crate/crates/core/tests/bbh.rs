use std::collections::BTreeSet;

use frugal_core::bbh::{
    assess_institution, citation_percentile, compare_researchers, pptop_share, select_final_round, substantial,
    FieldYearDistribution, SelectionMode,
};
use frugal_core::envmodel::{DocType, InstitutionRecord, PaperRecord, ResearcherRecord};
use proptest::prelude::*;

fn paper(id: String, field: u32, year: i32, citations: u64) -> PaperRecord {
    PaperRecord { id, field_id: field, pub_year: year, citations, doc_type: DocType::Article, n_hypotheses: 1, n_tests: 1 }
}

fn papers_from(counts: &[(u8, u8)]) -> Vec<PaperRecord> {
    counts
        .iter()
        .enumerate()
        .map(|(i, &(cell, c))| paper(format!("p{i}"), (cell % 2) as u32, 2000 + (cell / 2) as i32, c as u64))
        .collect()
}

fn researcher(id: &str, age: u32, papers: Vec<PaperRecord>) -> ResearcherRecord {
    ResearcherRecord { id: id.into(), academic_age: age, phd_start: 2000, phd_end: 2004, papers }
}

proptest! {
    #[test]
    fn percentile_grows_with_citations(counts in prop::collection::vec(0u64..20, 1..40)) {
        let papers: Vec<PaperRecord> = counts.iter().enumerate().map(|(i, &c)| paper(format!("p{i}"), 0, 2020, c)).collect();
        let dist = FieldYearDistribution::from_papers(&papers);
        for a in &papers {
            for b in &papers {
                if a.citations <= b.citations {
                    prop_assert!(citation_percentile(a, &dist).unwrap() <= citation_percentile(b, &dist).unwrap());
                }
            }
        }
    }

    #[test]
    fn share_survives_proportional_duplication(counts in prop::collection::vec((0u8..4, 0u8..30), 1..40), k in 2usize..4) {
        let papers = papers_from(&counts);
        let dist = FieldYearDistribution::from_papers(&papers);
        let share = pptop_share(&papers, &dist, 0.1).unwrap();
        prop_assert!((0.0..=1.0).contains(&share));
        let copies: Vec<PaperRecord> = (0..k)
            .flat_map(|r| papers.iter().map(move |p| PaperRecord { id: format!("{}-{r}", p.id), ..p.clone() }))
            .collect();
        let big = FieldYearDistribution::from_papers(&copies);
        prop_assert_eq!(pptop_share(&papers, &big, 0.1).unwrap(), share);
    }

    #[test]
    fn assessment_ignores_paper_ids(counts in prop::collection::vec((0u8..4, 0u8..30), 1..40), x in 0.0f64..0.5) {
        let papers = papers_from(&counts);
        let dist = FieldYearDistribution::from_papers(&papers);
        let inst = InstitutionRecord { id: "u".into(), papers: papers.clone(), mission: "research".into() };
        let renamed = InstitutionRecord {
            papers: papers.iter().rev().map(|p| PaperRecord { id: format!("z{}", p.id), ..p.clone() }).collect(),
            ..inst.clone()
        };
        let a = assess_institution(&inst, &dist, x, 0.1).unwrap();
        let b = assess_institution(&renamed, &dist, x, 0.1).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn activity_ignores_citation_scale(na in 0usize..8, nb in 0usize..8, scale in 2u64..100) {
        let mk = |id: &str, n: usize, s: u64| {
            researcher(id, 7, (0..n).map(|i| paper(format!("{id}{i}"), 0, 2001, i as u64 * s)).collect())
        };
        let types = substantial();
        prop_assert_eq!(
            compare_researchers(&mk("a", na, 1), &mk("b", nb, 1), &types, 0).unwrap(),
            compare_researchers(&mk("a", na, scale), &mk("b", nb, scale), &types, 0).unwrap()
        );
    }
}

#[test]
fn dominant_candidate_wins_highly_cited_round() {
    // A cell of 100 distinct counts; the star holds the five highest.
    let mut star = Vec::new();
    let mut rest = Vec::new();
    for c in 0..100u64 {
        let p = paper(format!("p{c}"), 0, 2015, c);
        if c >= 95 { star.push(p) } else { rest.push(p) }
    }
    let dist = FieldYearDistribution::from_papers(star.iter().chain(&rest));
    let pool = vec![researcher("star", 5, star), researcher("other", 5, rest[..10].to_vec())];
    let chosen = select_final_round(&pool, &dist, 1, SelectionMode::HighlyCited).unwrap();
    assert_eq!(chosen, BTreeSet::from(["star".to_string()]));
}

#[test]
fn lottery_is_uniform() {
    let pool: Vec<ResearcherRecord> = (0..5).map(|i| researcher(&format!("r{i}"), 5, vec![])).collect();
    let dist = FieldYearDistribution::default();
    let mut hits = [0usize; 5];
    let seeds = 10_000;
    for seed in 0..seeds {
        let chosen = select_final_round(&pool, &dist, 2, SelectionMode::Lottery { seed }).unwrap();
        assert_eq!(chosen.len(), 2);
        for (i, r) in pool.iter().enumerate() {
            hits[i] += chosen.contains(&r.id) as usize;
        }
    }
    for h in hits {
        assert!((h as f64 / seeds as f64 - 0.4).abs() <= 0.02, "{hits:?}");
    }
}
