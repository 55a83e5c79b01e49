use frugal_core::baselines::fit_linear;
use frugal_core::bbh::citation_percentile;
use frugal_core::envmodel::{
    simulate_bibliometric_world, simulate_environment, split_environment, SimSpec, WeightProfile,
};
use frugal_core::harness::{cross_validate, CrossValidateOptions, EnvSource, StrategySpec, Task};

fn spec(n_objects: usize, profile: WeightProfile, noise: f64) -> SimSpec {
    SimSpec {
        n_objects,
        n_cues: 4,
        weight_profile: profile,
        redundancy: 0.0,
        noise,
        seed: 9,
    }
}

#[test]
fn least_squares_weights_decrease_under_halving_profile() {
    let env = simulate_environment(&spec(10_000, WeightProfile::Noncompensatory, 0.0)).unwrap();
    let w = fit_linear(&env).weights;
    assert!(w.windows(2).all(|p| p[0] > p[1]), "{w:?}");
    assert!(w[3] > 0.0);
}

#[test]
fn pure_noise_is_unpredictable() {
    let strategies: Vec<StrategySpec> = serde_json::from_str(
        r#"[{"kind":"fft"},{"kind":"threshold"},{"kind":"linear"},{"kind":"logistic"}]"#,
    )
    .unwrap();
    let source = EnvSource::Simulated(spec(200, WeightProfile::Uniform, 0.5));
    let report = cross_validate(&source, &strategies, &CrossValidateOptions::new(50, 0.5, 4, Task::Classification)).unwrap();
    for s in &report.strategies {
        let acc = s.pred_acc.unwrap().mean;
        assert!((acc - 0.5).abs() <= 0.05, "{}: {acc}", s.strategy);
    }
}

#[test]
fn simulators_are_pure() {
    let s = spec(300, WeightProfile::Noncompensatory, 0.1);
    assert_eq!(simulate_environment(&s).unwrap(), simulate_environment(&s).unwrap());
    assert_ne!(simulate_environment(&s).unwrap(), simulate_environment(&s.with_seed(10)).unwrap());
    assert_eq!(simulate_bibliometric_world(20, 3, 2, 5).unwrap(), simulate_bibliometric_world(20, 3, 2, 5).unwrap());
}

#[test]
fn redundancy_is_met_on_large_samples() {
    for target in [0.0, 0.3, 0.6] {
        let env = simulate_environment(&SimSpec { redundancy: target, ..spec(4000, WeightProfile::Uniform, 0.0) }).unwrap();
        let cols: Vec<Vec<f64>> = (0..4).map(|k| env.column(k).collect()).collect();
        let corr = |a: &[f64], b: &[f64]| {
            let n = a.len() as f64;
            let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
            let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
            let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
            let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
            cov / (va * vb).sqrt()
        };
        let mut total = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                total += corr(&cols[i], &cols[j]);
            }
        }
        let mean = total / 6.0;
        assert!((mean - target).abs() <= 0.1, "target {target}, got {mean}");
    }
}

#[test]
fn split_partitions_the_source() {
    let env = simulate_environment(&spec(37, WeightProfile::Uniform, 0.1)).unwrap();
    let s = split_environment(&env, 0.3, 8).unwrap();
    let mut ids: Vec<&String> = s.train.objects().iter().chain(s.test.objects()).collect();
    ids.sort();
    let mut all: Vec<&String> = env.objects().iter().collect();
    all.sort();
    assert_eq!(ids, all);
    assert_eq!(s.train.cues(), s.test.cues());
    assert_eq!(s.train.n_objects(), 11);
}

#[test]
fn world_top_decile_share_near_ten_percent() {
    let world = simulate_bibliometric_world(2000, 10, 1, 17).unwrap();
    let mut checked = 0;
    for ((field, year), cell) in world.distribution.cells() {
        if cell.len() < 500 {
            continue;
        }
        let papers: Vec<_> = world
            .papers
            .iter()
            .map(|a| &a.paper)
            .filter(|p| p.field_id == field && p.pub_year == year)
            .collect();
        let top = papers.iter().filter(|p| citation_percentile(p, &world.distribution).unwrap() >= 0.9).count();
        // Brute-force rank of each paper against the whole cell.
        let brute = papers
            .iter()
            .filter(|p| {
                let below = papers.iter().filter(|q| q.citations < p.citations).count() as f64;
                let equal = papers.iter().filter(|q| q.citations == p.citations).count() as f64;
                (below + 0.5 * equal) / papers.len() as f64 >= 0.9
            })
            .count();
        assert_eq!(top, brute);
        let share = top as f64 / papers.len() as f64;
        assert!((share - 0.10).abs() <= 0.02, "cell ({field},{year}): {share}");
        checked += 1;
    }
    assert!(checked >= 5, "only {checked} large cells");
}
