use frugal_core::baselines::{fit_linear, fit_logistic, LogisticOptions, ScoreModel};
use frugal_core::envmodel::{CueDefinition, Environment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_env(seed: u64, n: usize, m: usize) -> Environment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let crit: Vec<bool> = rows
        .iter()
        .map(|r| r.iter().enumerate().map(|(k, v)| v / (k + 1) as f64).sum::<f64>() + rng.random_range(-1.5..1.5) > 0.0)
        .collect();
    let cues = (0..m).map(|k| CueDefinition::numeric(format!("x{k}"))).collect();
    Environment::from_rows(cues, &rows, &crit).unwrap()
}

fn y(env: &Environment, i: usize) -> f64 {
    if env.criterion()[i] {
        1.0
    } else {
        0.0
    }
}

#[test]
fn linear_residuals_are_orthogonal_to_the_design() {
    for seed in 0..20 {
        let env = random_env(seed, 60, 3);
        let model = fit_linear(&env);
        assert!(!model.rank_deficient);
        let residual: Vec<f64> = (0..60).map(|i| y(&env, i) - model.predict_score(env.row(i)).unwrap()).collect();
        assert!(residual.iter().sum::<f64>().abs() < 1e-6);
        for k in 0..3 {
            let dot: f64 = (0..60).map(|i| env.value(i, k) * residual[i]).sum();
            assert!(dot.abs() < 1e-6, "seed {seed}, cue {k}: {dot}");
        }
    }
}

#[test]
fn logistic_gradient_vanishes_at_convergence() {
    let opts = LogisticOptions::default();
    for seed in 0..20 {
        let env = random_env(seed, 80, 3);
        let model = fit_logistic(&env, opts).unwrap();
        assert!(model.converged && !model.separated, "seed {seed}");
        let mut grad = [0.0; 4];
        for i in 0..80 {
            let r = y(&env, i) - model.predict_score(env.row(i)).unwrap();
            grad[0] += r;
            for k in 0..3 {
                grad[k + 1] += r * env.value(i, k);
            }
        }
        assert!(grad.iter().all(|g| g.abs() < 10.0 * opts.tol), "seed {seed}: {grad:?}");
    }
}

#[test]
fn logistic_classification_ignores_cue_shifts() {
    for seed in 0..10 {
        let env = random_env(seed, 80, 2);
        let rows: Vec<Vec<f64>> = (0..80).map(|i| vec![env.value(i, 0) + 7.5, env.value(i, 1)]).collect();
        let shifted = Environment::from_rows(env.cues().to_vec(), &rows, env.criterion()).unwrap();
        let (a, b) = (fit_logistic(&env, LogisticOptions::default()).unwrap(), fit_logistic(&shifted, LogisticOptions::default()).unwrap());
        for i in 0..80 {
            let (pa, pb) = (a.predict_score(env.row(i)).unwrap(), b.predict_score(shifted.row(i)).unwrap());
            assert!((pa - pb).abs() < 1e-6);
            assert_eq!(pa >= 0.5, pb >= 0.5);
        }
    }
}
