//! Synthetic environments with controlled ecological structure.
//!
//! Each object draws a common factor `F` and idiosyncratic terms `e_k`; the
//! latent score of cue `k` is `z_k = a F + sqrt(1 - a^2) e_k` and the binary
//! cue is `1[z_k > 0]`. Two such cues have latent correlation `rho = a^2`
//! and phi correlation `(2 / pi) asin(rho)`; the loading is calibrated by
//! bisection on that map so the mean pairwise cue correlation hits the
//! requested redundancy.
//!
//! The criterion is `1[sum_k w_k z_k > 0]`, i.e. the weighted latent sum cut
//! at its population median, after which every label is flipped
//! independently with probability `noise`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::environment::{CueDefinition, Environment};
use super::EnvError;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightProfile {
    /// Halving weights `w_k = 2^-k`, normalized to sum 1.
    Noncompensatory,
    Uniform,
}

impl WeightProfile {
    pub fn weights(self, n_cues: usize) -> Vec<f64> {
        let raw: Vec<f64> = match self {
            WeightProfile::Noncompensatory => (1..=n_cues).map(|k| 0.5f64.powi(k as i32)).collect(),
            WeightProfile::Uniform => vec![1.0; n_cues],
        };
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub n_objects: usize,
    pub n_cues: usize,
    pub weight_profile: WeightProfile,
    /// Target mean pairwise correlation of the binary cues.
    pub redundancy: f64,
    /// Probability of flipping each criterion label.
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SimSpec {
    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: String| Err(EnvError::InvalidArgument(m));
        if self.n_objects < 4 {
            return bad(format!("n_objects must be >= 4, got {}", self.n_objects));
        }
        if self.n_cues < 1 {
            return bad("n_cues must be >= 1".into());
        }
        if !(0.0..=0.95).contains(&self.redundancy) {
            return bad(format!("redundancy must lie in [0, 0.95], got {}", self.redundancy));
        }
        if !(0.0..=0.5).contains(&self.noise) {
            return bad(format!("noise must lie in [0, 0.5], got {}", self.noise));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Phi correlation of two median-split Gaussians with latent correlation `rho`.
pub fn binary_correlation(rho: f64) -> f64 {
    2.0 * rho.asin() / std::f64::consts::PI
}

const MAX_CALIBRATION_STEPS: usize = 200;

/// Common-factor loading whose binary cue correlation equals `target`.
pub fn calibrate_loading(target: f64) -> Result<f64, EnvError> {
    if target <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..MAX_CALIBRATION_STEPS {
        let mid = 0.5 * (lo + hi);
        if binary_correlation(mid * mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let loading = 0.5 * (lo + hi);
    let reached = binary_correlation(loading * loading);
    if (reached - target).abs() > 1e-9 {
        return Err(EnvError::UnreachableRedundancy { target, reached });
    }
    Ok(loading)
}

pub fn simulate_environment(spec: &SimSpec) -> Result<Environment, EnvError> {
    spec.validate()?;
    let loading = calibrate_loading(spec.redundancy)?;
    let unique = (1.0 - loading * loading).sqrt();
    let weights = spec.weight_profile.weights(spec.n_cues);
    let mut rng = seed::rng(spec.seed);

    let mut values = Vec::with_capacity(spec.n_objects * spec.n_cues);
    let mut criterion = Vec::with_capacity(spec.n_objects);
    for _ in 0..spec.n_objects {
        let common: f64 = rng.sample(StandardNormal);
        let mut score = 0.0;
        for w in &weights {
            let e: f64 = rng.sample(StandardNormal);
            let z = loading * common + unique * e;
            score += w * z;
            values.push(if z > 0.0 { 1.0 } else { 0.0 });
        }
        let flip = rng.random::<f64>() < spec.noise;
        criterion.push((score > 0.0) != flip);
    }
    let objects = (1..=spec.n_objects).map(|i| format!("o{i}")).collect();
    let cues = (1..=spec.n_cues).map(|k| CueDefinition::binary(format!("c{k}"))).collect();
    Environment::new(objects, cues, values, criterion)
}
