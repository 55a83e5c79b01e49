use rand::seq::SliceRandom;

use super::environment::Environment;
use super::EnvError;
use crate::seed;

/// Disjoint train/test partition of one source environment.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: Environment,
    pub test: Environment,
    pub seed: u64,
}

/// Uniform random partition without replacement.
///
/// The train part holds `floor(train_fraction * n)` objects. Both parts keep
/// the source object order, so the result depends only on the seed.
pub fn split_environment(env: &Environment, train_fraction: f64, seed: u64) -> Result<SplitPair, EnvError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(EnvError::InvalidArgument(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = env.n_objects();
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train < 2 || n - n_train < 2 {
        return Err(EnvError::TooFewObjects {
            objects: n,
            train: n_train,
            test: n - n_train,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let (train, test) = order.split_at_mut(n_train);
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPair {
        train: env.subset(train)?,
        test: env.subset(test)?,
        seed,
    })
}
