//! Information-greedy competitors: least-squares linear scoring and
//! logistic regression fitted by iteratively reweighted least squares.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envmodel::Environment;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("expected {expected} cue values, got {given}")]
    LengthMismatch { expected: usize, given: usize },
    #[error("model parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Ridge added to the normal equations when they are rank deficient.
pub const RIDGE_LAMBDA: f64 = 1e-8;
/// Bound on any logistic coefficient; exceeding it signals separation.
pub const SEPARATION_BOUND: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub cue_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Normal equations were singular and the ridge fallback was used.
    pub rank_deficient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub cue_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub converged: bool,
    pub iterations: usize,
    /// A coefficient ran past [`SEPARATION_BOUND`]; the coefficient vector
    /// was scaled back onto the bound.
    pub separated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-6 }
    }
}

fn design(env: &Environment) -> (DMatrix<f64>, DVector<f64>) {
    let (n, m) = (env.n_objects(), env.n_cues());
    let x = DMatrix::from_fn(n, m + 1, |i, j| if j == 0 { 1.0 } else { env.value(i, j - 1) });
    let y = DVector::from_iterator(n, env.criterion().iter().map(|&c| if c { 1.0 } else { 0.0 }));
    (x, y)
}

fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if let Some(chol) = a.clone().cholesky() {
        return chol.solve(b);
    }
    let ridged = a + DMatrix::identity(a.nrows(), a.ncols()) * RIDGE_LAMBDA;
    match ridged.clone().cholesky() {
        Some(chol) => chol.solve(b),
        None => ridged.lu().solve(b).unwrap_or_else(|| DVector::zeros(b.len())),
    }
}

/// Ordinary least squares of the 0/1 criterion on the cues plus intercept,
/// via the normal equations.
pub fn fit_linear(train: &Environment) -> LinearModel {
    let (x, y) = design(train);
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let eig = xtx.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let rank_deficient = min <= max * 1e-12;
    let system = if rank_deficient {
        &xtx + DMatrix::identity(xtx.nrows(), xtx.ncols()) * RIDGE_LAMBDA
    } else {
        xtx
    };
    let beta = match system.clone().cholesky() {
        Some(chol) => chol.solve(&xty),
        None => system.lu().solve(&xty).unwrap_or_else(|| DVector::zeros(xty.len())),
    };
    LinearModel {
        cue_names: train.cue_names(),
        intercept: beta[0],
        weights: beta.iter().skip(1).copied().collect(),
        rank_deficient,
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Bernoulli log-likelihood of `criterion` under logit `intercept + w . x`.
pub fn log_likelihood(env: &Environment, intercept: f64, weights: &[f64]) -> f64 {
    (0..env.n_objects())
        .map(|i| {
            let z = intercept + env.row(i).iter().zip(weights).map(|(v, w)| v * w).sum::<f64>();
            let y = if env.criterion()[i] { 1.0 } else { 0.0 };
            y * z - softplus(z)
        })
        .sum()
}

fn ll_of(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let z = x * beta;
    z.iter().zip(y.iter()).map(|(&z, &y)| y * z - softplus(z)).sum()
}

/// Newton-Raphson (IRLS) ascent on the Bernoulli log-likelihood with step
/// halving. Stops when the largest coefficient update falls below `tol`.
pub fn fit_logistic(train: &Environment, options: LogisticOptions) -> Result<LogisticModel, BaselineError> {
    if !train.has_both_classes() {
        return Err(BaselineError::SingleClass);
    }
    if options.max_iter == 0 || options.tol.is_nan() || options.tol <= 0.0 {
        return Err(BaselineError::InvalidArgument("max_iter must be >= 1 and tol > 0".into()));
    }
    let (x, y) = design(train);
    let p = x.ncols();
    let mut beta = DVector::zeros(p);
    let mut ll = ll_of(&x, &y, &beta);
    let mut converged = false;
    let mut separated = false;
    let mut iterations = 0;

    while iterations < options.max_iter {
        iterations += 1;
        let z = &x * &beta;
        let probs = z.map(sigmoid);
        let gradient = x.transpose() * (&y - &probs);
        let w = probs.map(|q| q * (1.0 - q));
        let xw = DMatrix::from_fn(x.nrows(), p, |i, j| x[(i, j)] * w[i]);
        let hessian = x.transpose() * xw;
        let mut step = solve_spd(&hessian, &gradient);

        let mut candidate = &beta + &step;
        let mut cand_ll = ll_of(&x, &y, &candidate);
        let mut halvings = 0;
        while cand_ll < ll && halvings < 40 {
            step /= 2.0;
            candidate = &beta + &step;
            cand_ll = ll_of(&x, &y, &candidate);
            halvings += 1;
        }
        beta = candidate;
        ll = cand_ll;

        let largest = beta.amax();
        if largest > SEPARATION_BOUND {
            beta *= SEPARATION_BOUND / largest;
            separated = true;
            break;
        }
        if step.amax() < options.tol {
            converged = true;
            break;
        }
    }

    Ok(LogisticModel {
        cue_names: train.cue_names(),
        intercept: beta[0],
        weights: beta.iter().skip(1).copied().collect(),
        converged,
        iterations,
        separated,
    })
}

/// Score of one object under a fitted model.
pub trait ScoreModel {
    fn weights(&self) -> &[f64];
    fn intercept(&self) -> f64;
    fn link(&self, linear: f64) -> f64;

    fn predict_score(&self, cue_values: &[f64]) -> Result<f64, BaselineError> {
        let w = self.weights();
        if cue_values.len() != w.len() {
            return Err(BaselineError::LengthMismatch { expected: w.len(), given: cue_values.len() });
        }
        let dot: f64 = w.iter().zip(cue_values).map(|(a, b)| a * b).sum();
        Ok(self.link(dot + self.intercept()))
    }
}

impl ScoreModel for LinearModel {
    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn intercept(&self) -> f64 {
        self.intercept
    }

    fn link(&self, linear: f64) -> f64 {
        linear
    }
}

impl ScoreModel for LogisticModel {
    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn intercept(&self) -> f64 {
        self.intercept
    }

    fn link(&self, linear: f64) -> f64 {
        sigmoid(linear)
    }
}

/// Linear scores are raw dot products plus intercept; logistic scores are
/// probabilities.
pub fn predict_score(model: &impl ScoreModel, cue_values: &[f64]) -> Result<f64, BaselineError> {
    model.predict_score(cue_values)
}

// Key-value text form, one `key = value` per line:
//   model = linear | logistic
//   intercept = <f64>
//   <flags>
//   weight.<cue name> = <f64>     (one per cue, in cue order)

fn kv_lines(text: &str) -> Result<Vec<(usize, &str, &str)>, BaselineError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.split_once(" = ")
                .map(|(k, v)| (n + 1, k.trim(), v.trim()))
                .ok_or(BaselineError::Parse { line: n + 1, message: "expected `key = value`".into() })
        })
        .collect()
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, BaselineError> {
    v.parse().map_err(|_| BaselineError::Parse { line, message: format!("bad value for `{key}`: `{v}`") })
}

struct Parsed {
    kind: String,
    intercept: f64,
    flags: BTreeMap<String, (usize, String)>,
    names: Vec<String>,
    weights: Vec<f64>,
}

fn parse_model(text: &str) -> Result<Parsed, BaselineError> {
    let mut kind = None;
    let mut intercept = None;
    let mut flags = BTreeMap::new();
    let (mut names, mut weights) = (Vec::new(), Vec::new());
    for (line, key, value) in kv_lines(text)? {
        match key {
            "model" => kind = Some(value.to_string()),
            "intercept" => intercept = Some(parse_value(line, key, value)?),
            k if k.starts_with("weight.") => {
                names.push(k["weight.".len()..].to_string());
                weights.push(parse_value(line, key, value)?);
            }
            k => {
                flags.insert(k.to_string(), (line, value.to_string()));
            }
        }
    }
    let missing = |what: &str| BaselineError::Parse { line: 0, message: format!("missing `{what}`") };
    Ok(Parsed {
        kind: kind.ok_or_else(|| missing("model"))?,
        intercept: intercept.ok_or_else(|| missing("intercept"))?,
        flags,
        names,
        weights,
    })
}

fn flag<T: std::str::FromStr>(parsed: &Parsed, key: &str) -> Result<T, BaselineError> {
    let (line, value) = parsed
        .flags
        .get(key)
        .ok_or(BaselineError::Parse { line: 0, message: format!("missing `{key}`") })?;
    parse_value(*line, key, value)
}

fn write_weights(out: &mut String, names: &[String], weights: &[f64]) {
    for (name, w) in names.iter().zip(weights) {
        let _ = writeln!(out, "weight.{name} = {w}");
    }
}

impl LinearModel {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "model = linear\nintercept = {}\nrank_deficient = {}\n",
            self.intercept, self.rank_deficient
        );
        write_weights(&mut out, &self.cue_names, &self.weights);
        out
    }

    pub fn from_text(text: &str) -> Result<Self, BaselineError> {
        let p = parse_model(text)?;
        if p.kind != "linear" {
            return Err(BaselineError::Parse { line: 1, message: format!("expected linear model, found `{}`", p.kind) });
        }
        Ok(Self {
            rank_deficient: flag(&p, "rank_deficient")?,
            cue_names: p.names,
            weights: p.weights,
            intercept: p.intercept,
        })
    }
}

impl LogisticModel {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "model = logistic\nintercept = {}\nconverged = {}\niterations = {}\nseparated = {}\n",
            self.intercept, self.converged, self.iterations, self.separated
        );
        write_weights(&mut out, &self.cue_names, &self.weights);
        out
    }

    pub fn from_text(text: &str) -> Result<Self, BaselineError> {
        let p = parse_model(text)?;
        if p.kind != "logistic" {
            return Err(BaselineError::Parse { line: 1, message: format!("expected logistic model, found `{}`", p.kind) });
        }
        Ok(Self {
            converged: flag(&p, "converged")?,
            iterations: flag(&p, "iterations")?,
            separated: flag(&p, "separated")?,
            cue_names: p.names,
            weights: p.weights,
            intercept: p.intercept,
        })
    }
}
