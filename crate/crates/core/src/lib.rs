//! Fast-and-frugal heuristics, fast-and-frugal trees, statistical baselines
//! and bibliometrics-based heuristics, with a seeded benchmarking harness.

pub mod baselines;
pub mod bbh;
pub mod envmodel;
pub mod fftbuild;
pub mod harness;
pub mod seed;
pub mod toolbox;
