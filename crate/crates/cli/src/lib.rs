//! Campaign runner for robustness-measure Bayesian optimization: config
//! parsing, strategy execution over repetitions, CSV emission and quick
//! self-checks.

pub mod campaign;
pub mod config;
pub mod output;
pub mod selftest;
