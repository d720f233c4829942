//! Bayesian optimization of robustness measures of black-box functions
//! under input uncertainty, on finite grids.
//!
//! The black-box f(x, w) takes a controllable design variable x and an
//! uncontrollable environmental variable w ~ P*. The optimization target is
//! a robustness measure F(x) = ρ(f(x, ·)) such as the expectation, CVaR or a
//! probability threshold. The crate provides:
//!
//! - [`gp`]: exact GP regression on the joint grid with incremental
//!   Cholesky updates, posterior path sampling and information gain;
//! - [`measures`]: robustness measures, guaranteed credible bounds for them
//!   and the width functions q(a);
//! - [`policy`]: the randomized-β UCB acquisition rule, the estimated
//!   solution, the uncontrollable-setting variant and baseline strategies;
//! - [`bench`]: the benchmark problems (2D/4D/6D synthetic, tabulated
//!   carrier-lifetime surface) with their environment distributions;
//! - [`diagnostics`]: regret series and theoretical regret-bound evaluation.

pub mod bench;
pub mod diagnostics;
pub mod error;
pub mod gp;
pub mod grid;
pub mod measures;
pub mod policy;
pub mod rng;

pub use error::{CoreError, Result};
