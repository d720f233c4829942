//! Baseline acquisition strategies used for comparison: uniform random,
//! uncertainty sampling, expected improvement on the integrated GP, the
//! probability-threshold UCB score, and the optimistic-only bounding-box
//! rule.

use std::sync::OnceLock;

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{optimistic_argmax, CredibleField};
use crate::error::Result;
use crate::gp::{GPosterior, KernelSpec};
use crate::grid::ProblemGrid;
use crate::measures::EnvDist;

fn std_normal_cdf(z: f64) -> f64 {
    static STD: OnceLock<Normal> = OnceLock::new();
    STD.get_or_init(|| Normal::new(0.0, 1.0).expect("standard normal"))
        .cdf(z)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Uniform design draw plus an environment draw from the pmf.
pub fn select_random<R: Rng + ?Sized>(
    grid: &ProblemGrid,
    dist: &EnvDist,
    rng: &mut R,
) -> (usize, usize) {
    let x = rng.random_range(0..grid.n_x());
    let w = super::select_w_uncontrollable(dist, rng);
    (x, w)
}

/// Uncertainty sampling: the joint point of maximum posterior variance.
pub fn select_us(state: &GPosterior) -> (usize, usize) {
    let grid = state.grid();
    let mut best = (0usize, 0usize);
    let mut best_var = f64::NEG_INFINITY;
    for x in 0..grid.n_x() {
        for w in 0..grid.n_w() {
            let v = state.var_at(x, w);
            if v > best_var {
                best_var = v;
                best = (x, w);
            }
        }
    }
    best
}

/// Precomputed prior variance of the pmf-integrated GP per design:
/// Σ_{w,w'} p(w) p(w') k((x,w), (x,w')).
#[derive(Debug, Clone)]
pub struct BqPrior {
    per_x: Vec<f64>,
}

impl BqPrior {
    pub fn new(kernel: &KernelSpec, grid: &ProblemGrid, dist: &EnvDist) -> Result<Self> {
        kernel.validate(grid.joint_dim())?;
        let n_w = grid.n_w();
        let pmf = dist.pmf();
        let mut per_x = Vec::with_capacity(grid.n_x());
        for x in 0..grid.n_x() {
            let coords: Vec<Vec<f64>> = (0..n_w).map(|w| grid.joint_coords(x, w)).collect();
            let mut total = 0.0;
            for a in 0..n_w {
                if pmf[a] == 0.0 {
                    continue;
                }
                // Diagonal once, off-diagonal doubled by symmetry.
                total += pmf[a] * pmf[a] * kernel.eval_unchecked(&coords[a], &coords[a]);
                for b in 0..a {
                    if pmf[b] == 0.0 {
                        continue;
                    }
                    total +=
                        2.0 * pmf[a] * pmf[b] * kernel.eval_unchecked(&coords[a], &coords[b]);
                }
            }
            per_x.push(total);
        }
        Ok(Self { per_x })
    }

    pub fn per_x(&self) -> &[f64] {
        &self.per_x
    }
}

/// Posterior of the pmf-integrated GP: mean μ̃(x) = Σ_w p(w) μ(x, w) and
/// variance σ̃²(x) = prior(x) − ‖Σ_w p(w) v(x, w)‖², clamped at zero.
pub fn bq_posterior(state: &GPosterior, dist: &EnvDist, prior: &BqPrior) -> (Vec<f64>, Vec<f64>) {
    let grid = state.grid();
    let (n_x, n_w) = (grid.n_x(), grid.n_w());
    let pmf = dist.pmf();
    let mut mean = Vec::with_capacity(n_x);
    let mut var = Vec::with_capacity(n_x);
    let v_rows = state.v_rows();
    for x in 0..n_x {
        mean.push(dist.expectation(state.mean_row(x)));
        let mut reduction = 0.0;
        for row in v_rows {
            let s: f64 = pmf
                .iter()
                .zip(&row[x * n_w..(x + 1) * n_w])
                .map(|(p, v)| p * v)
                .sum();
            reduction += s * s;
        }
        var.push((prior.per_x[x] - reduction).max(0.0));
    }
    (mean, var)
}

/// Expected-improvement selection on the integrated GP. Designs with zero
/// integrated variance score max(μ̃ − F̂, 0).
pub fn select_bq(state: &GPosterior, dist: &EnvDist, prior: &BqPrior) -> usize {
    let (mean, var) = bq_posterior(state, dist, prior);
    let f_hat = mean.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best = 0usize;
    let mut best_ei = f64::NEG_INFINITY;
    for (x, (&m, &v)) in mean.iter().zip(&var).enumerate() {
        let ei = if v > 0.0 {
            let sd = v.sqrt();
            let z = (m - f_hat) / sd;
            (sd * (z * std_normal_cdf(z) + std_normal_pdf(z))).max(0.0)
        } else {
            (m - f_hat).max(0.0)
        };
        if ei > best_ei {
            best_ei = ei;
            best = x;
        }
    }
    best
}

/// Trade-off flavor of the probability-threshold UCB score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BptVariant {
    /// score = p̂ + β_t^{1/10} (γ²)^{1/10} with β_t = |X×Ω| π² t² / (3·0.05).
    Theory,
    /// score = p̂ + 3γ.
    Fixed,
}

/// Probability-threshold UCB: scores each design by the pmf-weighted
/// exceedance probability plus an exploration term, then picks the
/// environment maximizing the Bernoulli variance Φ(z)(1 − Φ(z)) along the
/// chosen row. `c` controls the tie-shift margin η around the threshold.
pub fn select_bptucb(
    state: &GPosterior,
    dist: &EnvDist,
    threshold: f64,
    c: f64,
    t: usize,
    variant: BptVariant,
) -> (usize, usize) {
    debug_assert!(t >= 1);
    let grid = state.grid();
    let (n_x, n_w) = (grid.n_x(), grid.n_w());
    let grid_size = grid.joint_size() as f64;
    let eta = bpt_eta(c, grid.joint_size());
    let pmf = dist.pmf();

    let exceed = |x: usize, w: usize| -> f64 {
        let mu = state.mean_at(x, w);
        let sd = state.sd_at(x, w);
        let h = if (mu - threshold).abs() < eta {
            threshold + 2.0 * eta
        } else {
            threshold
        };
        if sd > 0.0 {
            std_normal_cdf((mu - h) / sd)
        } else if mu > h {
            1.0
        } else {
            0.0
        }
    };

    let mut best_x = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for x in 0..n_x {
        let mut p_hat = 0.0;
        let mut gamma_sq = 0.0;
        for (w, &p) in pmf.iter().enumerate() {
            let phi = exceed(x, w);
            p_hat += p * phi;
            gamma_sq += p * phi * (1.0 - phi);
        }
        let score = match variant {
            BptVariant::Theory => {
                let beta = grid_size * std::f64::consts::PI.powi(2) * (t * t) as f64
                    / (3.0 * 0.05);
                p_hat + beta.powf(0.1) * gamma_sq.powf(0.1)
            }
            BptVariant::Fixed => p_hat + 3.0 * gamma_sq.sqrt(),
        };
        if score > best_score {
            best_score = score;
            best_x = x;
        }
    }

    let mut best_w = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for w in 0..n_w {
        let phi = exceed(best_x, w);
        let v = phi * (1.0 - phi);
        if v > best_v {
            best_v = v;
            best_w = w;
        }
    }
    (best_x, best_w)
}

/// The threshold shift margin: η = 0.5·min{10⁻⁸ c/2, 10⁻¹⁶·0.05·c/(8|X×Ω|)}.
pub fn bpt_eta(c: f64, grid_size: usize) -> f64 {
    0.5 * (1e-8 * c / 2.0).min(1e-16 * 0.05 * c / (8.0 * grid_size as f64))
}

/// Trade-off flavor of the optimistic-only bounding-box rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbbVariant {
    Theory,
    Fixed,
}

/// β_t for the bounding-box baseline: the theory value grows with
/// 2·log(|X×Ω| π² t² / (6·0.05)); the fixed variant uses β = 9.
pub fn bbbmobo_beta(grid_size: usize, t: usize, variant: BbbVariant) -> f64 {
    match variant {
        BbbVariant::Theory => {
            (grid_size as f64 * std::f64::consts::PI.powi(2) * (t * t) as f64 / (6.0 * 0.05))
                .ln()
                * 2.0
        }
        BbbVariant::Fixed => 9.0,
    }
}

/// The bounding-box rule always takes the optimistic maximum x̃.
pub fn select_bbbmobo(field: &CredibleField) -> usize {
    optimistic_argmax(field)
}
