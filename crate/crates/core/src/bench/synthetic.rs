//! The synthetic benchmark functions and their environment distributions.

use std::sync::Arc;

use ndarray::Array2;

use super::{lattice, uniform_axis, TabulatedOracle};
use crate::error::{CoreError, Result};
use crate::gp::{sample_prior, KernelSpec};
use crate::grid::{CoordMode, ProblemGrid};
use crate::measures::EnvDist;
use crate::rng::stream_rng;

/// Which benchmark problem a preset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkProblem {
    Syn2d,
    Syn4d,
    Syn6d,
    Carrier,
}

/// Surrogate kernel for the 2D problem: exp(−‖θ − θ'‖²/2).
pub fn syn2d_kernel() -> KernelSpec {
    KernelSpec::se_with_denominator(2.0, 1.0)
}

/// Surrogate kernel for the 4D problem: exp(−‖θ − θ'‖²/10).
pub fn syn4d_kernel() -> KernelSpec {
    KernelSpec::se_with_denominator(10.0, 1.0)
}

/// Surrogate kernel for the 6D problem: a sum of four squared-exponential
/// pieces on overlapping coordinate groups of (x1,x2,x3,w1,w2,w3).
pub fn syn6d_kernel() -> KernelSpec {
    KernelSpec::Sum(vec![
        (KernelSpec::se_with_denominator(1.75, 1.25), vec![0, 1, 2]),
        (KernelSpec::se_with_denominator(1.75, 0.75), vec![1, 2, 3]),
        (KernelSpec::se_with_denominator(2.0, 1.0), vec![2, 3, 4]),
        (KernelSpec::se_with_denominator(1.5, 1.0), vec![3, 4, 5]),
    ])
}

/// Kernel each 6D component path is drawn from: exp(−‖θ − θ'‖²/1.75) on 3D.
pub fn syn6d_component_kernel() -> KernelSpec {
    KernelSpec::se_with_denominator(1.75, 1.0)
}

/// Surrogate kernel for the carrier-lifetime problem: a Matérn-3/2 kernel
/// with lengthscale 25 and variance 4 on the shifted location x + w.
pub fn carrier_kernel() -> KernelSpec {
    KernelSpec::Matern32 { lengthscale: 25.0, variance: 4.0 }
}

/// Draws one GP prior path over the whole joint grid and tabulates it.
/// Observation noise variance is 1e-6.
pub fn synthetic_2d(grid: &Arc<ProblemGrid>, seed: u64) -> Result<TabulatedOracle> {
    if grid.joint_dim() != 2 || grid.mode() != CoordMode::Concat {
        return Err(CoreError::InvalidArgument(
            "the 2D synthetic problem needs a 1+1 dimensional joint grid".into(),
        ));
    }
    let points: Vec<Vec<f64>> = (0..grid.n_x())
        .flat_map(|x| (0..grid.n_w()).map(move |w| grid.joint_coords(x, w)))
        .collect();
    let mut rng = stream_rng(seed, &[0x2d]);
    let path = sample_prior(&syn2d_kernel(), &points, 1, &mut rng)?;
    let values = Array2::from_shape_vec((grid.n_x(), grid.n_w()), path.into_iter().next().unwrap())
        .expect("table shape");
    TabulatedOracle::new(values, 1e-6)
}

/// Himmelblau's function, negated, shifted and scaled so its maxima sit
/// near 1.83: (−[(a²+b−11)² + (a+b²−7)²] + 104.8905) / √3281.531.
pub fn himmelblau_normalized(a: f64, b: f64) -> f64 {
    let p = a * a + b - 11.0;
    let q = a + b * b - 7.0;
    (-(p * p + q * q) + 104.8905) / 3281.531_f64.sqrt()
}

/// The deterministic 4D problem f(x1,x2,w1,w2) = f_H(x1+w1, x2+0.5·w2).
pub fn himmelblau_oracle(grid: &ProblemGrid) -> Result<TabulatedOracle> {
    if grid.joint_dim() != 4 || grid.mode() != CoordMode::Concat {
        return Err(CoreError::InvalidArgument(
            "the 4D synthetic problem needs a 2+2 dimensional joint grid".into(),
        ));
    }
    let mut values = Array2::zeros((grid.n_x(), grid.n_w()));
    for x in 0..grid.n_x() {
        let xc = grid.x_coord(x);
        for w in 0..grid.n_w() {
            let wc = grid.w_coord(w);
            values[[x, w]] = himmelblau_normalized(xc[0] + wc[0], xc[1] + 0.5 * wc[1]);
        }
    }
    TabulatedOracle::new(values, 1e-6)
}

/// The 6D problem: the sum of four independent GP paths wired as
/// f1(x1,x2,x3) + f2(x2,x3,w1) + f3(x3,w1,w2) + f4(w1,w2,w3), each drawn on
/// the shared 3D axis lattice.
pub fn synthetic_6d(grid: &ProblemGrid, seed: u64) -> Result<TabulatedOracle> {
    if grid.joint_dim() != 6 || grid.mode() != CoordMode::Concat {
        return Err(CoreError::InvalidArgument(
            "the 6D synthetic problem needs a 3+3 dimensional joint grid".into(),
        ));
    }
    // Recover the shared axis from the design coordinates.
    let mut axis: Vec<f64> = Vec::new();
    for x in 0..grid.n_x() {
        axis.extend_from_slice(grid.x_coord(x));
    }
    axis.sort_by(f64::total_cmp);
    axis.dedup();
    let s = axis.len();
    if s * s * s != grid.n_x() {
        return Err(CoreError::DataError(format!(
            "design side is not a cubic lattice: {} points on a {s}-value axis",
            grid.n_x()
        )));
    }
    let points = lattice(&axis, 3);
    let kernel = syn6d_component_kernel();
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(4);
    for part in 0..4u64 {
        let mut rng = stream_rng(seed, &[0x6d, part]);
        components.push(
            sample_prior(&kernel, &points, 1, &mut rng)?
                .into_iter()
                .next()
                .unwrap(),
        );
    }
    let axis_index = |v: f64| -> Result<usize> {
        axis.binary_search_by(|a| a.total_cmp(&v)).map_err(|_| {
            CoreError::DataError(format!("coordinate {v} is not on the shared axis"))
        })
    };
    let idx3 = |a: usize, b: usize, c: usize| (a * s + b) * s + c;
    let mut values = Array2::zeros((grid.n_x(), grid.n_w()));
    for x in 0..grid.n_x() {
        let xc = grid.x_coord(x);
        let (x1, x2, x3) = (axis_index(xc[0])?, axis_index(xc[1])?, axis_index(xc[2])?);
        for w in 0..grid.n_w() {
            let wc = grid.w_coord(w);
            let (w1, w2, w3) =
                (axis_index(wc[0])?, axis_index(wc[1])?, axis_index(wc[2])?);
            values[[x, w]] = components[0][idx3(x1, x2, x3)]
                + components[1][idx3(x2, x3, w1)]
                + components[2][idx3(x3, w1, w2)]
                + components[3][idx3(w1, w2, w3)];
        }
    }
    TabulatedOracle::new(values, 1e-6)
}

fn std_normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Normalizes weights into a pmf with a compensated sum.
fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let mut total = 0.0;
    let mut comp = 0.0;
    for &w in &weights {
        let t = total + w;
        comp += if total.abs() >= w.abs() {
            (total - t) + w
        } else {
            (w - t) + total
        };
        total = t;
    }
    let z = total + comp;
    weights.into_iter().map(|w| w / z).collect()
}

/// The environment distribution of each benchmark problem.
pub fn benchmark_pmf(problem: BenchmarkProblem) -> Result<EnvDist> {
    match problem {
        BenchmarkProblem::Syn2d => Ok(EnvDist::uniform(50)),
        BenchmarkProblem::Carrier => Ok(EnvDist::uniform(99)),
        BenchmarkProblem::Syn4d => {
            // Per-axis mixture 0.25·φ(a−1) + 0.75·φ(a+5) normalized over the
            // 15-point axis, taken as a product over (w1, w2).
            let axis = uniform_axis(2.5, 15);
            let marginal = normalized(
                axis.iter()
                    .map(|&a| 0.25 * std_normal_density(a - 1.0) + 0.75 * std_normal_density(a + 5.0))
                    .collect(),
            );
            let mut pmf = Vec::with_capacity(225);
            for &p1 in &marginal {
                for &p2 in &marginal {
                    pmf.push(p1 * p2);
                }
            }
            EnvDist::new(normalized(pmf))
        }
        BenchmarkProblem::Syn6d => {
            // Product of three normal marginals centered at 1, 0 and −1 on
            // the 7-point axis.
            let axis = uniform_axis(2.0, 7);
            let centers = [1.0, 0.0, -1.0];
            let marginals: Vec<Vec<f64>> = centers
                .iter()
                .map(|&c| {
                    normalized(axis.iter().map(|&b| std_normal_density(b - c)).collect())
                })
                .collect();
            let mut pmf = Vec::with_capacity(343);
            for &p1 in &marginals[0] {
                for &p2 in &marginals[1] {
                    for &p3 in &marginals[2] {
                        pmf.push(p1 * p2 * p3);
                    }
                }
            }
            EnvDist::new(normalized(pmf))
        }
    }
}
