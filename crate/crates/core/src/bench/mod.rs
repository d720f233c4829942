//! Benchmark problem construction: lattice grids, the 2D/4D/6D synthetic
//! black-box functions with their environment distributions, the tabulated
//! carrier-lifetime problem, and ground-truth optimum computation.

mod carrier;
mod synthetic;

pub use carrier::{load_carrier_lifetime, write_carrier_standin, CarrierProblem};
pub use synthetic::{
    carrier_kernel, himmelblau_normalized, himmelblau_oracle, benchmark_pmf, syn2d_kernel,
    syn4d_kernel, syn6d_component_kernel, syn6d_kernel, synthetic_2d, synthetic_6d, BenchmarkProblem,
};

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};
use crate::grid::{CoordMode, ProblemGrid};
use crate::measures::{EnvDist, MeasureSpec};

/// A fully tabulated black-box function over a grid, queried with optional
/// Gaussian observation noise. The table itself is immutable; noise is
/// injected only in [`TabulatedOracle::query`].
#[derive(Debug, Clone)]
pub struct TabulatedOracle {
    values: Array2<f64>,
    noise_var: f64,
}

impl TabulatedOracle {
    pub fn new(values: Array2<f64>, noise_var: f64) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidArgument(
                "oracle table contains a non-finite value".into(),
            ));
        }
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "noise variance must be non-negative, got {noise_var}"
            )));
        }
        Ok(Self { values, noise_var })
    }

    /// The exact table entry, no noise.
    pub fn truth(&self, x: usize, w: usize) -> f64 {
        self.values[[x, w]]
    }

    /// A noisy observation y = f(x, w) + ε with ε ~ N(0, noise_var).
    pub fn query<R: Rng + ?Sized>(&self, x: usize, w: usize, rng: &mut R) -> f64 {
        let v = self.values[[x, w]];
        if self.noise_var > 0.0 {
            v + self.noise_var.sqrt() * rng.sample::<f64, _>(StandardNormal)
        } else {
            v
        }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn n_x(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_w(&self) -> usize {
        self.values.ncols()
    }
}

/// Uniform lattice of `dims`-vectors over the given axis, enumerated with
/// the last coordinate varying fastest.
pub(crate) fn lattice(axis: &[f64], dims: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..dims {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// The `s`-point uniform axis on [−m, m].
pub(crate) fn uniform_axis(m: f64, s: usize) -> Vec<f64> {
    (0..s)
        .map(|i| -m + 2.0 * m * i as f64 / (s - 1) as f64)
        .collect()
}

/// Builds the joint lattice grid of total dimension `d` (half design, half
/// environment), each coordinate discretized into `s` uniform points on
/// [−m, m]. The environment distribution starts uniform.
pub fn gen_grid(m: f64, d: usize, s: usize) -> Result<ProblemGrid> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(CoreError::InvalidArgument(format!(
            "half-width must be positive and finite, got {m}"
        )));
    }
    if d < 2 || !d.is_multiple_of(2) {
        return Err(CoreError::InvalidArgument(format!(
            "total dimension must be even and at least 2, got {d}"
        )));
    }
    if s < 2 {
        return Err(CoreError::InvalidArgument(format!(
            "need at least 2 grid points per axis, got {s}"
        )));
    }
    let axis = uniform_axis(m, s);
    let side = lattice(&axis, d / 2);
    let n_w = side.len();
    ProblemGrid::new(side.clone(), side, EnvDist::uniform(n_w), CoordMode::Concat)
}

/// The true optimum of the tabulated problem under the measure: exhaustive
/// evaluation per design, lowest-index tie-break.
#[derive(Debug, Clone)]
pub struct Truth {
    pub x_star: usize,
    pub f_star: f64,
    pub f_values: Vec<f64>,
}

pub fn true_optimum(
    oracle: &TabulatedOracle,
    spec: &MeasureSpec,
    dist: &EnvDist,
) -> Result<Truth> {
    let mut f_values = Vec::with_capacity(oracle.n_x());
    for x in 0..oracle.n_x() {
        let row = oracle.values().row(x);
        let row = row.as_slice().expect("tables are stored row-major");
        f_values.push(spec.eval(row, dist)?);
    }
    let mut x_star = 0usize;
    for (x, v) in f_values.iter().enumerate() {
        if *v > f_values[x_star] {
            x_star = x;
        }
    }
    Ok(Truth {
        x_star,
        f_star: f_values[x_star],
        f_values,
    })
}
