//! Exact GP regression on a fixed finite grid.
//!
//! The posterior caches, for every grid point θ, the forward-solved kernel
//! column v(θ) = L⁻¹ k_t(θ) where L is the growing Cholesky factor of
//! K_t + σ²_noise I. One observation extends L by a bordered row in O(t)
//! and refreshes the cached mean/variance fields in O(t·N); a conditioning
//! check falls back to full refactorization with a jitter ladder.

use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use super::chol::{cholesky_in_place, cholesky_with_ladder, JITTER_LADDER};
use super::kernel::KernelSpec;
use crate::error::{CoreError, Result};
use crate::grid::{JointPoint, ProblemGrid};

/// Gaussian-process posterior over a finite joint grid.
#[derive(Debug, Clone)]
pub struct GPosterior {
    kernel: KernelSpec,
    noise_var: f64,
    grid: Arc<ProblemGrid>,
    obs: Vec<(JointPoint, f64)>,
    /// Lower-triangular factor of K_t + (σ²_noise + jitter) I; row i holds
    /// i + 1 entries.
    chol: Vec<Vec<f64>>,
    /// Forward solve L⁻¹ y.
    z: Vec<f64>,
    /// Row i is L⁻¹ K(obs, grid) restricted to observation i; length N each.
    v_rows: Vec<Vec<f64>>,
    /// Cached posterior mean over the grid.
    mean: Vec<f64>,
    /// Cached posterior variance over the grid; kept raw, clamped on read.
    var: Vec<f64>,
    prior_diag: Vec<f64>,
    /// Flattened kernel coordinates of all grid points.
    coords: Vec<f64>,
    dim: usize,
    jitter: f64,
}

impl GPosterior {
    /// Empty posterior: zero mean, prior variance k(θ, θ) everywhere.
    pub fn new(kernel: KernelSpec, noise_var: f64, grid: Arc<ProblemGrid>) -> Result<Self> {
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "noise variance must be positive and finite, got {noise_var}"
            )));
        }
        let dim = grid.joint_dim();
        kernel.validate(dim)?;
        let n = grid.joint_size();
        let mut coords = Vec::with_capacity(n * dim);
        for x in 0..grid.n_x() {
            for w in 0..grid.n_w() {
                coords.extend(grid.joint_coords(x, w));
            }
        }
        let prior_diag = vec![kernel.diag(); n];
        Ok(Self {
            kernel,
            noise_var,
            grid,
            obs: Vec::new(),
            chol: Vec::new(),
            z: Vec::new(),
            v_rows: Vec::new(),
            mean: vec![0.0; n],
            var: prior_diag.clone(),
            prior_diag,
            coords,
            dim,
            jitter: 0.0,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn grid(&self) -> &Arc<ProblemGrid> {
        &self.grid
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn observations(&self) -> &[(JointPoint, f64)] {
        &self.obs
    }

    /// Jitter added by the most recent full refactorization (0 normally).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn grid_coords(&self, n: usize) -> &[f64] {
        &self.coords[n * self.dim..(n + 1) * self.dim]
    }

    /// Appends one observation. The Cholesky factor is extended by a
    /// bordered row; a failed conditioning check triggers refactorization.
    pub fn update(&mut self, x: usize, w: usize, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "observation must be finite, got {y}"
            )));
        }
        let point = self.grid.joint_point(x, w)?;
        let n = self.grid.flat_index(x, w);
        let raw_var = self.var[n];
        // Raw variance drifting visibly below zero means the incremental
        // factors lost accuracy; rebuild from scratch.
        if raw_var < -1e-9 * self.prior_diag[n].max(1.0) {
            self.obs.push((point, y));
            return self.refactor();
        }
        let t = self.obs.len();
        let ell_diag_sq = raw_var.max(0.0) + self.noise_var + self.jitter;
        let ell_diag = ell_diag_sq.sqrt();
        // The head of the bordered row is exactly the cached column of the
        // forward-solved kernel matrix at this grid point.
        let ell_head: Vec<f64> = (0..t).map(|i| self.v_rows[i][n]).collect();
        let dot_z: f64 = ell_head.iter().zip(&self.z).map(|(a, b)| a * b).sum();
        let z_new = (y - dot_z) / ell_diag;

        let total = self.grid.joint_size();
        let mut v_new = Vec::with_capacity(total);
        for m in 0..total {
            v_new.push(
                self.kernel
                    .eval_unchecked(&point.coords, self.grid_coords(m)),
            );
        }
        for (i, head) in ell_head.iter().enumerate() {
            let row = &self.v_rows[i];
            for m in 0..total {
                v_new[m] -= head * row[m];
            }
        }
        let inv = 1.0 / ell_diag;
        for ((v, mean), var) in v_new
            .iter_mut()
            .zip(self.mean.iter_mut())
            .zip(self.var.iter_mut())
        {
            *v *= inv;
            *mean += *v * z_new;
            *var -= *v * *v;
        }

        let mut row = ell_head;
        row.push(ell_diag);
        self.chol.push(row);
        self.z.push(z_new);
        self.v_rows.push(v_new);
        self.obs.push((point, y));
        Ok(())
    }

    /// Forces a clean rebuild of the factorization and cached fields.
    pub fn refactorize(&mut self) -> Result<()> {
        self.refactor()
    }

    /// Rebuilds the factorization and cached fields from the observation
    /// list, escalating jitter until the Cholesky succeeds.
    fn refactor(&mut self) -> Result<()> {
        let t = self.obs.len();
        let total = self.grid.joint_size();
        let mut base = vec![0.0; t * t];
        for i in 0..t {
            for j in 0..=i {
                let v = self
                    .kernel
                    .eval_unchecked(&self.obs[i].0.coords, &self.obs[j].0.coords);
                base[i * t + j] = v;
                base[j * t + i] = v;
            }
        }
        let scale = self.kernel.diag().max(1.0);
        let mut chosen = None;
        for &step in JITTER_LADDER.iter() {
            let jitter = step * scale;
            let mut work = base.clone();
            for i in 0..t {
                work[i * t + i] += self.noise_var + jitter;
            }
            if cholesky_in_place(&mut work, t, 0.0).is_ok() {
                chosen = Some((work, jitter));
                break;
            }
        }
        let (packed, jitter) = chosen.ok_or_else(|| {
            CoreError::NumericalFailure(format!(
                "posterior refactorization failed for {t} observations"
            ))
        })?;
        self.jitter = jitter;
        self.chol = (0..t)
            .map(|i| packed[i * t..i * t + i + 1].to_vec())
            .collect();

        self.z = vec![0.0; t];
        for i in 0..t {
            let mut s = self.obs[i].1;
            for j in 0..i {
                s -= self.chol[i][j] * self.z[j];
            }
            self.z[i] = s / self.chol[i][i];
        }

        self.v_rows = vec![vec![0.0; total]; t];
        for i in 0..t {
            let mut row: Vec<f64> = (0..total)
                .map(|m| {
                    self.kernel
                        .eval_unchecked(&self.obs[i].0.coords, self.grid_coords(m))
                })
                .collect();
            for j in 0..i {
                let prev = &self.v_rows[j];
                let c = self.chol[i][j];
                for (r, p) in row.iter_mut().zip(prev) {
                    *r -= c * p;
                }
            }
            let inv = 1.0 / self.chol[i][i];
            for v in row.iter_mut() {
                *v *= inv;
            }
            self.v_rows[i] = row;
        }

        self.mean = vec![0.0; total];
        self.var = self.prior_diag.clone();
        for i in 0..t {
            let zi = self.z[i];
            for ((v, mean), var) in self.v_rows[i]
                .iter()
                .zip(self.mean.iter_mut())
                .zip(self.var.iter_mut())
            {
                *mean += v * zi;
                *var -= v * v;
            }
        }
        Ok(())
    }

    /// Posterior mean at a grid point.
    pub fn mean_at(&self, x: usize, w: usize) -> f64 {
        self.mean[self.grid.flat_index(x, w)]
    }

    /// Posterior variance at a grid point, clamped at zero.
    pub fn var_at(&self, x: usize, w: usize) -> f64 {
        self.var[self.grid.flat_index(x, w)].max(0.0)
    }

    pub fn sd_at(&self, x: usize, w: usize) -> f64 {
        self.var_at(x, w).sqrt()
    }

    /// Posterior mean over one design row, ordered by environment index.
    pub fn mean_row(&self, x: usize) -> &[f64] {
        let nw = self.grid.n_w();
        &self.mean[x * nw..(x + 1) * nw]
    }

    /// Flat posterior mean field in grid enumeration order.
    pub fn mean_flat(&self) -> &[f64] {
        &self.mean
    }

    /// Flat clamped posterior variance field.
    pub fn var_flat(&self) -> Vec<f64> {
        self.var.iter().map(|v| v.max(0.0)).collect()
    }

    /// Posterior mean and standard deviation as |X|×|Ω| matrices.
    pub fn posterior_field(&self) -> (Array2<f64>, Array2<f64>) {
        let shape = (self.grid.n_x(), self.grid.n_w());
        let mean = Array2::from_shape_vec(shape, self.mean.clone()).expect("field shape");
        let sd = Array2::from_shape_vec(
            shape,
            self.var.iter().map(|v| v.max(0.0).sqrt()).collect(),
        )
        .expect("field shape");
        (mean, sd)
    }

    /// The solved vector (K_t + σ² I)⁻¹ y, reconstructed from the factor.
    pub fn alpha(&self) -> Vec<f64> {
        let t = self.obs.len();
        let mut a = self.z.clone();
        for i in (0..t).rev() {
            let mut s = a[i];
            for (j, row) in self.chol.iter().enumerate().skip(i + 1) {
                s -= row[i] * a[j];
            }
            a[i] = s / self.chol[i][i];
        }
        a
    }

    /// Lower-triangular factor rows (row i has i + 1 entries).
    pub fn chol_rows(&self) -> &[Vec<f64>] {
        &self.chol
    }

    /// Forward-solved kernel columns over the grid, one row per observation.
    pub(crate) fn v_rows(&self) -> &[Vec<f64>] {
        &self.v_rows
    }

    /// Realized information gain of the selected points:
    /// ½ log det(I + σ⁻²_noise K_t), evaluated from the stored factor.
    pub fn realized_info_gain(&self) -> f64 {
        let t = self.obs.len();
        if t == 0 {
            return 0.0;
        }
        let log_det: f64 = self.chol.iter().map(|row| row[row.len() - 1].ln()).sum();
        log_det - 0.5 * t as f64 * self.noise_var.ln()
    }

    /// Joint posterior draws over the whole grid, shaped |X|×|Ω|.
    pub fn sample_paths<R: Rng + ?Sized>(
        &self,
        n_paths: usize,
        rng: &mut R,
    ) -> Result<Vec<Array2<f64>>> {
        if n_paths == 0 {
            return Err(CoreError::InvalidArgument(
                "at least one sample path is required".into(),
            ));
        }
        let total = self.grid.joint_size();
        let points: Vec<usize> = (0..total).collect();
        let flat = self.sample_at_flat(&points, n_paths, rng)?;
        let shape = (self.grid.n_x(), self.grid.n_w());
        Ok(flat
            .into_iter()
            .map(|p| Array2::from_shape_vec(shape, p).expect("path shape"))
            .collect())
    }

    /// Joint posterior draws restricted to the given grid points; each path
    /// is aligned with `points`.
    pub fn sample_paths_at<R: Rng + ?Sized>(
        &self,
        points: &[(usize, usize)],
        n_paths: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>> {
        if n_paths == 0 || points.is_empty() {
            return Err(CoreError::InvalidArgument(
                "need at least one path and one point".into(),
            ));
        }
        let flat: Vec<usize> = points
            .iter()
            .map(|&(x, w)| {
                if x < self.grid.n_x() && w < self.grid.n_w() {
                    Ok(self.grid.flat_index(x, w))
                } else {
                    Err(CoreError::InvalidArgument(format!(
                        "sample point ({x}, {w}) out of range"
                    )))
                }
            })
            .collect::<Result<_>>()?;
        self.sample_at_flat(&flat, n_paths, rng)
    }

    fn sample_at_flat<R: Rng + ?Sized>(
        &self,
        points: &[usize],
        n_paths: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>> {
        let n = points.len();
        let mut cov = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..=a {
                let mut v = self
                    .kernel
                    .eval_unchecked(self.grid_coords(points[a]), self.grid_coords(points[b]));
                for row in &self.v_rows {
                    v -= row[points[a]] * row[points[b]];
                }
                cov[a * n + b] = v;
                cov[b * n + a] = v;
            }
        }
        let (chol, _) = cholesky_with_ladder(&cov, n, self.kernel.diag().max(1.0))?;
        let mut paths = Vec::with_capacity(n_paths);
        for _ in 0..n_paths {
            let noise: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let mut path = Vec::with_capacity(n);
            for i in 0..n {
                let mut s = self.mean[points[i]];
                for k in 0..=i {
                    s += chol[i * n + k] * noise[k];
                }
                path.push(s);
            }
            paths.push(path);
        }
        Ok(paths)
    }
}

/// Joint prior draws of a zero-mean GP at arbitrary coordinates.
pub fn sample_prior<R: Rng + ?Sized>(
    kernel: &KernelSpec,
    points: &[Vec<f64>],
    n_paths: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if points.is_empty() || n_paths == 0 {
        return Err(CoreError::InvalidArgument(
            "need at least one path and one point".into(),
        ));
    }
    let dim = points[0].len();
    kernel.validate(dim)?;
    if points.iter().any(|p| p.len() != dim) {
        return Err(CoreError::InvalidArgument(
            "inconsistent point dimensions".into(),
        ));
    }
    let n = points.len();
    let mut cov = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..=a {
            let v = kernel.eval_unchecked(&points[a], &points[b]);
            cov[a * n + b] = v;
            cov[b * n + a] = v;
        }
    }
    let (chol, _) = cholesky_with_ladder(&cov, n, kernel.diag().max(1.0))?;
    let mut paths = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        let noise: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut path = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..=i {
                s += chol[i * n + k] * noise[k];
            }
            path.push(s);
        }
        paths.push(path);
    }
    Ok(paths)
}
