//! Finite design/environment grids and joint-point indexing.

use crate::error::{CoreError, Result};
use crate::measures::EnvDist;

/// How the kernel coordinates of a joint point are formed from the design
/// and environment coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordMode {
    /// Concatenation (x..., w...).
    Concat,
    /// Elementwise sum x + w; requires matching dimensions. Used when the
    /// black-box is a function of the shifted location only.
    PairwiseSum,
}

/// One point of the joint grid X × Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPoint {
    pub x: usize,
    pub w: usize,
    /// Kernel coordinates of the point, according to the grid's [`CoordMode`].
    pub coords: Vec<f64>,
}

/// A finite optimization problem domain: the design set X, the environment
/// set Ω and the environment distribution. Joint points are enumerated
/// row-major with the design index outer: n = x·|Ω| + w.
#[derive(Debug, Clone)]
pub struct ProblemGrid {
    x_coords: Vec<Vec<f64>>,
    w_coords: Vec<Vec<f64>>,
    dist: EnvDist,
    mode: CoordMode,
}

impl ProblemGrid {
    pub fn new(
        x_coords: Vec<Vec<f64>>,
        w_coords: Vec<Vec<f64>>,
        dist: EnvDist,
        mode: CoordMode,
    ) -> Result<Self> {
        if x_coords.is_empty() || w_coords.is_empty() {
            return Err(CoreError::InvalidArgument(
                "design and environment sets must be non-empty".into(),
            ));
        }
        let dx = x_coords[0].len();
        let dw = w_coords[0].len();
        if x_coords.iter().any(|c| c.len() != dx) || w_coords.iter().any(|c| c.len() != dw) {
            return Err(CoreError::InvalidArgument(
                "inconsistent coordinate dimensions".into(),
            ));
        }
        if x_coords
            .iter()
            .chain(&w_coords)
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(CoreError::InvalidArgument(
                "grid coordinates must be finite".into(),
            ));
        }
        if mode == CoordMode::PairwiseSum && dx != dw {
            return Err(CoreError::InvalidArgument(format!(
                "pairwise-sum coordinates need matching dimensions, got {dx} and {dw}"
            )));
        }
        if dist.len() != w_coords.len() {
            return Err(CoreError::InvalidArgument(format!(
                "pmf has {} atoms, environment has {}",
                dist.len(),
                w_coords.len()
            )));
        }
        Ok(Self {
            x_coords,
            w_coords,
            dist,
            mode,
        })
    }

    /// Replaces the environment distribution, keeping the geometry.
    pub fn with_dist(mut self, dist: EnvDist) -> Result<Self> {
        if dist.len() != self.w_coords.len() {
            return Err(CoreError::InvalidArgument(format!(
                "pmf has {} atoms, environment has {}",
                dist.len(),
                self.w_coords.len()
            )));
        }
        self.dist = dist;
        Ok(self)
    }

    pub fn n_x(&self) -> usize {
        self.x_coords.len()
    }

    pub fn n_w(&self) -> usize {
        self.w_coords.len()
    }

    /// |X × Ω|.
    pub fn joint_size(&self) -> usize {
        self.x_coords.len() * self.w_coords.len()
    }

    pub fn x_coord(&self, x: usize) -> &[f64] {
        &self.x_coords[x]
    }

    pub fn w_coord(&self, w: usize) -> &[f64] {
        &self.w_coords[w]
    }

    pub fn dist(&self) -> &EnvDist {
        &self.dist
    }

    pub fn mode(&self) -> CoordMode {
        self.mode
    }

    /// Dimension of the kernel coordinates of a joint point.
    pub fn joint_dim(&self) -> usize {
        match self.mode {
            CoordMode::Concat => self.x_coords[0].len() + self.w_coords[0].len(),
            CoordMode::PairwiseSum => self.x_coords[0].len(),
        }
    }

    /// Flat enumeration index of (x, w).
    pub fn flat_index(&self, x: usize, w: usize) -> usize {
        debug_assert!(x < self.n_x() && w < self.n_w());
        x * self.n_w() + w
    }

    /// Inverse of [`Self::flat_index`].
    pub fn unflatten(&self, n: usize) -> (usize, usize) {
        debug_assert!(n < self.joint_size());
        (n / self.n_w(), n % self.n_w())
    }

    /// Kernel coordinates of the joint point (x, w).
    pub fn joint_coords(&self, x: usize, w: usize) -> Vec<f64> {
        let xc = &self.x_coords[x];
        let wc = &self.w_coords[w];
        match self.mode {
            CoordMode::Concat => xc.iter().chain(wc).copied().collect(),
            CoordMode::PairwiseSum => xc.iter().zip(wc).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn joint_point(&self, x: usize, w: usize) -> Result<JointPoint> {
        if x >= self.n_x() || w >= self.n_w() {
            return Err(CoreError::InvalidArgument(format!(
                "joint index ({x}, {w}) out of range for {}×{} grid",
                self.n_x(),
                self.n_w()
            )));
        }
        Ok(JointPoint {
            x,
            w,
            coords: self.joint_coords(x, w),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> ProblemGrid {
        ProblemGrid::new(
            vec![vec![0.0], vec![1.0]],
            vec![vec![10.0], vec![11.0], vec![12.0]],
            EnvDist::uniform(3),
            CoordMode::Concat,
        )
        .unwrap()
    }

    #[test]
    fn enumeration_is_row_major() {
        let g = small_grid();
        assert_eq!(g.joint_size(), 6);
        assert_eq!(g.flat_index(1, 2), 5);
        assert_eq!(g.unflatten(5), (1, 2));
        for n in 0..g.joint_size() {
            let (x, w) = g.unflatten(n);
            assert_eq!(g.flat_index(x, w), n);
        }
    }

    #[test]
    fn concat_and_sum_coords() {
        let g = small_grid();
        assert_eq!(g.joint_coords(1, 0), vec![1.0, 10.0]);
        let s = ProblemGrid::new(
            vec![vec![1.0, 2.0]],
            vec![vec![10.0, 20.0]],
            EnvDist::uniform(1),
            CoordMode::PairwiseSum,
        )
        .unwrap();
        assert_eq!(s.joint_coords(0, 0), vec![11.0, 22.0]);
        assert_eq!(s.joint_dim(), 2);
    }

    #[test]
    fn mismatched_pmf_rejected() {
        let g = small_grid();
        assert!(g.with_dist(EnvDist::uniform(2)).is_err());
    }

    #[test]
    fn out_of_range_point_rejected() {
        let g = small_grid();
        assert!(g.joint_point(2, 0).is_err());
        assert!(g.joint_point(0, 3).is_err());
    }
}
