//! Stationary covariance kernels on joint grid coordinates.

use crate::error::{CoreError, Result};

/// A positive-definite kernel built from squared-exponential and Matérn-3/2
/// pieces, optionally summed over coordinate projections of the joint input.
#[derive(Debug, Clone)]
pub enum KernelSpec {
    /// v · exp(−‖a − b‖² / (2ℓ²))
    SquaredExponential { lengthscale: f64, variance: f64 },
    /// v · (1 + √3 d/ℓ) · exp(−√3 d/ℓ) with d = ‖a − b‖
    Matern32 { lengthscale: f64, variance: f64 },
    /// Sum of kernels, each applied to the sub-vector selected by its
    /// ordered index list.
    Sum(Vec<(KernelSpec, Vec<usize>)>),
}

impl KernelSpec {
    /// Squared-exponential kernel written with an explicit exponent
    /// denominator: exp(−‖a − b‖² / c) scaled by `variance`.
    pub fn se_with_denominator(denominator: f64, variance: f64) -> Self {
        KernelSpec::SquaredExponential {
            lengthscale: (denominator / 2.0).sqrt(),
            variance,
        }
    }

    /// Checks parameter ranges and that projections fit an input of
    /// dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            KernelSpec::SquaredExponential { lengthscale, variance }
            | KernelSpec::Matern32 { lengthscale, variance } => {
                if !(*lengthscale > 0.0 && lengthscale.is_finite()) {
                    return Err(CoreError::InvalidArgument(format!(
                        "lengthscale must be positive and finite, got {lengthscale}"
                    )));
                }
                if !(*variance > 0.0 && variance.is_finite()) {
                    return Err(CoreError::InvalidArgument(format!(
                        "kernel variance must be positive and finite, got {variance}"
                    )));
                }
                Ok(())
            }
            KernelSpec::Sum(parts) => {
                if parts.is_empty() {
                    return Err(CoreError::InvalidArgument("empty kernel sum".into()));
                }
                for (inner, proj) in parts {
                    if proj.is_empty() {
                        return Err(CoreError::InvalidArgument(
                            "kernel projection must select at least one coordinate".into(),
                        ));
                    }
                    if let Some(&bad) = proj.iter().find(|&&i| i >= dim) {
                        return Err(CoreError::InvalidArgument(format!(
                            "kernel projection index {bad} out of range for dimension {dim}"
                        )));
                    }
                    inner.validate(proj.len())?;
                }
                Ok(())
            }
        }
    }

    /// Kernel value at zero distance; also the prior variance bound, since
    /// all pieces are stationary.
    pub fn diag(&self) -> f64 {
        match self {
            KernelSpec::SquaredExponential { variance, .. }
            | KernelSpec::Matern32 { variance, .. } => *variance,
            KernelSpec::Sum(parts) => parts.iter().map(|(k, _)| k.diag()).sum(),
        }
    }

    /// Evaluates k(a, b), checking dimensions.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(CoreError::InvalidArgument(format!(
                "kernel inputs have dimensions {} and {}",
                a.len(),
                b.len()
            )));
        }
        self.validate(a.len())?;
        Ok(self.eval_unchecked(a, b))
    }

    pub(crate) fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            KernelSpec::SquaredExponential { .. } | KernelSpec::Matern32 { .. } => {
                let d2: f64 = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                self.eval_sqdist(d2)
            }
            KernelSpec::Sum(parts) => {
                let mut total = 0.0;
                for (inner, proj) in parts {
                    match inner {
                        KernelSpec::Sum(_) => {
                            let pa: Vec<f64> = proj.iter().map(|&i| a[i]).collect();
                            let pb: Vec<f64> = proj.iter().map(|&i| b[i]).collect();
                            total += inner.eval_unchecked(&pa, &pb);
                        }
                        _ => {
                            let d2: f64 = proj
                                .iter()
                                .map(|&i| (a[i] - b[i]) * (a[i] - b[i]))
                                .sum();
                            total += inner.eval_sqdist(d2);
                        }
                    }
                }
                total
            }
        }
    }

    /// Stationary value from a squared distance; leaf kernels only.
    fn eval_sqdist(&self, d2: f64) -> f64 {
        match self {
            KernelSpec::SquaredExponential { lengthscale, variance } => {
                variance * (-d2 / (2.0 * lengthscale * lengthscale)).exp()
            }
            KernelSpec::Matern32 { lengthscale, variance } => {
                let r = 3.0_f64.sqrt() * d2.sqrt() / lengthscale;
                variance * (1.0 + r) * (-r).exp()
            }
            KernelSpec::Sum(_) => unreachable!("sum kernels carry no single distance"),
        }
    }
}
