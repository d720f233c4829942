//! Robustness measures on finite environment sets.
//!
//! A robustness measure maps a function of the environmental variable,
//! represented here as a row of values over Ω, to a scalar. The module also
//! provides guaranteed lower/upper bounds on the measure given pointwise
//! bounds on the function ([`bounds_exact`]), a sampling-based fallback
//! ([`bounds_sampled`]) and the measure-specific width functions q(a)
//! ([`q_value`]).

mod bounds;
mod width;

pub use bounds::{bounds_exact, bounds_sampled, BoundPair};
pub use width::{has_width_function, q_value};

use std::fmt;
use std::sync::Arc;

use crate::error::{CoreError, Result};

/// A probability mass function over the finite environment set Ω.
#[derive(Debug, Clone)]
pub struct EnvDist {
    pmf: Vec<f64>,
    p_min_positive: f64,
}

impl EnvDist {
    /// Builds a distribution from raw masses. The masses must be finite,
    /// non-negative and sum to 1 within 1e-12.
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(CoreError::InvalidArgument("empty pmf".into()));
        }
        if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(CoreError::InvalidArgument(
                "pmf entries must be finite and non-negative".into(),
            ));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(CoreError::InvalidArgument(format!(
                "pmf sums to {total}, expected 1 within 1e-12"
            )));
        }
        let p_min_positive = pmf
            .iter()
            .copied()
            .filter(|p| *p > 0.0)
            .fold(f64::INFINITY, f64::min);
        Ok(Self { pmf, p_min_positive })
    }

    /// Uniform distribution over `n` atoms.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs at least one atom");
        Self {
            pmf: vec![1.0 / n as f64; n],
            p_min_positive: 1.0 / n as f64,
        }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    /// Smallest strictly positive mass.
    pub fn p_min_positive(&self) -> f64 {
        self.p_min_positive
    }

    /// True when every atom has strictly positive mass; required by the
    /// uncontrollable-setting regret bounds.
    pub fn fully_supported(&self) -> bool {
        self.pmf.iter().all(|p| *p > 0.0)
    }

    /// Weighted average of `values` under this pmf.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.pmf.len());
        self.pmf
            .iter()
            .zip(values)
            .map(|(p, v)| p * v)
            .sum()
    }
}

/// A monotone scalar map with a declared Lipschitz constant, used by the
/// monotone-Lipschitz measure composition.
#[derive(Clone)]
pub struct ScalarMap(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl ScalarMap {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self(Arc::new(f))
    }

    /// The map v ↦ −v (monotone decreasing, Lipschitz constant 1).
    pub fn negate() -> Self {
        Self::new(|v| -v)
    }

    pub fn apply(&self, v: f64) -> f64 {
        (self.0)(v)
    }
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarMap(..)")
    }
}

/// A robustness measure specification.
#[derive(Debug, Clone)]
pub enum MeasureSpec {
    /// E\[g(w)]
    Expectation,
    /// inf_w g(w)
    WorstCase,
    /// sup_w g(w)
    BestCase,
    /// α-quantile: inf { b | P(g ≤ b) ≥ α }
    ValueAtRisk { alpha: f64 },
    /// (1/α) ∫_0^α quantile(α') dα'
    Cvar { alpha: f64 },
    /// E\[ |g − E\[g]| ]
    MeanAbsDev,
    /// sqrt(E\[(g − E\[g])²])
    StdDev,
    /// E\[(g − E\[g])²]
    Variance,
    /// inf over candidate distributions of the inner measure
    DistRobust {
        candidates: Vec<EnvDist>,
        inner: Box<MeasureSpec>,
    },
    /// map(inner), with `lipschitz` the declared constant of `map`
    MonotoneLipschitz {
        map: ScalarMap,
        lipschitz: f64,
        increasing: bool,
        inner: Box<MeasureSpec>,
    },
    /// w1·m1 + w2·m2 with non-negative weights
    WeightedSum {
        weight_a: f64,
        measure_a: Box<MeasureSpec>,
        weight_b: f64,
        measure_b: Box<MeasureSpec>,
    },
    /// P(g ≥ threshold)
    ProbThreshold { threshold: f64 },
}

impl MeasureSpec {
    /// Convenience constructor for the expectation-minus-scaled-MAD measure
    /// used in the experiment presets: E\[g] − α·E\[|g − E\[g]|], built as a
    /// weighted sum of the expectation and a negated mean absolute deviation.
    pub fn exp_minus_mad(alpha: f64) -> Self {
        MeasureSpec::WeightedSum {
            weight_a: 1.0,
            measure_a: Box::new(MeasureSpec::Expectation),
            weight_b: alpha,
            measure_b: Box::new(MeasureSpec::MonotoneLipschitz {
                map: ScalarMap::negate(),
                lipschitz: 1.0,
                increasing: false,
                inner: Box::new(MeasureSpec::MeanAbsDev),
            }),
        }
    }

    /// Validates parameter ranges and, when `n_omega` is given, that every
    /// embedded candidate distribution matches the environment size.
    pub fn validate(&self, n_omega: Option<usize>) -> Result<()> {
        match self {
            MeasureSpec::Expectation
            | MeasureSpec::WorstCase
            | MeasureSpec::BestCase
            | MeasureSpec::MeanAbsDev
            | MeasureSpec::StdDev
            | MeasureSpec::Variance => Ok(()),
            MeasureSpec::ValueAtRisk { alpha } | MeasureSpec::Cvar { alpha } => {
                if *alpha > 0.0 && *alpha < 1.0 {
                    Ok(())
                } else {
                    Err(CoreError::InvalidArgument(format!(
                        "quantile level must lie in (0,1), got {alpha}"
                    )))
                }
            }
            MeasureSpec::DistRobust { candidates, inner } => {
                if candidates.is_empty() {
                    return Err(CoreError::InvalidArgument(
                        "distributionally robust measure needs at least one candidate".into(),
                    ));
                }
                if let Some(n) = n_omega {
                    for c in candidates {
                        if c.len() != n {
                            return Err(CoreError::InvalidArgument(format!(
                                "candidate pmf has {} atoms, environment has {n}",
                                c.len()
                            )));
                        }
                    }
                }
                inner.validate(n_omega)
            }
            MeasureSpec::MonotoneLipschitz { lipschitz, inner, .. } => {
                if !(*lipschitz > 0.0 && lipschitz.is_finite()) {
                    return Err(CoreError::InvalidArgument(format!(
                        "Lipschitz constant must be positive and finite, got {lipschitz}"
                    )));
                }
                inner.validate(n_omega)
            }
            MeasureSpec::WeightedSum {
                weight_a,
                measure_a,
                weight_b,
                measure_b,
            } => {
                if *weight_a < 0.0 || *weight_b < 0.0 {
                    return Err(CoreError::InvalidArgument(
                        "weighted-sum weights must be non-negative".into(),
                    ));
                }
                measure_a.validate(n_omega)?;
                measure_b.validate(n_omega)
            }
            MeasureSpec::ProbThreshold { threshold } => {
                if threshold.is_finite() {
                    Ok(())
                } else {
                    Err(CoreError::InvalidArgument("threshold must be finite".into()))
                }
            }
        }
    }

    /// Evaluates the measure on a row of function values over Ω.
    pub fn eval(&self, g_row: &[f64], dist: &EnvDist) -> Result<f64> {
        if g_row.len() != dist.len() {
            return Err(CoreError::InvalidArgument(format!(
                "row has {} entries, environment has {}",
                g_row.len(),
                dist.len()
            )));
        }
        if g_row.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidArgument(
                "row contains a non-finite value".into(),
            ));
        }
        Ok(self.eval_unchecked(g_row, dist))
    }

    pub(crate) fn eval_unchecked(&self, g_row: &[f64], dist: &EnvDist) -> f64 {
        match self {
            MeasureSpec::Expectation => dist.expectation(g_row),
            MeasureSpec::WorstCase => g_row.iter().copied().fold(f64::INFINITY, f64::min),
            MeasureSpec::BestCase => g_row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            MeasureSpec::ValueAtRisk { alpha } => weighted_quantile(g_row, dist, *alpha),
            MeasureSpec::Cvar { alpha } => cvar_from_quantiles(g_row, dist, *alpha),
            MeasureSpec::MeanAbsDev => {
                let m = dist.expectation(g_row);
                g_row
                    .iter()
                    .zip(dist.pmf())
                    .map(|(g, p)| p * (g - m).abs())
                    .sum()
            }
            MeasureSpec::StdDev => {
                let m = dist.expectation(g_row);
                let var: f64 = g_row
                    .iter()
                    .zip(dist.pmf())
                    .map(|(g, p)| p * (g - m) * (g - m))
                    .sum();
                var.max(0.0).sqrt()
            }
            MeasureSpec::Variance => {
                let m = dist.expectation(g_row);
                g_row
                    .iter()
                    .zip(dist.pmf())
                    .map(|(g, p)| p * (g - m) * (g - m))
                    .sum()
            }
            MeasureSpec::DistRobust { candidates, inner } => candidates
                .iter()
                .map(|c| inner.eval_unchecked(g_row, c))
                .fold(f64::INFINITY, f64::min),
            MeasureSpec::MonotoneLipschitz { map, inner, .. } => {
                map.apply(inner.eval_unchecked(g_row, dist))
            }
            MeasureSpec::WeightedSum {
                weight_a,
                measure_a,
                weight_b,
                measure_b,
            } => {
                weight_a * measure_a.eval_unchecked(g_row, dist)
                    + weight_b * measure_b.eval_unchecked(g_row, dist)
            }
            MeasureSpec::ProbThreshold { threshold } => g_row
                .iter()
                .zip(dist.pmf())
                .filter(|(g, _)| **g >= *threshold)
                .map(|(_, p)| p)
                .sum(),
        }
    }
}

/// The α-quantile of `values` under `dist`: the smallest value whose
/// cumulative mass reaches α. A cumulative mass exactly equal to α selects
/// that atom (the infimum definition).
///
/// Requires α ∈ (0,1); this is a contract on the caller, matching the
/// validated quantile levels in [`MeasureSpec`].
pub fn weighted_quantile(values: &[f64], dist: &EnvDist, alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "quantile level must lie in (0,1)");
    debug_assert_eq!(values.len(), dist.len());
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut cum = 0.0;
    for &i in &order {
        cum += dist.pmf()[i];
        if cum >= alpha {
            return values[i];
        }
    }
    // Only reachable through accumulated rounding; fall back to the maximum.
    values[*order.last().expect("non-empty row")]
}

/// Exact integral (1/α)∫_0^α quantile(α') dα' for the step quantile function
/// of a discrete distribution: masses are accumulated in value order and the
/// atom straddling α contributes proportionally.
fn cvar_from_quantiles(values: &[f64], dist: &EnvDist, alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut remaining = alpha;
    let mut acc = 0.0;
    for &i in &order {
        let take = dist.pmf()[i].min(remaining);
        acc += take * values[i];
        remaining -= take;
        if remaining <= 0.0 {
            break;
        }
    }
    acc / alpha
}
