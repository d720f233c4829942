//! Measure-specific width functions q(a).
//!
//! q bounds the credible-interval width of the measure by the widest
//! pointwise interval: ucb(x) − lcb(x) ≤ q(2 β^{1/2} max_w σ(x, w)). The
//! standard deviation, variance and probability-threshold measures have no
//! known q and report [`CoreError::NoWidthFunction`].

use super::MeasureSpec;
use crate::error::{CoreError, Result};

/// Evaluates q(a) for the measure, a ≥ 0.
pub fn q_value(spec: &MeasureSpec, a: f64) -> Result<f64> {
    if a.is_nan() || a < 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "width argument must be non-negative, got {a}"
        )));
    }
    match spec {
        MeasureSpec::Expectation
        | MeasureSpec::WorstCase
        | MeasureSpec::BestCase
        | MeasureSpec::ValueAtRisk { .. }
        | MeasureSpec::Cvar { .. } => Ok(a),
        MeasureSpec::MeanAbsDev => Ok(2.0 * a),
        MeasureSpec::MonotoneLipschitz { lipschitz, inner, .. } => {
            Ok(lipschitz * q_value(inner, a)?)
        }
        MeasureSpec::WeightedSum {
            weight_a,
            measure_a,
            weight_b,
            measure_b,
        } => Ok(weight_a * q_value(measure_a, a)? + weight_b * q_value(measure_b, a)?),
        // All candidates share the inner measure, so its q applies.
        MeasureSpec::DistRobust { inner, .. } => q_value(inner, a),
        MeasureSpec::StdDev => Err(CoreError::NoWidthFunction("standard deviation".into())),
        MeasureSpec::Variance => Err(CoreError::NoWidthFunction("variance".into())),
        MeasureSpec::ProbThreshold { .. } => {
            Err(CoreError::NoWidthFunction("probability threshold".into()))
        }
    }
}

/// True when [`q_value`] is defined for the measure.
pub fn has_width_function(spec: &MeasureSpec) -> bool {
    q_value(spec, 0.0).is_ok()
}
