//! Guaranteed bounds on robustness measures from pointwise function bounds.
//!
//! Given l(w) ≤ g(w) ≤ u(w) for every w, [`bounds_exact`] returns a pair
//! (lcb, ucb) with lcb ≤ ρ(g) ≤ ucb for every such g. For the monotone
//! measures (expectation, worst/best case, value-at-risk, CVaR, probability
//! threshold) the bounds are tight: they equal ρ(l) and ρ(u).

use ndarray::Array2;

use super::{EnvDist, MeasureSpec};
use crate::error::{CoreError, Result};

/// A lower/upper bound pair for a robustness measure at one design point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lcb: f64,
    pub ucb: f64,
}

impl BoundPair {
    pub fn width(&self) -> f64 {
        self.ucb - self.lcb
    }
}

/// Overlap correction used by the deviation-type lower bounds:
/// STR(a, b) = max{min{−a, b}, 0}.
fn overlap(a: f64, b: f64) -> f64 {
    (-a).min(b).max(0.0)
}

/// Computes guaranteed bounds on ρ(g) over all g with l ≤ g ≤ u pointwise.
pub fn bounds_exact(
    spec: &MeasureSpec,
    l_row: &[f64],
    u_row: &[f64],
    dist: &EnvDist,
) -> Result<BoundPair> {
    if l_row.len() != dist.len() || u_row.len() != dist.len() {
        return Err(CoreError::InvalidArgument(format!(
            "bound rows have lengths {}/{}, environment has {}",
            l_row.len(),
            u_row.len(),
            dist.len()
        )));
    }
    if l_row.iter().chain(u_row).any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidArgument(
            "bound rows contain a non-finite value".into(),
        ));
    }
    if let Some(i) = (0..l_row.len()).find(|&i| l_row[i] > u_row[i]) {
        return Err(CoreError::InvalidArgument(format!(
            "lower bound exceeds upper bound at index {i}: {} > {}",
            l_row[i], u_row[i]
        )));
    }
    Ok(bounds_unchecked(spec, l_row, u_row, dist))
}

fn bounds_unchecked(
    spec: &MeasureSpec,
    l_row: &[f64],
    u_row: &[f64],
    dist: &EnvDist,
) -> BoundPair {
    match spec {
        // Monotone measures: evaluate on the bound rows themselves.
        MeasureSpec::Expectation
        | MeasureSpec::WorstCase
        | MeasureSpec::BestCase
        | MeasureSpec::ValueAtRisk { .. }
        | MeasureSpec::Cvar { .. }
        | MeasureSpec::ProbThreshold { .. } => BoundPair {
            lcb: spec.eval_unchecked(l_row, dist),
            ucb: spec.eval_unchecked(u_row, dist),
        },
        MeasureSpec::MeanAbsDev => {
            let (lcb, ucb) = deviation_bounds(l_row, u_row, dist, false);
            BoundPair { lcb, ucb }
        }
        MeasureSpec::Variance => {
            let (lcb, ucb) = deviation_bounds(l_row, u_row, dist, true);
            BoundPair { lcb, ucb }
        }
        MeasureSpec::StdDev => {
            let (lcb, ucb) = deviation_bounds(l_row, u_row, dist, true);
            BoundPair {
                lcb: lcb.max(0.0).sqrt(),
                ucb: ucb.max(0.0).sqrt(),
            }
        }
        MeasureSpec::DistRobust { candidates, inner } => {
            let mut lcb = f64::INFINITY;
            let mut ucb = f64::INFINITY;
            for c in candidates {
                let b = bounds_unchecked(inner, l_row, u_row, c);
                lcb = lcb.min(b.lcb);
                ucb = ucb.min(b.ucb);
            }
            BoundPair { lcb, ucb }
        }
        MeasureSpec::MonotoneLipschitz { map, inner, .. } => {
            let b = bounds_unchecked(inner, l_row, u_row, dist);
            let a = map.apply(b.lcb);
            let c = map.apply(b.ucb);
            BoundPair {
                lcb: a.min(c),
                ucb: a.max(c),
            }
        }
        MeasureSpec::WeightedSum {
            weight_a,
            measure_a,
            weight_b,
            measure_b,
        } => {
            let ba = bounds_unchecked(measure_a, l_row, u_row, dist);
            let bb = bounds_unchecked(measure_b, l_row, u_row, dist);
            BoundPair {
                lcb: weight_a * ba.lcb + weight_b * bb.lcb,
                ucb: weight_a * ba.ucb + weight_b * bb.ucb,
            }
        }
    }
}

/// Shared kernel of the mean-absolute-deviation and variance rows. With
/// ľ = l − E[u] and ǔ = u − E[l], returns
///   lcb = E[min{|ľ|, |ǔ|}^k − STR(ľ, ǔ)^k],
///   ucb = E[max{|ľ|, |ǔ|}^k],
/// with k = 1 (`squared == false`) or k = 2.
fn deviation_bounds(l_row: &[f64], u_row: &[f64], dist: &EnvDist, squared: bool) -> (f64, f64) {
    let e_u = dist.expectation(u_row);
    let e_l = dist.expectation(l_row);
    let mut lcb = 0.0;
    let mut ucb = 0.0;
    for ((&l, &u), &p) in l_row.iter().zip(u_row).zip(dist.pmf()) {
        let lo = l - e_u;
        let hi = u - e_l;
        let small = lo.abs().min(hi.abs());
        let big = lo.abs().max(hi.abs());
        let s = overlap(lo, hi);
        if squared {
            lcb += p * (small * small - s * s);
            ucb += p * (big * big);
        } else {
            lcb += p * (small - s);
            ucb += p * big;
        }
    }
    (lcb, ucb)
}

/// Sampling-based bound estimate: the min/max of the measure over posterior
/// sample paths at design index `x`. Unlike [`bounds_exact`] this does not
/// yield a guaranteed interval; it only brackets the paths that were drawn.
pub fn bounds_sampled(
    spec: &MeasureSpec,
    paths: &[Array2<f64>],
    x: usize,
    dist: &EnvDist,
) -> Result<BoundPair> {
    if paths.is_empty() {
        return Err(CoreError::InvalidArgument(
            "at least one sample path is required".into(),
        ));
    }
    let mut lcb = f64::INFINITY;
    let mut ucb = f64::NEG_INFINITY;
    for path in paths {
        if x >= path.nrows() {
            return Err(CoreError::InvalidArgument(format!(
                "design index {x} out of range for {} rows",
                path.nrows()
            )));
        }
        let row = path.row(x);
        let row = row.as_slice().expect("paths are stored row-major");
        let v = spec.eval(row, dist)?;
        lcb = lcb.min(v);
        ucb = ucb.max(v);
    }
    Ok(BoundPair { lcb, ucb })
}
