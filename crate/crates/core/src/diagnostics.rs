//! Regret bookkeeping and theoretical regret-bound evaluation.
//!
//! The cumulative-regret bounds take the form C·√(t·C₀·γ_t) for the six
//! simple measures (C = 8 for mean absolute deviation, 4 otherwise) and a
//! coefficient-driven general form for composed measures. γ_t is supplied
//! by the caller; pass the certified greedy value (γ̂/(1 − 1/e)) to keep the
//! comparison sound.

use std::sync::OnceLock;

use crate::bench::Truth;
use crate::error::{CoreError, Result};
use crate::measures::MeasureSpec;
use crate::rng::stream_rng;
use rand::Rng;

/// Instantaneous and cumulative regret of a sequence of estimated solutions.
pub fn regret_series(x_hats: &[usize], truth: &Truth) -> (Vec<f64>, Vec<f64>) {
    let mut instant = Vec::with_capacity(x_hats.len());
    let mut cumulative = Vec::with_capacity(x_hats.len());
    let mut acc = 0.0;
    for &x in x_hats {
        let r = truth.f_star - truth.f_values[x];
        acc += r;
        instant.push(r);
        cumulative.push(acc);
    }
    (instant, cumulative)
}

/// C₁ = 2 / log(1 + σ⁻²_noise).
pub fn c1(noise_var: f64) -> f64 {
    2.0 / (1.0 + 1.0 / noise_var).ln()
}

/// Uncontrollable-setting variant C′₁ = 2·p_min⁻¹ / log(1 + σ⁻²_noise).
pub fn c1_uncontrollable(noise_var: f64, p_min: f64) -> f64 {
    debug_assert!(p_min > 0.0);
    c1(noise_var) / p_min
}

/// E\[β] = 2·log|X×Ω| + 2 (the χ²₂ increment has mean 2).
pub fn beta_mean(grid_size: usize) -> f64 {
    2.0 * (grid_size as f64).ln() + 2.0
}

/// C₀ = 2(2·log|X×Ω| + 2) / log(1 + σ⁻²_noise) = C₁·E\[β].
pub fn c0(grid_size: usize, noise_var: f64) -> f64 {
    c1(noise_var) * beta_mean(grid_size)
}

/// The leading constant of the simple cumulative-regret bound, defined for
/// the expectation, worst-case, best-case, value-at-risk, CVaR and mean
/// absolute deviation measures only.
pub fn simple_bound_constant(spec: &MeasureSpec) -> Result<f64> {
    match spec {
        MeasureSpec::Expectation
        | MeasureSpec::WorstCase
        | MeasureSpec::BestCase
        | MeasureSpec::ValueAtRisk { .. }
        | MeasureSpec::Cvar { .. } => Ok(4.0),
        MeasureSpec::MeanAbsDev => Ok(8.0),
        other => Err(CoreError::NoWidthFunction(format!(
            "no simple-bound constant for {other:?}"
        ))),
    }
}

/// Expected cumulative-regret bound C·√(t·C₀·γ_t) for t = 1..=T.
pub fn bound_simple(
    spec: &MeasureSpec,
    grid_size: usize,
    noise_var: f64,
    gamma: &[f64],
) -> Result<Vec<f64>> {
    let c = simple_bound_constant(spec)?;
    let c0 = c0(grid_size, noise_var);
    Ok(gamma
        .iter()
        .enumerate()
        .map(|(i, g)| c * ((i + 1) as f64 * c0 * g).sqrt())
        .collect())
}

/// Expected simple-regret bound at the best historical index:
/// C·√(C₀·γ_t / t).
pub fn bound_simple_regret(
    spec: &MeasureSpec,
    grid_size: usize,
    noise_var: f64,
    gamma_t: f64,
    t: usize,
) -> Result<f64> {
    let c = simple_bound_constant(spec)?;
    Ok(c * (c0(grid_size, noise_var) * gamma_t / t as f64).sqrt())
}

/// One additive term ζ·h(Σ_j λ_j a^{ν_j}) of a width function, with h the
/// identity. Every measure with a known width function reduces to this
/// family.
#[derive(Debug, Clone)]
pub struct QTerm {
    pub zeta: f64,
    /// (λ, ν) pairs of the inner polynomial.
    pub powers: Vec<(f64, f64)>,
}

/// Parsed width-function coefficients of a measure.
#[derive(Debug, Clone)]
pub struct QCoefficients {
    pub terms: Vec<QTerm>,
}

impl QCoefficients {
    /// Derives the coefficients structurally from the measure: the base
    /// measures contribute a single linear term (λ = 2 for mean absolute
    /// deviation), Lipschitz maps scale ζ, weighted sums concatenate, and
    /// the distributionally robust wrapper passes through to its inner
    /// measure.
    pub fn from_measure(spec: &MeasureSpec) -> Result<Self> {
        match spec {
            MeasureSpec::Expectation
            | MeasureSpec::WorstCase
            | MeasureSpec::BestCase
            | MeasureSpec::ValueAtRisk { .. }
            | MeasureSpec::Cvar { .. } => Ok(Self {
                terms: vec![QTerm { zeta: 1.0, powers: vec![(1.0, 1.0)] }],
            }),
            MeasureSpec::MeanAbsDev => Ok(Self {
                terms: vec![QTerm { zeta: 1.0, powers: vec![(2.0, 1.0)] }],
            }),
            MeasureSpec::MonotoneLipschitz { lipschitz, inner, .. } => {
                let mut inner = Self::from_measure(inner)?;
                for term in inner.terms.iter_mut() {
                    term.zeta *= lipschitz;
                }
                Ok(inner)
            }
            MeasureSpec::WeightedSum {
                weight_a,
                measure_a,
                weight_b,
                measure_b,
            } => {
                let mut a = Self::from_measure(measure_a)?;
                let b = Self::from_measure(measure_b)?;
                for term in a.terms.iter_mut() {
                    term.zeta *= weight_a;
                }
                a.terms.extend(b.terms.into_iter().map(|mut t| {
                    t.zeta *= weight_b;
                    t
                }));
                Ok(a)
            }
            MeasureSpec::DistRobust { inner, .. } => Self::from_measure(inner),
            other => Err(CoreError::NoWidthFunction(format!(
                "no width coefficients for {other:?}"
            ))),
        }
    }
}

/// Cached χ²₂ draws used to evaluate moments of β by Monte Carlo when no
/// closed form applies. Fixed seed keeps diagnostics deterministic.
fn xi_draws() -> &'static [f64] {
    static DRAWS: OnceLock<Vec<f64>> = OnceLock::new();
    DRAWS.get_or_init(|| {
        let mut rng = stream_rng(0xd1a6, &[0xbe7a]);
        (0..100_000)
            .map(|_| -2.0 * (1.0 - rng.random::<f64>()).ln())
            .collect()
    })
}

/// E\[β^p] with β = 2·log|X×Ω| + χ²₂. Exact for p = 1, cached Monte Carlo
/// otherwise.
pub fn beta_moment(grid_size: usize, p: f64) -> f64 {
    if (p - 1.0).abs() < 1e-12 {
        return beta_mean(grid_size);
    }
    let offset = 2.0 * (grid_size as f64).ln();
    let draws = xi_draws();
    draws.iter().map(|xi| (offset + xi).powf(p)).sum::<f64>() / draws.len() as f64
}

/// Expected cumulative-regret bound for a general width function:
/// 2t·Σ_i ζ_i · (1/t)·Σ_j 2^{ν} λ (t·C_{2,ν})^{1−ν'/2} (C₁ γ_t)^{ν'/2}
/// with ν' = min{ν, 1} and C_{2,ν} = E\[β^{ν/(2−ν')}].
pub fn bound_general(
    q: &QCoefficients,
    grid_size: usize,
    noise_var: f64,
    gamma_t: f64,
    t: usize,
) -> f64 {
    bound_general_c1(q, grid_size, c1(noise_var), gamma_t, t)
}

/// [`bound_general`] with an explicit C₁, so the uncontrollable-setting
/// constant C′₁ can be substituted.
pub fn bound_general_c1(
    q: &QCoefficients,
    grid_size: usize,
    c1_value: f64,
    gamma_t: f64,
    t: usize,
) -> f64 {
    let t_f = t as f64;
    let mut total = 0.0;
    for term in &q.terms {
        let mut inner = 0.0;
        for &(lambda, nu) in &term.powers {
            let nu_prime = nu.min(1.0);
            let c2 = beta_moment(grid_size, nu / (2.0 - nu_prime));
            inner += 2.0_f64.powf(nu)
                * lambda
                * (t_f * c2).powf(1.0 - nu_prime / 2.0)
                * (c1_value * gamma_t).powf(nu_prime / 2.0);
        }
        total += term.zeta * inner / t_f;
    }
    2.0 * t_f * total
}

/// High-probability inflation via Markov's inequality: a bound on E\[X]
/// yields X ≤ bound/δ with probability at least 1 − δ.
pub fn markov_bound(expected_bound: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "confidence level must lie in (0,1), got {delta}"
        )));
    }
    Ok(expected_bound / delta)
}

/// Uncontrollable-setting cumulative bound: C₁ is replaced by
/// C′₁ = 2·p_min⁻¹ / log(1 + σ⁻²), scaling the simple bound by √(p_min⁻¹).
pub fn bound_uncontrollable(
    spec: &MeasureSpec,
    grid_size: usize,
    noise_var: f64,
    gamma: &[f64],
    p_min: f64,
) -> Result<Vec<f64>> {
    if !(p_min > 0.0 && p_min <= 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "minimum environment mass must lie in (0,1], got {p_min}"
        )));
    }
    let c = simple_bound_constant(spec)?;
    let c1_prime = 2.0 / (p_min * (1.0 + 1.0 / noise_var).ln());
    let eb = beta_mean(grid_size);
    Ok(gamma
        .iter()
        .enumerate()
        .map(|(i, g)| c * ((i + 1) as f64 * c1_prime * eb * g).sqrt())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn truth() -> Truth {
        Truth {
            x_star: 1,
            f_star: 5.0,
            f_values: vec![3.0, 5.0, 4.0],
        }
    }

    #[test]
    fn regret_direct_and_cumulative() {
        let (r, cum) = regret_series(&[0, 0, 2], &truth());
        assert_eq!(r, vec![2.0, 2.0, 1.0]);
        assert_eq!(cum, vec![2.0, 4.0, 5.0]);
    }

    #[test]
    fn constant_xhat_regret_is_linear() {
        let (_, cum) = regret_series(&[0; 5], &truth());
        assert_eq!(cum[4], 5.0 * 2.0);
    }

    #[test]
    fn regret_matches_fold_oracle() {
        let xs = [2usize, 0, 1, 2, 0];
        let (r, cum) = regret_series(&xs, &truth());
        let folded: f64 = xs.iter().map(|&x| 5.0 - truth().f_values[x]).sum();
        assert_abs_diff_eq!(cum.last().unwrap(), &folded, epsilon = 1e-15);
        assert_eq!(r.len(), xs.len());
    }

    #[test]
    fn simple_bound_constants() {
        assert_eq!(simple_bound_constant(&MeasureSpec::Expectation).unwrap(), 4.0);
        assert_eq!(simple_bound_constant(&MeasureSpec::MeanAbsDev).unwrap(), 8.0);
        assert!(simple_bound_constant(&MeasureSpec::Variance).is_err());
    }

    #[test]
    fn c0_scalar_arithmetic() {
        // 2(2·log 1000 + 2)/log(1 + 10⁶)
        let expect = 2.0 * (2.0 * 1000.0_f64.ln() + 2.0) / (1.0 + 1e6_f64).ln();
        assert_abs_diff_eq!(c0(1000, 1e-6), expect, epsilon = 1e-12);
        assert_abs_diff_eq!(expect, 2.2895, epsilon = 5e-4);
    }

    #[test]
    fn simple_bound_identity_when_product_is_one() {
        // With C₀·γ₁ = 1 the bound at t = 1 equals C.
        let spec = MeasureSpec::Expectation;
        let c0v = c0(1000, 1e-6);
        let gamma = [1.0 / c0v];
        let b = bound_simple(&spec, 1000, 1e-6, &gamma).unwrap();
        assert_abs_diff_eq!(b[0], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn general_bound_reduces_to_simple_for_linear_q() {
        let grid = 500;
        let noise = 1e-4;
        let gamma_t = 12.0;
        let t = 37;
        let q = QCoefficients::from_measure(&MeasureSpec::Expectation).unwrap();
        let general = bound_general(&q, grid, noise, gamma_t, t);
        let expect = 4.0 * (t as f64 * beta_mean(grid) * c1(noise) * gamma_t).sqrt();
        assert_abs_diff_eq!(general, expect, epsilon = 1e-9);
        // q(a) = 2a doubles it.
        let q2 = QCoefficients::from_measure(&MeasureSpec::MeanAbsDev).unwrap();
        assert_abs_diff_eq!(
            bound_general(&q2, grid, noise, gamma_t, t),
            2.0 * expect,
            epsilon = 1e-9
        );
    }

    #[test]
    fn beta_moment_first_is_exact() {
        assert_abs_diff_eq!(beta_moment(1000, 1.0), beta_mean(1000), epsilon = 1e-12);
        // Monte-Carlo second moment of β = c + ξ: c² + 2c·E[ξ] + E[ξ²]
        // with E[ξ] = 2, E[ξ²] = 8.
        let c = 2.0 * 1000.0_f64.ln();
        let analytic = c * c + 4.0 * c + 8.0;
        let mc = beta_moment(1000, 2.0);
        assert!((mc - analytic).abs() / analytic < 0.01);
    }

    #[test]
    fn markov_scaling() {
        assert_eq!(markov_bound(3.0, 0.5).unwrap(), 6.0);
        assert_eq!(markov_bound(3.0, 0.05).unwrap(), 60.0);
        assert!(markov_bound(3.0, 1.0).is_err());
        assert!(markov_bound(3.0, 0.0).is_err());
    }

    #[test]
    fn uncontrollable_scaling() {
        let spec = MeasureSpec::Expectation;
        let gamma = [1.0, 2.0, 3.0];
        let base = bound_simple(&spec, 100, 1e-3, &gamma).unwrap();
        let same = bound_uncontrollable(&spec, 100, 1e-3, &gamma, 1.0).unwrap();
        for (a, b) in base.iter().zip(&same) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let quarter = bound_uncontrollable(&spec, 100, 1e-3, &gamma, 0.25).unwrap();
        for (a, b) in base.iter().zip(&quarter) {
            assert_abs_diff_eq!(2.0 * a, *b, epsilon = 1e-12);
        }
        assert!(bound_uncontrollable(&spec, 100, 1e-3, &gamma, 0.0).is_err());
        assert_eq!(
            simple_bound_constant(&MeasureSpec::MeanAbsDev).unwrap(),
            8.0
        );
    }

    #[test]
    fn bounds_monotone_in_t() {
        let gamma: Vec<f64> = (1..=20).map(|t| (t as f64).sqrt()).collect();
        let b = bound_simple(&MeasureSpec::Expectation, 64, 1e-6, &gamma).unwrap();
        for pair in b.windows(2) {
            assert!(pair[1] >= pair[0]);
        }
        assert!(b.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn simple_regret_bound_is_cumulative_over_t() {
        let spec = MeasureSpec::Cvar { alpha: 0.3 };
        let gamma_t = 4.0;
        let t = 100;
        let cumulative = bound_simple(&spec, 256, 1e-6, &vec![gamma_t; t]).unwrap()[t - 1];
        let simple = bound_simple_regret(&spec, 256, 1e-6, gamma_t, t).unwrap();
        assert_abs_diff_eq!(simple, cumulative / t as f64, epsilon = 1e-10);
        // Hand arithmetic at t = 100 for the expectation measure.
        let exp100 = bound_simple_regret(&MeasureSpec::Expectation, 256, 1e-6, 4.0, 100).unwrap();
        let by_hand = 4.0 * (c0(256, 1e-6) * 4.0 / 100.0).sqrt();
        assert_abs_diff_eq!(exp100, by_hand, epsilon = 1e-12);
        // Decreasing whenever γ_t/t decreases.
        let gammas: Vec<f64> = (1..=30).map(|t| (t as f64).sqrt()).collect();
        let series: Vec<f64> = gammas
            .iter()
            .enumerate()
            .map(|(i, g)| bound_simple_regret(&spec, 256, 1e-6, *g, i + 1).unwrap())
            .collect();
        for pair in series.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
    }
}
