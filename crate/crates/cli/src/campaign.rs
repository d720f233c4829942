//! Campaign execution: builds the configured problem, runs each strategy
//! for the requested repetitions and iterations, and aggregates regret
//! statistics and theoretical bounds.
//!
//! Determinism: every random consumer draws from a ChaCha stream derived
//! from (master seed, repetition, consumer tag). Strategies share the
//! initial-point and noise streams of a repetition, so paired comparisons
//! see identical draws. Repetitions are dispatched to a worker pool and
//! joined in repetition order, which keeps outputs byte-identical.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use rmbo_core::bench::{
    gen_grid, himmelblau_oracle, load_carrier_lifetime, benchmark_pmf, syn2d_kernel, syn4d_kernel,
    syn6d_kernel, synthetic_2d, synthetic_6d, true_optimum, BenchmarkProblem, TabulatedOracle,
};
use rmbo_core::bench::carrier_kernel;
use rmbo_core::diagnostics::{bound_general_c1, c1, c1_uncontrollable, QCoefficients};
use rmbo_core::error::CoreError;
use rmbo_core::gp::{certified_gamma, greedy_max_info_gain, GPosterior, KernelSpec};
use rmbo_core::grid::{CoordMode, ProblemGrid};
use rmbo_core::measures::{EnvDist, MeasureSpec};
use rmbo_core::policy::{
    bbbmobo_beta, credible_field, estimate_hat_t, estimate_solution, run_iteration,
    select_bbbmobo, select_bptucb, select_bq, select_random, select_us, select_w_simulator,
    select_w_uncontrollable, BbbVariant, BetaMode, BptVariant, BqPrior, HatTMode,
    IterationRecord, Setting,
};
use rmbo_core::rng::{stream_rng, StreamRng};

use crate::config::{CampaignConfig, HatTConfig, MeasureChoice, ProblemSpec, StrategyKind};

/// Consumer tags for per-repetition stream derivation.
mod tag {
    pub const ORACLE: u64 = 1;
    pub const INIT: u64 = 2;
    pub const BETA: u64 = 3;
    pub const ENV: u64 = 4;
    pub const NOISE: u64 = 5;
    pub const HAT: u64 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("strategy {strategy}, repetition {rep}{}: {source}", iteration.map(|t| format!(", iteration {t}")).unwrap_or_default())]
    Run {
        strategy: &'static str,
        rep: usize,
        iteration: Option<usize>,
        source: CoreError,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(e) | CliError::Run { source: e, .. } => match e {
                CoreError::DataError(_) | CoreError::ParseError { .. } | CoreError::Io { .. } => 3,
                CoreError::NumericalFailure(_) => 4,
                _ => 1,
            },
        }
    }
}

/// The resolved robustness measure of a campaign.
pub fn measure_spec(config: &CampaignConfig) -> MeasureSpec {
    match config.measure {
        MeasureChoice::Exp => MeasureSpec::Expectation,
        MeasureChoice::Ptr => MeasureSpec::ProbThreshold { threshold: config.threshold },
        MeasureChoice::ExpMae => MeasureSpec::exp_minus_mad(config.mae_weight),
    }
}

/// Problem pieces shared by all repetitions.
pub struct ProblemParts {
    pub grid: Arc<ProblemGrid>,
    pub kernel: KernelSpec,
    pub surrogate_noise: f64,
    /// Present when the black-box is the same for every repetition.
    shared_oracle: Option<Arc<TabulatedOracle>>,
    problem: ProblemSpec,
    pub warnings: Vec<String>,
}

impl ProblemParts {
    pub fn build(config: &CampaignConfig) -> Result<Self, CliError> {
        let mut warnings = Vec::new();
        let (grid, kernel, shared_oracle): (ProblemGrid, KernelSpec, Option<Arc<TabulatedOracle>>) =
            match &config.problem {
                ProblemSpec::Syn2d => {
                    let grid = gen_grid(5.0, 2, 50)?.with_dist(benchmark_pmf(BenchmarkProblem::Syn2d)?)?;
                    (grid, syn2d_kernel(), None)
                }
                ProblemSpec::Syn4d => {
                    let grid = gen_grid(2.5, 4, 15)?.with_dist(benchmark_pmf(BenchmarkProblem::Syn4d)?)?;
                    let oracle = himmelblau_oracle(&grid)?;
                    (grid, syn4d_kernel(), Some(Arc::new(oracle)))
                }
                ProblemSpec::Syn6d => {
                    let grid = gen_grid(2.0, 6, 7)?.with_dist(benchmark_pmf(BenchmarkProblem::Syn6d)?)?;
                    (grid, syn6d_kernel(), None)
                }
                ProblemSpec::Carrier(path) => {
                    let loaded = load_carrier_lifetime(path)?;
                    warnings.extend(loaded.warnings);
                    (loaded.grid, carrier_kernel(), Some(Arc::new(loaded.oracle)))
                }
                ProblemSpec::Custom(path) => {
                    let (grid, oracle) = load_custom_table(path)?;
                    (
                        grid,
                        KernelSpec::SquaredExponential { lengthscale: 1.0, variance: 1.0 },
                        Some(Arc::new(oracle)),
                    )
                }
            };
        Ok(Self {
            grid: Arc::new(grid),
            kernel,
            surrogate_noise: config.noise_var.unwrap_or(1e-6),
            shared_oracle,
            problem: config.problem.clone(),
            warnings,
        })
    }

    /// The black-box table seen by one repetition. The 2D and 6D problems
    /// draw a fresh GP path per repetition; the seed depends only on the
    /// master seed and the repetition index, so strategies are paired.
    pub fn oracle_for_rep(&self, master: u64, rep: usize) -> Result<Arc<TabulatedOracle>, CoreError> {
        if let Some(shared) = &self.shared_oracle {
            return Ok(Arc::clone(shared));
        }
        let seed = rmbo_core::rng::derive_seed(master, &[rep as u64, tag::ORACLE]);
        match self.problem {
            ProblemSpec::Syn2d => Ok(Arc::new(synthetic_2d(&self.grid, seed)?)),
            ProblemSpec::Syn6d => Ok(Arc::new(synthetic_6d(&self.grid, seed)?)),
            _ => unreachable!("problems without a shared oracle are per-repetition draws"),
        }
    }
}

/// Custom tabulated problem: CSV with header `x_index,w_index,value`,
/// every cell present, indices 0-based. Coordinates are the indices
/// themselves and the environment distribution is uniform.
fn load_custom_table(path: &Path) -> Result<(ProblemGrid, TabulatedOracle), CoreError> {
    let text = std::fs::read_to_string(path).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "x_index,w_index,value" => {}
        Some((_, h)) => {
            return Err(CoreError::ParseError {
                line: 1,
                message: format!("expected header \"x_index,w_index,value\", found {h:?}"),
            })
        }
        None => {
            return Err(CoreError::ParseError { line: 1, message: "empty file".into() })
        }
    }
    let mut cells = Vec::new();
    let (mut n_x, mut n_w) = (0usize, 0usize);
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 3 {
            return Err(CoreError::ParseError {
                line,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let parse_idx = |s: &str| {
            s.trim().parse::<usize>().map_err(|_| CoreError::ParseError {
                line,
                message: format!("cannot parse index {s:?}"),
            })
        };
        let x = parse_idx(fields[0])?;
        let w = parse_idx(fields[1])?;
        let v: f64 = fields[2].trim().parse().map_err(|_| CoreError::ParseError {
            line,
            message: format!("cannot parse value {:?}", fields[2]),
        })?;
        n_x = n_x.max(x + 1);
        n_w = n_w.max(w + 1);
        cells.push((x, w, v));
    }
    if cells.is_empty() {
        return Err(CoreError::DataError("custom table has no rows".into()));
    }
    let mut table = ndarray::Array2::from_elem((n_x, n_w), f64::NAN);
    for (x, w, v) in cells {
        table[[x, w]] = v;
    }
    if let Some(((x, w), _)) = table.indexed_iter().find(|(_, v)| v.is_nan()) {
        return Err(CoreError::DataError(format!(
            "custom table is missing cell ({x}, {w})"
        )));
    }
    let grid = ProblemGrid::new(
        (0..n_x).map(|i| vec![i as f64]).collect(),
        (0..n_w).map(|j| vec![j as f64]).collect(),
        EnvDist::uniform(n_w),
        CoordMode::Concat,
    )?;
    let oracle = TabulatedOracle::new(table, 0.0)?;
    Ok((grid, oracle))
}

/// One repetition's full trace.
#[derive(Debug, Clone)]
pub struct RepTrace {
    pub rep: usize,
    /// The pre-loop random observation (x, w, y); not part of the CSV rows.
    pub initial: (usize, usize, f64),
    pub records: Vec<IterationRecord>,
    /// Best-historical-estimate positions per iteration, when tracked.
    pub hat_positions: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct StrategyResult {
    pub kind: StrategyKind,
    pub mean_regret: Vec<f64>,
    pub se2: Vec<f64>,
    pub reps: Vec<RepTrace>,
}

#[derive(Debug, Clone)]
pub struct BoundColumns {
    pub cumulative: Vec<f64>,
    pub simple: Vec<f64>,
    pub markov: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub gamma_hat: Vec<f64>,
    pub gamma_certified: Vec<f64>,
    /// None when the measure has no width function: no guarantee applies.
    pub theory: Option<BoundColumns>,
}

#[derive(Debug)]
pub struct CampaignResult {
    pub iterations: usize,
    pub strategies: Vec<StrategyResult>,
    pub bounds: Option<BoundsReport>,
    pub warnings: Vec<String>,
}

/// Runs one strategy for one repetition.
#[allow(clippy::too_many_arguments)]
fn run_single(
    parts: &ProblemParts,
    oracle: &TabulatedOracle,
    spec: &MeasureSpec,
    setting: Setting,
    strategy: StrategyKind,
    iterations: usize,
    threshold: f64,
    bpt_c: f64,
    hat_cfg: HatTConfig,
    bq_prior: Option<&BqPrior>,
    master: u64,
    rep: usize,
) -> Result<RepTrace, (Option<usize>, CoreError)> {
    let setup = |e: CoreError| (None, e);
    let grid = &parts.grid;
    if oracle.n_x() != grid.n_x() || oracle.n_w() != grid.n_w() {
        return Err(setup(CoreError::DataError(format!(
            "oracle table is {}x{}, grid is {}x{}",
            oracle.n_x(),
            oracle.n_w(),
            grid.n_x(),
            grid.n_w()
        ))));
    }
    let dist = grid.dist().clone();
    let mut state = GPosterior::new(parts.kernel.clone(), parts.surrogate_noise, grid.clone())
        .map_err(setup)?;
    let mut rng_init: StreamRng = stream_rng(master, &[rep as u64, tag::INIT]);
    let mut rng_beta: StreamRng = stream_rng(master, &[rep as u64, tag::BETA]);
    let mut rng_env: StreamRng = stream_rng(master, &[rep as u64, tag::ENV]);
    let mut rng_noise: StreamRng = stream_rng(master, &[rep as u64, tag::NOISE]);
    let mut rng_hat: StreamRng = stream_rng(master, &[rep as u64, tag::HAT]);

    // One random initial observation before the loop (iteration 0).
    use rand::Rng;
    let x0 = rng_init.random_range(0..grid.n_x());
    let w0 = match setting {
        Setting::Simulator => rng_init.random_range(0..grid.n_w()),
        Setting::Uncontrollable => select_w_uncontrollable(&dist, &mut rng_init),
    };
    let y0 = oracle.query(x0, w0, &mut rng_noise);
    state.update(x0, w0, y0).map_err(setup)?;

    let truth = true_optimum(oracle, spec, &dist).map_err(setup)?;
    let mut records = Vec::with_capacity(iterations);
    let mut hat_history: Vec<usize> = Vec::new();
    let mut hat_positions: Vec<usize> = Vec::new();

    for t in 1..=iterations {
        let mut body = || -> Result<IterationRecord, CoreError> {
            // Estimated solution from the posterior before this
            // observation; also feeds the best-historical-estimate tracker.
            let x_hat = estimate_solution(&state, spec, &dist)?;
            if !matches!(hat_cfg, HatTConfig::Off) {
                hat_history.push(x_hat);
                let mode = match hat_cfg {
                    HatTConfig::Exact => HatTMode::Exact,
                    HatTConfig::MonteCarlo { samples } => HatTMode::MonteCarlo { paths: samples },
                    HatTConfig::Off => unreachable!(),
                };
                hat_positions.push(estimate_hat_t(
                    &state,
                    spec,
                    &dist,
                    &hat_history,
                    mode,
                    &mut rng_hat,
                )?);
            }

            let record = match strategy {
                StrategyKind::Proposed { fixed } => {
                    let mode = if fixed { BetaMode::Fixed(9.0) } else { BetaMode::Randomized };
                    run_iteration(
                        &mut state,
                        spec,
                        &dist,
                        setting,
                        oracle,
                        t,
                        mode,
                        Some(&truth),
                        &mut rng_beta,
                        &mut rng_env,
                        &mut rng_noise,
                    )?
                }
                StrategyKind::Bbbmobo { fixed } => {
                    let variant = if fixed { BbbVariant::Fixed } else { BbbVariant::Theory };
                    let beta = bbbmobo_beta(grid.joint_size(), t, variant);
                    let field = credible_field(&state, beta, spec, &dist)?;
                    let x = select_bbbmobo(&field);
                    let w = match setting {
                        Setting::Simulator => select_w_simulator(&state, x),
                        Setting::Uncontrollable => select_w_uncontrollable(&dist, &mut rng_env),
                    };
                    observe(&mut state, oracle, &truth, t, beta, x, w, x_hat, &mut rng_noise)?
                }
                StrategyKind::Random => {
                    let (x, w) = select_random(grid, &dist, &mut rng_env);
                    observe(&mut state, oracle, &truth, t, f64::NAN, x, w, x_hat, &mut rng_noise)?
                }
                StrategyKind::Us => {
                    let (x, w_joint) = select_us(&state);
                    let w = match setting {
                        Setting::Simulator => w_joint,
                        Setting::Uncontrollable => select_w_uncontrollable(&dist, &mut rng_env),
                    };
                    observe(&mut state, oracle, &truth, t, f64::NAN, x, w, x_hat, &mut rng_noise)?
                }
                StrategyKind::Bq => {
                    let prior = bq_prior.expect("bq prior precomputed for bq runs");
                    let x = select_bq(&state, &dist, prior);
                    let w = match setting {
                        Setting::Simulator => select_w_simulator(&state, x),
                        Setting::Uncontrollable => select_w_uncontrollable(&dist, &mut rng_env),
                    };
                    observe(&mut state, oracle, &truth, t, f64::NAN, x, w, x_hat, &mut rng_noise)?
                }
                StrategyKind::BptUcb { fixed } => {
                    let variant = if fixed { BptVariant::Fixed } else { BptVariant::Theory };
                    let (x, w_rule) = select_bptucb(&state, &dist, threshold, bpt_c, t, variant);
                    let w = match setting {
                        Setting::Simulator => w_rule,
                        Setting::Uncontrollable => select_w_uncontrollable(&dist, &mut rng_env),
                    };
                    observe(&mut state, oracle, &truth, t, f64::NAN, x, w, x_hat, &mut rng_noise)?
                }
            };
            debug_assert_eq!(record.x_hat, x_hat);
            Ok(record)
        };
        records.push(body().map_err(|e| (Some(t), e))?);
    }
    Ok(RepTrace {
        rep,
        initial: (x0, w0, y0),
        records,
        hat_positions: (!hat_positions.is_empty()).then_some(hat_positions),
    })
}

/// Shared observe-and-record tail for the baseline strategies.
#[allow(clippy::too_many_arguments)]
fn observe(
    state: &mut GPosterior,
    oracle: &TabulatedOracle,
    truth: &rmbo_core::bench::Truth,
    t: usize,
    beta: f64,
    x: usize,
    w: usize,
    x_hat: usize,
    rng_noise: &mut StreamRng,
) -> Result<IterationRecord, CoreError> {
    let started = std::time::Instant::now();
    let y = oracle.query(x, w, rng_noise);
    state.update(x, w, y)?;
    Ok(IterationRecord {
        t,
        beta,
        x,
        w,
        y,
        x_hat,
        f_at_estimate: Some(truth.f_values[x_hat]),
        regret: Some(truth.f_star - truth.f_values[x_hat]),
        info_gain: state.realized_info_gain(),
        wall: started.elapsed(),
    })
}

/// Runs the whole campaign: every strategy × repetition, aggregated.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult, CliError> {
    let parts = ProblemParts::build(config)?;
    let spec = measure_spec(config);
    spec.validate(Some(parts.grid.n_w())).map_err(CliError::Core)?;
    let bq_prior = if config.strategies.contains(&StrategyKind::Bq) {
        Some(Arc::new(
            BqPrior::new(&parts.kernel, &parts.grid, parts.grid.dist()).map_err(CliError::Core)?,
        ))
    } else {
        None
    };

    // The black-box of a repetition is shared by every strategy (paired
    // comparisons), so build each table once.
    let oracles: Vec<Arc<TabulatedOracle>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| parts.oracle_for_rep(config.seed, rep))
        .collect::<Result<_, CoreError>>()
        .map_err(CliError::Core)?;

    let mut strategies = Vec::with_capacity(config.strategies.len());
    for &strategy in &config.strategies {
        let reps: Result<Vec<RepTrace>, CliError> = (0..config.repetitions)
            .into_par_iter()
            .map(|rep| {
                run_single(
                    &parts,
                    &oracles[rep],
                    &spec,
                    config.setting,
                    strategy,
                    config.iterations,
                    config.threshold,
                    config.bpt_c,
                    config.hat_t,
                    bq_prior.as_deref(),
                    config.seed,
                    rep,
                )
                .map_err(|(iteration, source)| CliError::Run {
                    strategy: strategy.token(),
                    rep,
                    iteration,
                    source,
                })
            })
            .collect();
        let reps = reps?;
        let (mean_regret, se2) = aggregate_regret(&reps, config.iterations);
        strategies.push(StrategyResult { kind: strategy, mean_regret, se2, reps });
    }

    let bounds = if config.bound_check {
        Some(compute_bounds(config, &parts, &spec)?)
    } else {
        None
    };

    Ok(CampaignResult {
        iterations: config.iterations,
        strategies,
        bounds,
        warnings: parts.warnings,
    })
}

fn aggregate_regret(reps: &[RepTrace], iterations: usize) -> (Vec<f64>, Vec<f64>) {
    let r = reps.len();
    let mut mean = vec![0.0; iterations];
    let mut se2 = vec![0.0; iterations];
    for t in 0..iterations {
        let vals: Vec<f64> = reps
            .iter()
            .map(|rep| rep.records[t].regret.unwrap_or(f64::NAN))
            .collect();
        let m = vals.iter().sum::<f64>() / r as f64;
        mean[t] = m;
        if r > 1 {
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (r as f64 - 1.0);
            se2[t] = 2.0 * (var / r as f64).sqrt();
        }
    }
    (mean, se2)
}

/// Greedy information gain plus the theoretical bound columns for the
/// campaign's measure, grid and noise level.
pub fn compute_bounds(
    config: &CampaignConfig,
    parts: &ProblemParts,
    spec: &MeasureSpec,
) -> Result<BoundsReport, CliError> {
    let gamma_hat = greedy_max_info_gain(
        &parts.kernel,
        parts.surrogate_noise,
        &parts.grid,
        config.iterations,
    )
    .map_err(CliError::Core)?;
    let gamma_certified = certified_gamma(&gamma_hat);
    let grid_size = parts.grid.joint_size();
    let c1_eff = match config.setting {
        Setting::Simulator => Some(c1(parts.surrogate_noise)),
        Setting::Uncontrollable => {
            let dist = parts.grid.dist();
            if dist.fully_supported() {
                Some(c1_uncontrollable(parts.surrogate_noise, dist.p_min_positive()))
            } else {
                None
            }
        }
    };
    let theory = match (QCoefficients::from_measure(spec), c1_eff) {
        (Ok(q), Some(c1v)) => {
            let mut cumulative = Vec::with_capacity(config.iterations);
            let mut simple = Vec::with_capacity(config.iterations);
            let mut markov = Vec::with_capacity(config.iterations);
            for t in 1..=config.iterations {
                let b = bound_general_c1(&q, grid_size, c1v, gamma_certified[t - 1], t);
                cumulative.push(b);
                simple.push(b / t as f64);
                markov.push(b / 0.05);
            }
            Some(BoundColumns { cumulative, simple, markov })
        }
        _ => None,
    };
    Ok(BoundsReport { gamma_hat, gamma_certified, theory })
}
