//! Quick invariant checks runnable from the command line. Each check
//! prints one PASS/FAIL line; the command exits non-zero if any fail.

use std::sync::Arc;

use rand::Rng;

use rmbo_core::bench::{gen_grid, synthetic_2d, true_optimum};
use rmbo_core::gp::{GPosterior, KernelSpec};
use rmbo_core::grid::{CoordMode, ProblemGrid};
use rmbo_core::measures::{bounds_exact, q_value, EnvDist, MeasureSpec};
use rmbo_core::policy::{
    beta_from_xi, credible_field, estimate_solution, sample_beta, select_x_proposed,
};
use rmbo_core::rng::stream_rng;

use crate::campaign::run_campaign;
use crate::config::parse_config_text;
use crate::output::emit_csv;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("PASS {name}: {detail}");
        } else {
            self.failures += 1;
            println!("FAIL {name}: {detail}");
        }
    }
}

pub fn run() -> i32 {
    let mut report = Report { failures: 0 };

    beta_sampler(&mut report);
    containment(&mut report);
    width_inequality(&mut report);
    single_omega_ucb(&mut report);
    telescoping(&mut report);
    determinism(&mut report);

    if report.failures == 0 {
        println!("selftest: all checks passed");
        0
    } else {
        println!("selftest: {} check(s) failed", report.failures);
        1
    }
}

fn beta_sampler(report: &mut Report) {
    let mut rng = stream_rng(0x5e1f, &[1]);
    let n = 100_000;
    let mut xs = Vec::with_capacity(n);
    let mut sum = 0.0;
    for _ in 0..n {
        let b = sample_beta(1000, &mut rng);
        sum += b.beta;
        xs.push(b.xi);
    }
    let mean = sum / n as f64;
    xs.sort_by(f64::total_cmp);
    let mut ks: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let cdf = 1.0 - (-x / 2.0).exp();
        ks = ks
            .max((cdf - i as f64 / n as f64).abs())
            .max((cdf - (i + 1) as f64 / n as f64).abs());
    }
    report.check(
        "beta-sampler",
        (mean - 15.8155).abs() < 0.05 && ks < 0.01,
        format!("mean {mean:.4} (expect 15.8155±0.05), KS {ks:.4} (< 0.01)"),
    );
}

fn containment(report: &mut Report) {
    let mut rng = stream_rng(0x5e1f, &[2]);
    let specs = [
        MeasureSpec::Expectation,
        MeasureSpec::WorstCase,
        MeasureSpec::ValueAtRisk { alpha: 0.3 },
        MeasureSpec::Cvar { alpha: 0.3 },
        MeasureSpec::MeanAbsDev,
        MeasureSpec::Variance,
        MeasureSpec::ProbThreshold { threshold: 0.0 },
        MeasureSpec::exp_minus_mad(2.0),
    ];
    let mut violations = 0usize;
    let mut checks = 0usize;
    for _ in 0..100 {
        let n = rng.random_range(2..6);
        let masses: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = masses.iter().sum();
        let dist = EnvDist::new(masses.iter().map(|m| m / total).collect()).unwrap();
        let l: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let u: Vec<f64> = l.iter().map(|v| v + rng.random::<f64>() * 2.0).collect();
        for spec in &specs {
            let b = bounds_exact(spec, &l, &u, &dist).unwrap();
            for _ in 0..50 {
                let g: Vec<f64> = l
                    .iter()
                    .zip(&u)
                    .map(|(a, b)| a + rng.random::<f64>() * (b - a))
                    .collect();
                let rho = spec.eval(&g, &dist).unwrap();
                checks += 1;
                if rho < b.lcb - 1e-9 || rho > b.ucb + 1e-9 {
                    violations += 1;
                }
            }
        }
    }
    report.check(
        "bound-containment",
        violations == 0,
        format!("{checks} random band functions, {violations} violations"),
    );
}

fn width_inequality(report: &mut Report) {
    let mut rng = stream_rng(0x5e1f, &[3]);
    let specs = [
        MeasureSpec::Expectation,
        MeasureSpec::WorstCase,
        MeasureSpec::BestCase,
        MeasureSpec::ValueAtRisk { alpha: 0.4 },
        MeasureSpec::Cvar { alpha: 0.4 },
        MeasureSpec::MeanAbsDev,
    ];
    let mut violations = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..6);
        let dist = EnvDist::uniform(n);
        let beta: f64 = rng.random::<f64>() * 12.0 + 0.5;
        let sd: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mu: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let l: Vec<f64> = mu.iter().zip(&sd).map(|(m, s)| m - beta.sqrt() * s).collect();
        let u: Vec<f64> = mu.iter().zip(&sd).map(|(m, s)| m + beta.sqrt() * s).collect();
        let a = 2.0 * beta.sqrt() * sd.iter().fold(0.0f64, |m, s| m.max(*s));
        for spec in &specs {
            let b = bounds_exact(spec, &l, &u, &dist).unwrap();
            if b.ucb - b.lcb > q_value(spec, a).unwrap() + 1e-9 {
                violations += 1;
            }
        }
    }
    report.check(
        "width-inequality",
        violations == 0,
        format!("600 measure/field pairs, {violations} violations"),
    );
}

fn single_omega_ucb(report: &mut Report) {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = stream_rng(seed, &[4]);
        let grid = Arc::new(
            ProblemGrid::new(
                (0..15).map(|_| vec![rng.random::<f64>() * 6.0 - 3.0]).collect(),
                vec![vec![0.0]],
                EnvDist::uniform(1),
                CoordMode::Concat,
            )
            .unwrap(),
        );
        let kernel = KernelSpec::SquaredExponential { lengthscale: 1.0, variance: 1.0 };
        let mut gp = GPosterior::new(kernel, 1e-4, grid.clone()).unwrap();
        for _ in 0..6 {
            let x = rng.random_range(0..grid.n_x());
            gp.update(x, 0, rng.random::<f64>()).unwrap();
        }
        let beta = beta_from_xi(grid.joint_size(), 1.3).beta;
        let spec = MeasureSpec::Expectation;
        let field = credible_field(&gp, beta, &spec, grid.dist()).unwrap();
        let x_hat = estimate_solution(&gp, &spec, grid.dist()).unwrap();
        let x = select_x_proposed(&field, x_hat);
        let max_ucb = field
            .per_x
            .iter()
            .map(|b| b.ucb)
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((field.per_x[x].ucb - max_ucb).abs());
    }
    report.check(
        "single-omega-ucb",
        worst <= 1e-10,
        format!("max |ucb(pick) − max ucb| = {worst:.2e} over 50 states"),
    );
}

fn telescoping(report: &mut Report) {
    let grid = Arc::new(
        ProblemGrid::new(
            (0..4).map(|i| vec![i as f64]).collect(),
            (0..3).map(|j| vec![j as f64 * 1.5]).collect(),
            EnvDist::uniform(3),
            CoordMode::Concat,
        )
        .unwrap(),
    );
    let kernel = KernelSpec::SquaredExponential { lengthscale: 1.0, variance: 1.0 };
    let noise = 0.3;
    let mut gp = GPosterior::new(kernel, noise, grid.clone()).unwrap();
    let mut rng = stream_rng(0x5e1f, &[5]);
    let mut sum = 0.0;
    for _ in 0..10 {
        let x = rng.random_range(0..grid.n_x());
        let w = rng.random_range(0..grid.n_w());
        sum += 0.5 * (gp.var_at(x, w) / noise).ln_1p();
        gp.update(x, w, rng.random::<f64>()).unwrap();
    }
    let diff = (gp.realized_info_gain() - sum).abs();
    report.check(
        "info-gain-telescoping",
        diff < 1e-8,
        format!("|determinant route − telescoped sum| = {diff:.2e}"),
    );
}

fn determinism(report: &mut Report) {
    // A tiny campaign, run twice into different directories.
    let config = parse_config_text(
        "problem = syn2d\nstrategies = proposed, random\niterations = 5\nrepetitions = 2\nseed = 11\nbound_check = true\n",
    )
    .unwrap();
    let base = std::env::temp_dir().join(format!("rmbo-selftest-{}", std::process::id()));
    let run_once = |dir: &std::path::Path| -> Vec<(String, Vec<u8>)> {
        let result = run_campaign(&config).expect("selftest campaign");
        let files = emit_csv(&result, dir).expect("selftest emit");
        files
            .into_iter()
            .map(|p| {
                let name = p.file_name().unwrap().to_string_lossy().into_owned();
                (name, std::fs::read(&p).unwrap())
            })
            .collect()
    };
    let a = run_once(&base.join("a"));
    let b = run_once(&base.join("b"));
    let _ = std::fs::remove_dir_all(&base);
    report.check(
        "determinism",
        a == b,
        format!("{} files compared byte-for-byte", a.len()),
    );
    // 2D synthetic tables are seed-reproducible too.
    let grid = Arc::new(
        gen_grid(5.0, 2, 8).unwrap(),
    );
    let t1 = synthetic_2d(&grid, 5).unwrap();
    let t2 = synthetic_2d(&grid, 5).unwrap();
    let same = t1.values() == t2.values();
    let truth = true_optimum(&t1, &MeasureSpec::Expectation, grid.dist()).unwrap();
    report.check(
        "oracle-reproducibility",
        same && truth.f_values.len() == grid.n_x(),
        "synthetic tables identical across rebuilds".into(),
    );
}
