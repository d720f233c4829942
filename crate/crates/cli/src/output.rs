//! Plot-ready CSV emission.
//!
//! Numbers are written with Rust's shortest round-trip decimal formatting,
//! so re-reading a file reproduces the exact f64 values and reruns of the
//! same campaign produce byte-identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::campaign::{BoundsReport, CampaignResult, CliError};

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes regret summaries, per-repetition traces and (when present) the
/// bound table. Returns the created file paths in a stable order.
pub fn emit_csv(result: &CampaignResult, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();

    for strategy in &result.strategies {
        let token = strategy.kind.token();
        let mut regret = String::from("t,mean_regret,se2\n");
        for t in 0..result.iterations {
            regret.push_str(&format!(
                "{},{},{}\n",
                t + 1,
                strategy.mean_regret[t],
                strategy.se2[t]
            ));
        }
        let path = dir.join(format!("regret_{token}.csv"));
        write_file(&path, &regret)?;
        written.push(path);

        for rep in &strategy.reps {
            let mut trace =
                String::from("t,beta,x_index,w_index,y,xhat_index,regret,info_gain\n");
            for r in &rep.records {
                trace.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.t,
                    r.beta,
                    r.x,
                    r.w,
                    r.y,
                    r.x_hat,
                    r.regret.unwrap_or(f64::NAN),
                    r.info_gain
                ));
            }
            let path = dir.join(format!("trace_{token}_{}.csv", rep.rep));
            write_file(&path, &trace)?;
            written.push(path);
        }
    }

    if let Some(bounds) = &result.bounds {
        let path = dir.join("bounds.csv");
        write_file(&path, &bounds_csv(bounds))?;
        written.push(path);
    }
    Ok(written)
}

/// Renders the bound table. Measures without a width function have no
/// theoretical guarantee; their bound columns carry the `no_guarantee`
/// marker instead of numbers.
pub fn bounds_csv(bounds: &BoundsReport) -> String {
    let mut out = String::from("t,gamma_hat,gamma_certified,bound_ER,bound_er,markov_R_0.05\n");
    for t in 0..bounds.gamma_hat.len() {
        match &bounds.theory {
            Some(cols) => out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                t + 1,
                bounds.gamma_hat[t],
                bounds.gamma_certified[t],
                cols.cumulative[t],
                cols.simple[t],
                cols.markov[t]
            )),
            None => out.push_str(&format!(
                "{},{},{},no_guarantee,no_guarantee,no_guarantee\n",
                t + 1,
                bounds.gamma_hat[t],
                bounds.gamma_certified[t]
            )),
        }
    }
    out
}
