use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rmbo_cli::campaign::{compute_bounds, measure_spec, run_campaign, CliError, ProblemParts};
use rmbo_cli::config::parse_config;
use rmbo_cli::output::{bounds_csv, emit_csv};

/// Bayesian optimization of robustness measures on finite grids.
#[derive(Parser)]
#[command(name = "rmbo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign described by a config file and write CSV outputs.
    Run { config: PathBuf },
    /// Write a synthetic stand-in for the carrier-lifetime measurement CSV.
    GenCarrierStandin { out: PathBuf },
    /// Run the built-in invariant checks.
    Selftest,
    /// Compute only the information-gain and regret-bound table.
    Bounds { config: PathBuf },
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config } => {
            let config = parse_config(&config)?;
            for w in &config.warnings {
                eprintln!("warning: {w}");
            }
            let result = run_campaign(&config)?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            let files = emit_csv(&result, &config.output)?;
            eprintln!(
                "wrote {} file(s) to {}",
                files.len(),
                config.output.display()
            );
            Ok(())
        }
        Command::GenCarrierStandin { out } => {
            rmbo_core::bench::write_carrier_standin(&out).map_err(CliError::Core)?;
            eprintln!("wrote stand-in measurement file to {}", out.display());
            Ok(())
        }
        Command::Selftest => {
            let code = rmbo_cli::selftest::run();
            if code == 0 {
                Ok(())
            } else {
                std::process::exit(code)
            }
        }
        Command::Bounds { config } => {
            let config = parse_config(&config)?;
            for w in &config.warnings {
                eprintln!("warning: {w}");
            }
            let parts = ProblemParts::build(&config)?;
            let spec = measure_spec(&config);
            let bounds = compute_bounds(&config, &parts, &spec)?;
            std::fs::create_dir_all(&config.output).map_err(|source| CliError::Io {
                path: config.output.display().to_string(),
                source,
            })?;
            let path = config.output.join("bounds.csv");
            std::fs::write(&path, bounds_csv(&bounds)).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
