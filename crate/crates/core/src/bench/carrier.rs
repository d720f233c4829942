//! The tabulated carrier-lifetime problem.
//!
//! The measurement file is a CSV with header `x1,x2,lt`, one lattice point
//! per row, integer coordinates. The design set is the 8×8 lattice
//! {(22a−4, 18b−2)} and the environment set the 11×9 lattice
//! {(2a−12, 2b−10)}; the black-box value at (x, w) is the lifetime at the
//! shifted location x + w, which must be present in the file. Duplicate
//! coordinates keep the last row and emit a warning.

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::Array2;

use super::TabulatedOracle;
use crate::error::{CoreError, Result};
use crate::grid::{CoordMode, ProblemGrid};
use crate::measures::EnvDist;

/// The loaded problem: grid, noiseless oracle, and loader warnings.
#[derive(Debug)]
pub struct CarrierProblem {
    pub grid: ProblemGrid,
    pub oracle: TabulatedOracle,
    pub warnings: Vec<String>,
}

fn design_lattice() -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(64);
    for a in 1..=8i64 {
        for b in 1..=8i64 {
            out.push((22 * a - 4, 18 * b - 2));
        }
    }
    out
}

fn environment_lattice() -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(99);
    for a in 1..=11i64 {
        for b in 1..=9i64 {
            out.push((2 * a - 12, 2 * b - 10));
        }
    }
    out
}

fn parse_coordinate(field: &str, line: usize) -> Result<i64> {
    let v: f64 = field.trim().parse().map_err(|_| CoreError::ParseError {
        line,
        message: format!("cannot parse coordinate {field:?}"),
    })?;
    let r = v.round();
    if (v - r).abs() > 1e-9 || !r.is_finite() {
        return Err(CoreError::ParseError {
            line,
            message: format!("coordinate {field:?} is not an integer lattice value"),
        });
    }
    Ok(r as i64)
}

/// Loads the lifetime CSV and assembles the 64×99 problem table by
/// coordinate-addition lookup.
pub fn load_carrier_lifetime<P: AsRef<Path>>(path: P) -> Result<CarrierProblem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    let mut warnings = Vec::new();
    match lines.next() {
        Some((_, header)) if header.trim() == "x1,x2,lt" => {}
        Some((_, header)) => {
            return Err(CoreError::ParseError {
                line: 1,
                message: format!("expected header \"x1,x2,lt\", found {header:?}"),
            })
        }
        None => {
            return Err(CoreError::ParseError {
                line: 1,
                message: "empty file".into(),
            })
        }
    }
    let mut table: HashMap<(i64, i64), f64> = HashMap::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 3 {
            return Err(CoreError::ParseError {
                line,
                message: format!("expected 3 comma-separated fields, found {}", fields.len()),
            });
        }
        let x1 = parse_coordinate(fields[0], line)?;
        let x2 = parse_coordinate(fields[1], line)?;
        let lt: f64 = fields[2].trim().parse().map_err(|_| CoreError::ParseError {
            line,
            message: format!("cannot parse lifetime {:?}", fields[2]),
        })?;
        if !lt.is_finite() {
            return Err(CoreError::ParseError {
                line,
                message: "lifetime must be finite".into(),
            });
        }
        if table.insert((x1, x2), lt).is_some() {
            warnings.push(format!(
                "line {line}: duplicate coordinate ({x1}, {x2}); keeping the last value"
            ));
        }
    }

    let designs = design_lattice();
    let envs = environment_lattice();
    let mut values = Array2::zeros((designs.len(), envs.len()));
    for (xi, &(x1, x2)) in designs.iter().enumerate() {
        for (wi, &(w1, w2)) in envs.iter().enumerate() {
            let key = (x1 + w1, x2 + w2);
            match table.get(&key) {
                Some(&lt) => values[[xi, wi]] = lt,
                None => {
                    return Err(CoreError::DataError(format!(
                        "missing lattice point ({}, {}) needed for design ({x1}, {x2}) \
                         and environment ({w1}, {w2})",
                        key.0, key.1
                    )))
                }
            }
        }
    }

    let grid = ProblemGrid::new(
        designs
            .iter()
            .map(|&(a, b)| vec![a as f64, b as f64])
            .collect(),
        envs.iter().map(|&(a, b)| vec![a as f64, b as f64]).collect(),
        EnvDist::uniform(envs.len()),
        CoordMode::PairwiseSum,
    )?;
    // Measurements are treated as noiseless; the surrogate adds its own
    // nominal noise for numerical stability.
    let oracle = TabulatedOracle::new(values, 0.0)?;
    Ok(CarrierProblem {
        grid,
        oracle,
        warnings,
    })
}

/// The shifted-location lattice {(2a+6, 2b+6) | 1 ≤ a ≤ 88, 1 ≤ b ≤ 72}
/// covered by the measurement file.
pub fn shifted_lattice() -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(88 * 72);
    for a in 1..=88i64 {
        for b in 1..=72i64 {
            out.push((2 * a + 6, 2 * b + 6));
        }
    }
    out
}

/// Writes a synthetic stand-in measurement file covering the full lattice:
/// a smooth, positive, deterministic surface usable for tests and demos in
/// place of the proprietary dataset.
pub fn write_carrier_standin<P: AsRef<Path>>(path: P) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("x1,x2,lt\n");
    for (a, b) in shifted_lattice() {
        let (af, bf) = (a as f64, b as f64);
        let lt = 5.0
            + 2.0 * (af / 25.0).sin() * (bf / 20.0).cos()
            + 1.5 * (-((af - 100.0).powi(2) + (bf - 80.0).powi(2)) / 3000.0).exp();
        out.push_str(&format!("{a},{b},{lt}\n"));
    }
    let mut file = fs::File::create(path).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(out.as_bytes()).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })
}
