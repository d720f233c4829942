//! Dense lower-triangular Cholesky with a jitter ladder.

use crate::error::{CoreError, Result};

/// Jitter multipliers tried in order when a factorization hits a negative
/// pivot; each value scales the matrix's largest diagonal entry.
pub(crate) const JITTER_LADDER: [f64; 8] =
    [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// In-place Cholesky of the lower triangle of the row-major n×n matrix `a`.
///
/// Pivots within `pivot_tol` of zero are treated as exactly zero and their
/// column is zeroed (positive-semidefinite input); pivots below `-pivot_tol`
/// abort with the offending column index.
pub(crate) fn cholesky_in_place(
    a: &mut [f64],
    n: usize,
    pivot_tol: f64,
) -> std::result::Result<(), usize> {
    debug_assert_eq!(a.len(), n * n);
    for i in 0..n {
        for j in 0..i {
            let (head, tail) = a.split_at_mut(i * n);
            let row_j = &head[j * n..j * n + j];
            let row_i = &tail[..j];
            let mut s = tail[j];
            for k in 0..j {
                s -= row_i[k] * row_j[k];
            }
            let d = head[j * n + j];
            tail[j] = if d == 0.0 { 0.0 } else { s / d };
        }
        let mut s = a[i * n + i];
        for k in 0..i {
            let v = a[i * n + k];
            s -= v * v;
        }
        if s < -pivot_tol {
            return Err(i);
        }
        a[i * n + i] = if s <= pivot_tol { 0.0 } else { s.sqrt() };
    }
    Ok(())
}

/// Factorizes `base` + δ·scale·I for the first jitter step δ that succeeds.
/// Returns the packed lower factor and the absolute jitter that was added.
pub(crate) fn cholesky_with_ladder(base: &[f64], n: usize, scale: f64) -> Result<(Vec<f64>, f64)> {
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let pivot_tol = 1e-14 * scale;
    for &step in JITTER_LADDER.iter() {
        let jitter = step * scale;
        let mut work = base.to_vec();
        for i in 0..n {
            work[i * n + i] += jitter;
        }
        if cholesky_in_place(&mut work, n, pivot_tol).is_ok() {
            // Zero the strict upper triangle so later products can treat the
            // buffer as a clean lower factor.
            for i in 0..n {
                for j in (i + 1)..n {
                    work[i * n + j] = 0.0;
                }
            }
            return Ok((work, jitter));
        }
    }
    Err(CoreError::NumericalFailure(format!(
        "cholesky failed for {n}x{n} matrix even with jitter {:.0e}",
        JITTER_LADDER.last().unwrap() * scale
    )))
}
