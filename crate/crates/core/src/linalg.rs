//! Small dense least-squares helpers shared by the fitting modules.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum LstsqError {
    #[error("design matrix has {rows} rows for {cols} unknowns")]
    Underdetermined { rows: usize, cols: usize },
    #[error("condition number {cond:.3e} exceeds limit {limit:.1e}")]
    IllConditioned { cond: f64, limit: f64 },
}

/// Least-squares solution of `a x ≈ b` by Householder QR.
///
/// Columns are equilibrated (scaled to unit max-abs) first; the returned
/// condition number is that of the equilibrated matrix.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, cond_limit: f64) -> Result<(DVector<f64>, f64), LstsqError> {
    let (rows, cols) = a.shape();
    if rows < cols || cols == 0 {
        return Err(LstsqError::Underdetermined { rows, cols });
    }
    let scales: Vec<f64> = (0..cols)
        .map(|j| {
            let m = a.column(j).amax();
            if m > 0.0 { m } else { 1.0 }
        })
        .collect();
    let mut scaled = a.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }
    let sv = scaled.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= cond_limit) {
        return Err(LstsqError::IllConditioned { cond, limit: cond_limit });
    }
    let qr = scaled.qr();
    let qtb = qr.q().transpose() * b;
    let r = qr.r();
    let y = r
        .solve_upper_triangular(&qtb)
        .ok_or(LstsqError::IllConditioned { cond: f64::INFINITY, limit: cond_limit })?;
    let x = DVector::from_iterator(cols, y.iter().zip(&scales).map(|(v, s)| v / s));
    Ok((x, cond))
}
