//! Ordinary least squares via a rank-revealing singular value decomposition.
//!
//! Lagged designs built from near-constant driving data are frequently
//! ill-conditioned, so the solver counts the numerical rank and falls back to
//! the minimum-norm solution on rank-deficient problems instead of failing.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A fitted least-squares model.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Estimated coefficients, one row per design column, one column per
    /// response column.
    pub coefficients: DMatrix<f64>,
    /// Response minus fitted values, same shape as the response.
    pub residuals: DMatrix<f64>,
    /// Residual sum of squares per response column.
    pub rss: Vec<f64>,
    /// Numerical rank of the design.
    pub rank: usize,
    /// Pseudo-inverse of the normal matrix, `(XᵀX)⁺`; the coefficient
    /// covariance is this scaled by the residual variance.
    pub normal_pinv: DMatrix<f64>,
}

impl OlsFit {
    /// Coefficient covariance `σ̂²·(XᵀX)⁺` for response column `col`, with
    /// `σ̂² = rss / (n − rank)`.
    pub fn coefficient_covariance(&self, col: usize) -> Result<DMatrix<f64>> {
        let n = self.residuals.nrows();
        if n <= self.rank {
            return Err(Error::InsufficientSamples {
                required: self.rank + 1,
                actual: n,
            });
        }
        let sigma2 = self.rss[col] / (n - self.rank) as f64;
        Ok(&self.normal_pinv * sigma2)
    }
}

/// Least-squares fit of possibly several response columns on one design.
///
/// Rank-deficient designs are solved by the minimum-norm solution. The design
/// must be non-empty, finite, and have at least as many rows as columns.
pub fn ols_fit_multi(design: &DMatrix<f64>, response: &DMatrix<f64>) -> Result<OlsFit> {
    let n = design.nrows();
    let k = design.ncols();
    if n == 0 || k == 0 {
        return Err(Error::InvalidInput("empty design matrix".into()));
    }
    if response.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "design has {n} rows but response has {}",
            response.nrows()
        )));
    }
    if n < k {
        return Err(Error::InsufficientSamples { required: k, actual: n });
    }
    if design.iter().any(|v| !v.is_finite()) || response.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in regression input".into()));
    }

    let svd = design.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let tol = sigma_max * n.max(k) as f64 * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();

    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");

    // beta = V * diag(1/sigma (where sigma > tol)) * Uᵀ * y
    let uty = u.transpose() * response;
    let mut scaled = uty;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let inv = if s > tol { 1.0 / s } else { 0.0 };
        scaled.row_mut(i).scale_mut(inv);
    }
    let coefficients = v_t.transpose() * scaled;

    let residuals = response - design * &coefficients;
    let rss = (0..response.ncols())
        .map(|c| residuals.column(c).iter().map(|r| r * r).sum())
        .collect();

    // (XᵀX)⁺ = V * diag(1/sigma² on the retained spectrum) * Vᵀ
    let mut v_scaled = v_t.transpose();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let inv2 = if s > tol { 1.0 / (s * s) } else { 0.0 };
        v_scaled.column_mut(i).scale_mut(inv2);
    }
    let normal_pinv = v_scaled * v_t;

    Ok(OlsFit {
        coefficients,
        residuals,
        rss,
        rank,
        normal_pinv,
    })
}

/// Single-response least squares: coefficients, residuals, and the residual
/// sum of squares.
pub fn ols_fit(design: &DMatrix<f64>, response: &DVector<f64>) -> Result<OlsFit> {
    let resp = DMatrix::from_column_slice(response.len(), 1, response.as_slice());
    ols_fit_multi(design, &resp)
}
