//! Hypothesis tests: nested-model F-test and Wald chi-squared block test.

use nalgebra::{DMatrix, DVector};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Degrees-of-freedom descriptor attached to a test result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestDof {
    /// F distribution with numerator and denominator degrees of freedom.
    F { numerator: usize, denominator: usize },
    /// Chi-squared distribution.
    ChiSquared { dof: usize },
    /// Standard normal after a variance-stabilizing transform; carries the
    /// effective sample size that set the scale.
    Normal { effective_n: usize },
    /// Minimum over several comparisons with a Bonferroni factor applied;
    /// records how many comparisons and which lag won.
    MinBonferroni { comparisons: usize, dominant_lag: i64 },
}

/// Outcome of a significance test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: TestDof,
}

/// Upper tail of the F distribution via the regularized incomplete beta
/// function.
pub fn f_survival(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

/// Upper tail of the chi-squared distribution via the regularized upper
/// incomplete gamma function.
pub fn chi2_survival(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma_ur(dof / 2.0, x / 2.0)
}

/// Two-sided tail of the standard normal, `P(|Z| ≥ |z|)`.
pub fn normal_two_sided(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// F-test comparing a restricted model nested inside a full model.
///
/// `q` is the number of extra parameters in the full model and
/// `full_model_df` its total parameter count; the denominator uses
/// `n_obs − full_model_df` residual degrees of freedom. An exactly-fitting
/// full model against a worse restricted one yields `p = 0`; a restricted
/// model at least as good as the full one yields `F = 0, p = 1`.
pub fn f_test_nested(
    rss_restricted: f64,
    rss_full: f64,
    q: usize,
    full_model_df: usize,
    n_obs: usize,
) -> Result<TestResult> {
    if q == 0 {
        return Err(Error::InvalidInput("F-test needs at least one extra parameter".into()));
    }
    if n_obs <= full_model_df {
        return Err(Error::InvalidInput(format!(
            "F-test denominator dof must be positive: n_obs {n_obs} <= model df {full_model_df}"
        )));
    }
    if !(rss_restricted >= 0.0 && rss_full >= 0.0) {
        return Err(Error::InvalidInput("negative residual sum of squares".into()));
    }
    let denom_dof = n_obs - full_model_df;
    let dof = TestDof::F {
        numerator: q,
        denominator: denom_dof,
    };
    if rss_restricted <= rss_full {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            dof,
        });
    }
    if rss_full == 0.0 {
        return Ok(TestResult {
            statistic: f64::INFINITY,
            p_value: 0.0,
            dof,
        });
    }
    let f = ((rss_restricted - rss_full) / q as f64) / (rss_full / denom_dof as f64);
    Ok(TestResult {
        statistic: f,
        p_value: f_survival(f, q as f64, denom_dof as f64),
        dof,
    })
}

/// Wald test that a block of coefficients is jointly zero.
///
/// Extracts the sub-vector `c` and covariance sub-matrix for `block`, forms
/// `cᵀ Σ_block⁻¹ c`, and compares against chi-squared with `|block|` degrees
/// of freedom. A singular block covariance signals collinear regressors and
/// is an error.
pub fn wald_chi2_block(
    coefficients: &DVector<f64>,
    covariance: &DMatrix<f64>,
    block: &[usize],
) -> Result<TestResult> {
    if block.is_empty() {
        return Err(Error::InvalidInput("empty coefficient block".into()));
    }
    let k = coefficients.len();
    if covariance.nrows() != k || covariance.ncols() != k {
        return Err(Error::InvalidInput(format!(
            "covariance is {}x{} but there are {k} coefficients",
            covariance.nrows(),
            covariance.ncols()
        )));
    }
    for &i in block {
        if i >= k {
            return Err(Error::InvalidInput(format!(
                "block index {i} out of range for {k} coefficients"
            )));
        }
    }
    let m = block.len();
    let c = DVector::from_fn(m, |i, _| coefficients[block[i]]);
    let sigma = DMatrix::from_fn(m, m, |i, j| covariance[(block[i], block[j])]);
    let chol = sigma
        .cholesky()
        .ok_or_else(|| Error::Singular("block covariance is not positive definite".into()))?;
    let solved = chol.solve(&c);
    let statistic = c.dot(&solved);
    Ok(TestResult {
        statistic,
        p_value: chi2_survival(statistic, m as f64),
        dof: TestDof::ChiSquared { dof: m },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equal_rss_gives_null_result() {
        let r = f_test_nested(5.0, 5.0, 3, 10, 50).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn perfect_full_fit_gives_zero_p() {
        let r = f_test_nested(1.0, 0.0, 2, 10, 50).unwrap();
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn worked_f_statistic() {
        // ((100-50)/25) / (50/100) = 4.0
        let r = f_test_nested(100.0, 50.0, 25, 0, 100).unwrap();
        assert_relative_eq!(r.statistic, 4.0, epsilon = 1e-12);
        assert!(r.p_value > 0.0 && r.p_value < 1e-4);
    }

    #[test]
    fn f_survival_closed_forms() {
        // F(2,2) has survival 1/(1+f).
        for f in [0.5, 1.0, 3.0, 10.0] {
            assert_relative_eq!(f_survival(f, 2.0, 2.0), 1.0 / (1.0 + f), epsilon = 1e-12);
        }
    }

    #[test]
    fn chi2_survival_closed_forms() {
        // dof 2 has survival exp(-x/2).
        for x in [0.1, 1.0, 4.0, 12.0] {
            assert_relative_eq!(chi2_survival(x, 2.0), (-x / 2.0).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn normal_two_sided_reference_point() {
        assert_relative_eq!(normal_two_sided(1.959964), 0.05, epsilon = 1e-6);
        assert_eq!(normal_two_sided(0.0), 1.0);
    }

    #[test]
    fn invalid_dof_is_an_error() {
        assert!(f_test_nested(2.0, 1.0, 0, 5, 50).is_err());
        assert!(f_test_nested(2.0, 1.0, 2, 50, 50).is_err());
    }

    #[test]
    fn wald_zero_block_gives_p_one() {
        let coef = DVector::from_column_slice(&[0.0, 0.0, 5.0]);
        let cov = DMatrix::identity(3, 3);
        let r = wald_chi2_block(&coef, &cov, &[0, 1]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn wald_single_coefficient_reference() {
        let coef = DVector::from_column_slice(&[2.0]);
        let cov = DMatrix::from_element(1, 1, 1.0);
        let r = wald_chi2_block(&coef, &cov, &[0]).unwrap();
        assert_relative_eq!(r.statistic, 4.0, epsilon = 1e-12);
        assert_relative_eq!(r.p_value, 0.0455, epsilon = 1e-4);
    }

    #[test]
    fn wald_scale_invariance() {
        let coef = DVector::from_column_slice(&[1.0, -2.0]);
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let base = wald_chi2_block(&coef, &cov, &[0, 1]).unwrap();
        let scaled = wald_chi2_block(&(&coef * 2.0), &(&cov * 4.0), &[0, 1]).unwrap();
        assert_relative_eq!(base.statistic, scaled.statistic, epsilon = 1e-12);
    }

    #[test]
    fn wald_singular_covariance_is_an_error() {
        let coef = DVector::from_column_slice(&[1.0, 1.0]);
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            wald_chi2_block(&coef, &cov, &[0, 1]),
            Err(Error::Singular(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn p_values_stay_in_unit_interval(
                rss_r in 0.0f64..1e6,
                extra in 0.0f64..1e6,
                q in 1usize..30,
                n_extra in 1usize..200,
            ) {
                let full_df = 2 * q;
                let n = full_df + n_extra;
                let r = f_test_nested(rss_r + extra, rss_r, q, full_df, n).unwrap();
                prop_assert!((0.0..=1.0).contains(&r.p_value));
            }

            #[test]
            fn f_statistic_monotone_in_gap(
                rss_f in 0.01f64..100.0,
                gap1 in 0.0f64..50.0,
                gap2 in 0.0f64..50.0,
            ) {
                let (lo, hi) = if gap1 < gap2 { (gap1, gap2) } else { (gap2, gap1) };
                let a = f_test_nested(rss_f + lo, rss_f, 3, 6, 40).unwrap();
                let b = f_test_nested(rss_f + hi, rss_f, 3, 6, 40).unwrap();
                prop_assert!(b.statistic >= a.statistic);
                prop_assert!(b.p_value <= a.p_value + 1e-12);
            }
        }
    }
}
