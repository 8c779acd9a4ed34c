//! Correlation measures: Pearson, partial correlation via residualization,
//! the Fisher-z significance transform, and a lagged cross-covariance
//! independence test with Bonferroni aggregation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::stats::ols::ols_fit;
use crate::stats::tests::{normal_two_sided, TestDof, TestResult};

/// Pearson correlation coefficient. Zero variance in either input is an
/// error.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { required: 2, actual: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance in correlation input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Partial correlation of `x` and `y` given the columns of `z`.
///
/// Both series are regressed on `z` augmented with an intercept column and
/// the residuals are correlated; an empty `z` reduces to plain Pearson
/// correlation. Zero-variance residuals (degenerate conditioning) are an
/// error.
pub fn partial_correlation(x: &[f64], y: &[f64], z: &DMatrix<f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if z.ncols() == 0 {
        return pearson(x, y);
    }
    let n = x.len();
    if z.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "conditioning matrix has {} rows for {} samples",
            z.nrows(),
            n
        )));
    }
    if n <= z.ncols() + 2 {
        return Err(Error::InsufficientSamples {
            required: z.ncols() + 3,
            actual: n,
        });
    }
    // Augment with an intercept so conditioning is on affine functions of z.
    let mut design = DMatrix::zeros(n, z.ncols() + 1);
    design.columns_mut(0, z.ncols()).copy_from(z);
    design.column_mut(z.ncols()).fill(1.0);
    // Least-squares residuals are unique even when the design is not, so a
    // single Cholesky of the normal matrix serves both solves; only designs
    // whose normal matrix fails to factor need the rank-revealing solver.
    let (res_x, res_y) = match normal_equation_residual_pair(&design, x, y) {
        Some(pair) => pair,
        None => {
            let rx = ols_fit(&design, &DVector::from_column_slice(x))?;
            let ry = ols_fit(&design, &DVector::from_column_slice(y))?;
            (
                rx.residuals.column(0).iter().copied().collect(),
                ry.residuals.column(0).iter().copied().collect(),
            )
        }
    };
    // Degeneracy is judged relative to scale: a constant series carries
    // only rounding noise around its mean, and a residual whose variance
    // has collapsed relative to the input means the series is numerically
    // a linear function of the conditioning set. Correlations computed
    // from such leftovers would be meaningless.
    let variance = |v: &[f64]| -> f64 {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / v.len() as f64
    };
    let mean_square = |v: &[f64]| -> f64 {
        v.iter().map(|s| s * s).sum::<f64>() / v.len() as f64
    };
    for (label, series, res) in [("first", x, &res_x), ("second", y, &res_y)] {
        let var_in = variance(series);
        if var_in <= 1e-24 * mean_square(series) {
            return Err(Error::Degenerate(format!("{label} series is constant")));
        }
        if variance(res) <= 1e-24 * var_in {
            return Err(Error::Degenerate(format!(
                "{label} series is a linear function of the conditioning set"
            )));
        }
    }
    pearson(&res_x, &res_y).map_err(|e| match e {
        Error::Degenerate(_) => {
            Error::Degenerate("zero-variance residual after conditioning".into())
        }
        other => other,
    })
}

/// Residuals of `x` and `y` regressed on `design` via the normal equations,
/// or `None` when the normal matrix is numerically indefinite or the result
/// is non-finite. Much cheaper than a singular-value decomposition for the
/// tall, thin designs conditioning builds.
fn normal_equation_residual_pair(
    design: &DMatrix<f64>,
    x: &[f64],
    y: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let xtx = design.transpose() * design;
    let chol = nalgebra::Cholesky::new(xtx)?;
    let solve = |rhs: &[f64]| -> Option<Vec<f64>> {
        let v = DVector::from_column_slice(rhs);
        let beta = chol.solve(&(design.transpose() * &v));
        let res = v - design * beta;
        if res.iter().all(|r| r.is_finite()) {
            Some(res.iter().copied().collect())
        } else {
            None
        }
    };
    Some((solve(x)?, solve(y)?))
}

/// Fisher-z significance test for a (partial) correlation estimated from
/// `n_obs` samples conditioning on `n_conditioned` variables.
///
/// `z = √(n − |Z| − 3)·atanh(ρ)` against the standard normal, two-sided.
/// `|ρ| = 1` yields `p = 0` by convention; non-positive degrees of freedom
/// are an error.
pub fn fisher_z_test(rho: f64, n_obs: usize, n_conditioned: usize) -> Result<TestResult> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::InvalidInput(format!("correlation {rho} outside [-1, 1]")));
    }
    if n_obs <= n_conditioned + 3 {
        return Err(Error::InvalidInput(format!(
            "Fisher-z needs n > |Z| + 3: n {n_obs}, |Z| {n_conditioned}"
        )));
    }
    let effective = n_obs - n_conditioned - 3;
    let dof = TestDof::Normal { effective_n: effective };
    if rho.abs() >= 1.0 {
        return Ok(TestResult {
            statistic: f64::INFINITY,
            p_value: 0.0,
            dof,
        });
    }
    let z = (effective as f64).sqrt() * rho.atanh();
    Ok(TestResult {
        statistic: z,
        p_value: normal_two_sided(z),
        dof,
    })
}

/// Lagged cross-covariance independence test.
///
/// Correlates `a[t]` with `b[t + lag]` for every lag in `−max_lag..=max_lag`,
/// scores each lag with Fisher-z at the overlap sample size, and aggregates
/// by Bonferroni: overall p = min over lags of per-lag p × (2·max_lag + 1),
/// clamped to 1. The inputs are independent at level `alpha` iff the overall
/// p exceeds `alpha`. The winning lag is reported in the dof descriptor.
pub fn cross_covariance_independence(
    a: &[f64],
    b: &[f64],
    max_lag: usize,
    _alpha: f64,
) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    // The shortest overlap (n - max_lag) must still carry a Fisher-z test.
    if n <= max_lag + 3 {
        return Err(Error::InsufficientSamples {
            required: max_lag + 4,
            actual: n,
        });
    }
    let comparisons = 2 * max_lag + 1;
    let mut best_p = f64::INFINITY;
    let mut best_lag = 0i64;
    let mut best_stat = 0.0;
    for lag in -(max_lag as i64)..=(max_lag as i64) {
        let overlap = n - lag.unsigned_abs() as usize;
        // a[t] against b[t + lag] over the valid range of t.
        let (a_slice, b_slice) = if lag >= 0 {
            (&a[..overlap], &b[lag as usize..])
        } else {
            (&a[(-lag) as usize..], &b[..overlap])
        };
        let rho = pearson(a_slice, b_slice).map_err(|e| match e {
            Error::Degenerate(_) => Error::Degenerate(format!(
                "constant input in cross-covariance test at lag {lag}"
            )),
            other => other,
        })?;
        let per_lag = fisher_z_test(rho, overlap, 0)?;
        if per_lag.p_value < best_p {
            best_p = per_lag.p_value;
            best_lag = lag;
            best_stat = per_lag.statistic;
        }
    }
    let p_value = (best_p * comparisons as f64).min(1.0);
    Ok(TestResult {
        statistic: best_stat,
        p_value,
        dof: TestDof::MinBonferroni {
            comparisons,
            dominant_lag: best_lag,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    }

    #[test]
    fn identical_series_correlate_perfectly() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let empty = DMatrix::zeros(4, 0);
        assert_relative_eq!(partial_correlation(&x, &x, &empty).unwrap(), 1.0);
    }

    #[test]
    fn empty_conditioning_equals_pearson() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = gaussian(100, &mut rng);
        let y = gaussian(100, &mut rng);
        let empty = DMatrix::zeros(100, 0);
        let got = partial_correlation(&x, &y, &empty).unwrap();
        let want = pearson(&x, &y).unwrap();
        assert_relative_eq!(got, want, epsilon = 1e-12);
    }

    #[test]
    fn conditioning_removes_common_cause() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 2000;
        let z = gaussian(n, &mut rng);
        let e1 = gaussian(n, &mut rng);
        let e2 = gaussian(n, &mut rng);
        let x: Vec<f64> = (0..n).map(|i| z[i] + e1[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| z[i] + e2[i]).collect();
        let raw = pearson(&x, &y).unwrap();
        assert!(raw > 0.3, "common cause should induce correlation, got {raw}");
        let zmat = DMatrix::from_column_slice(n, 1, &z);
        let partial = partial_correlation(&x, &y, &zmat).unwrap();
        assert!(partial.abs() < 0.1, "conditioning should remove it, got {partial}");
    }

    #[test]
    fn partial_correlation_matches_precision_matrix_identity() {
        // For any sample, the residual-based partial correlation equals
        // -Omega_xy / sqrt(Omega_xx * Omega_yy) for the inverse sample
        // covariance Omega, an exact algebraic identity.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 200;
        let z = gaussian(n, &mut rng);
        let x: Vec<f64> = (0..n).map(|i| 0.7 * z[i] + gaussian(1, &mut rng)[0]).collect();
        let y: Vec<f64> = (0..n).map(|i| -0.4 * z[i] + 0.5 * x[i] + gaussian(1, &mut rng)[0]).collect();
        let zmat = DMatrix::from_column_slice(n, 1, &z);
        let got = partial_correlation(&x, &y, &zmat).unwrap();

        let mut data = DMatrix::zeros(n, 3);
        for i in 0..n {
            data[(i, 0)] = x[i];
            data[(i, 1)] = y[i];
            data[(i, 2)] = z[i];
        }
        let means: Vec<f64> = (0..3).map(|c| data.column(c).sum() / n as f64).collect();
        let mut cov = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for r in 0..n {
                    s += (data[(r, i)] - means[i]) * (data[(r, j)] - means[j]);
                }
                cov[(i, j)] = s / (n - 1) as f64;
            }
        }
        let omega = cov.try_inverse().unwrap();
        let want = -omega[(0, 1)] / (omega[(0, 0)] * omega[(1, 1)]).sqrt();
        assert_relative_eq!(got, want, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_conditioning_is_an_error() {
        let z: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let x = z.clone(); // x is exactly linear in z: residuals vanish
        let y: Vec<f64> = z.iter().map(|v| v * 2.0).collect();
        let zmat = DMatrix::from_column_slice(20, 1, &z);
        assert!(matches!(
            partial_correlation(&x, &y, &zmat),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn fisher_z_reference_value() {
        // rho 0.5, n 100, no conditioning: z = sqrt(97) * atanh(0.5) ~ 5.41
        let r = fisher_z_test(0.5, 100, 0).unwrap();
        assert_relative_eq!(r.statistic, (97.0f64).sqrt() * 0.5f64.atanh(), epsilon = 1e-12);
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn fisher_z_zero_rho_gives_p_one() {
        let r = fisher_z_test(0.0, 50, 2).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn fisher_z_sign_symmetric() {
        let a = fisher_z_test(0.3, 40, 1).unwrap();
        let b = fisher_z_test(-0.3, 40, 1).unwrap();
        assert_relative_eq!(a.p_value, b.p_value, epsilon = 1e-15);
    }

    #[test]
    fn fisher_z_unit_rho_gives_p_zero() {
        let r = fisher_z_test(1.0, 30, 0).unwrap();
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn fisher_z_rejects_tiny_samples() {
        assert!(fisher_z_test(0.2, 4, 1).is_err());
    }

    #[test]
    fn shifted_series_found_dependent_at_shift_lag() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 500;
        let a = gaussian(n + 3, &mut rng);
        // b[t] = a[t - 3], so b lags a by 3 samples.
        let b: Vec<f64> = (0..n).map(|t| a[t]).collect();
        let a_now: Vec<f64> = (3..n + 3).map(|t| a[t]).collect();
        let r = cross_covariance_independence(&a_now, &b, 10, 0.05).unwrap();
        assert!(r.p_value < 0.05, "shifted copy must be detected, p = {}", r.p_value);
        match r.dof {
            TestDof::MinBonferroni { dominant_lag, .. } => assert_eq!(dominant_lag, 3),
            other => panic!("unexpected dof descriptor {other:?}"),
        }
    }

    #[test]
    fn independent_noise_passes_in_most_trials() {
        let mut passes = 0;
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = gaussian(500, &mut rng);
            let b = gaussian(500, &mut rng);
            let r = cross_covariance_independence(&a, &b, 25, 0.05).unwrap();
            if r.p_value > 0.05 {
                passes += 1;
            }
        }
        assert!(passes >= 45, "only {passes}/50 independent pairs passed");
    }

    #[test]
    fn bonferroni_never_reduces_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = gaussian(200, &mut rng);
        let b = gaussian(200, &mut rng);
        let r = cross_covariance_independence(&a, &b, 5, 0.05).unwrap();
        // Recompute the per-lag minimum directly.
        let mut min_p = f64::INFINITY;
        for lag in -5i64..=5 {
            let overlap = 200 - lag.unsigned_abs() as usize;
            let (xs, ys) = if lag >= 0 {
                (&a[..overlap], &b[lag as usize..])
            } else {
                (&a[(-lag) as usize..], &b[..overlap])
            };
            let rho = pearson(xs, ys).unwrap();
            min_p = min_p.min(fisher_z_test(rho, overlap, 0).unwrap().p_value);
        }
        assert!(r.p_value >= min_p - 1e-15);
    }

    #[test]
    fn constant_input_is_an_error() {
        let a = vec![1.0; 100];
        let b: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!(matches!(
            cross_covariance_independence(&a, &b, 5, 0.05),
            Err(Error::Degenerate(_))
        ));
    }
}
