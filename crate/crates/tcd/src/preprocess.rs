//! Scene preprocessing: smoothing, resampling, and lagged design matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scene::TimeSeriesScene;

/// Trailing moving average with a shrinking window at the start.
///
/// Output sample `t` is the mean of the last `window` samples up to and
/// including `t`; the first `window - 1` samples average what is available,
/// so the series length is preserved. `window = 0` is an error.
pub fn moving_average(scene: &TimeSeriesScene, window: usize) -> Result<TimeSeriesScene> {
    if window == 0 {
        return Err(Error::InvalidInput("moving average window must be >= 1".into()));
    }
    let t = scene.n_samples();
    let n = scene.n_vars();
    let values = scene.values();
    let mut out = DMatrix::zeros(t, n);
    for c in 0..n {
        let mut running = 0.0;
        for r in 0..t {
            running += values[(r, c)];
            if r >= window {
                running -= values[(r - window, c)];
            }
            let len = (r + 1).min(window);
            out[(r, c)] = running / len as f64;
        }
    }
    TimeSeriesScene::new(
        scene.scene_id.clone(),
        scene.variant,
        scene.variable_names.clone(),
        scene.sample_rate_hz,
        out,
    )
}

/// Resamples to `target_rate_hz` by linear interpolation.
///
/// Output times are `k / target_rate_hz` starting at zero; samples beyond the
/// original recording are never extrapolated. Fewer than 2 output samples is
/// an error.
pub fn resample_linear(scene: &TimeSeriesScene, target_rate_hz: f64) -> Result<TimeSeriesScene> {
    if !(target_rate_hz > 0.0 && target_rate_hz.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "target rate must be positive and finite, got {target_rate_hz}"
        )));
    }
    let t_in = scene.n_samples();
    let last_time = (t_in - 1) as f64 / scene.sample_rate_hz;
    let t_out = (last_time * target_rate_hz).floor() as usize + 1;
    if t_out < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            actual: t_out,
        });
    }
    let n = scene.n_vars();
    let values = scene.values();
    let mut out = DMatrix::zeros(t_out, n);
    for k in 0..t_out {
        // Position of the output sample on the input grid, in input samples.
        let pos = (k as f64 / target_rate_hz) * scene.sample_rate_hz;
        let i0 = (pos.floor() as usize).min(t_in - 1);
        let frac = pos - i0 as f64;
        for c in 0..n {
            out[(k, c)] = if frac == 0.0 || i0 + 1 >= t_in {
                values[(i0, c)]
            } else {
                values[(i0, c)] * (1.0 - frac) + values[(i0 + 1, c)] * frac
            };
        }
    }
    TimeSeriesScene::new(
        scene.scene_id.clone(),
        scene.variant,
        scene.variable_names.clone(),
        target_rate_hz,
        out,
    )
}

/// Builds the lagged regression problem for the given targets and predictors.
///
/// Returns `(design, response)`. Row `r` corresponds to prediction time
/// `t = max_lag + r`. Design columns are predictor-major, lags ascending:
/// column `p * max_lag + (l - 1)` holds predictor `p`'s value at time `t - l`.
/// The response holds the target values at time `t`, one column per target.
pub fn lagged_design(
    scene: &TimeSeriesScene,
    targets: &[usize],
    predictors: &[usize],
    max_lag: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if max_lag == 0 {
        return Err(Error::InvalidInput("max lag must be >= 1".into()));
    }
    if targets.is_empty() || predictors.is_empty() {
        return Err(Error::InvalidInput(
            "need at least one target and one predictor".into(),
        ));
    }
    let t = scene.n_samples();
    let n = scene.n_vars();
    for &v in targets.iter().chain(predictors) {
        if v >= n {
            return Err(Error::InvalidInput(format!(
                "variable index {v} out of range for {n} variables"
            )));
        }
    }
    if max_lag >= t {
        return Err(Error::InsufficientSamples {
            required: max_lag + 1,
            actual: t,
        });
    }
    let rows = t - max_lag;
    let values = scene.values();
    let mut design = DMatrix::zeros(rows, predictors.len() * max_lag);
    let mut response = DMatrix::zeros(rows, targets.len());
    for r in 0..rows {
        let now = max_lag + r;
        for (pi, &p) in predictors.iter().enumerate() {
            for lag in 1..=max_lag {
                design[(r, pi * max_lag + (lag - 1))] = values[(now - lag, p)];
            }
        }
        for (ti, &tv) in targets.iter().enumerate() {
            response[(r, ti)] = values[(now, tv)];
        }
    }
    Ok((design, response))
}
