//! Shared constructors for synthetic scenes with known causal structure,
//! used by the method tests.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scene::{TimeSeriesScene, Variant};

fn build(names: &[&str], cols: Vec<Vec<f64>>) -> TimeSeriesScene {
    let t = cols[0].len();
    let mut values = DMatrix::zeros(t, cols.len());
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            values[(r, c)] = *v;
        }
    }
    TimeSeriesScene::new(
        "synthetic",
        Variant::Velocity,
        names.iter().map(|s| s.to_string()).collect(),
        10.0,
        values,
    )
    .unwrap()
}

/// `n` mutually independent standard-normal series.
pub fn independent_noise_scene(seed: u64, t: usize, n: usize) -> TimeSeriesScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..t).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    build(&name_refs, cols)
}

/// Three series where `y_t = coef·x_{t−lag} + noise·e_t`; `x` and `z` are
/// independent white noise. Ground truth: the single edge x→y.
pub fn lagged_pair_scene(seed: u64, t: usize, lag: usize, coef: f64, noise: f64) -> TimeSeriesScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..t).map(|_| StandardNormal.sample(&mut rng)).collect();
    let z: Vec<f64> = (0..t).map(|_| StandardNormal.sample(&mut rng)).collect();
    let y: Vec<f64> = (0..t)
        .map(|i| {
            let drive = if i >= lag { coef * x[i - lag] } else { 0.0 };
            let e: f64 = StandardNormal.sample(&mut rng);
            drive + noise * e
        })
        .collect();
    build(&["x", "y", "z"], vec![x, y, z])
}

/// Mediator chain x→m→y: `m` depends on `x`'s lags only, `y` on `m`'s lags
/// only. There is no direct x→y mechanism.
pub fn mediator_chain_scene(seed: u64, t: usize) -> TimeSeriesScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..t).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut m = vec![0.0f64; t];
    let mut y = vec![0.0f64; t];
    for i in 0..t {
        let em: f64 = StandardNormal.sample(&mut rng);
        let ey: f64 = StandardNormal.sample(&mut rng);
        m[i] = if i >= 2 { 0.8 * x[i - 2] } else { 0.0 } + 0.5 * em;
        y[i] = if i >= 3 { 0.8 * m[i - 3] } else { 0.0 } + 0.5 * ey;
    }
    build(&["x", "m", "y"], vec![x, m, y])
}

/// Two independent AR(1) processes with strong autocorrelation.
pub fn ar1_pair_scene(seed: u64, t: usize, phi: f64) -> TimeSeriesScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0f64; t];
    let mut y = vec![0.0f64; t];
    for i in 1..t {
        let ex: f64 = StandardNormal.sample(&mut rng);
        let ey: f64 = StandardNormal.sample(&mut rng);
        x[i] = phi * x[i - 1] + ex;
        y[i] = phi * y[i - 1] + ey;
    }
    build(&["x", "y"], vec![x, y])
}

/// Two-variable model with uniform (non-Gaussian) innovations, an
/// instantaneous effect x→y, and lag effects on both variables.
pub fn uniform_instantaneous_scene(seed: u64, t: usize) -> TimeSeriesScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Uniform on [-1, 1]: bounded, distinctly non-Gaussian.
    let unif = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0f64..1.0);
    let mut x = vec![0.0f64; t];
    let mut y = vec![0.0f64; t];
    for i in 0..t {
        let ex = unif(&mut rng);
        let ey = unif(&mut rng);
        let x_lag = if i >= 1 { 0.3 * x[i - 1] } else { 0.0 };
        let y_lag = if i >= 1 { 0.3 * y[i - 1] + 0.2 * x[i - 1] } else { 0.0 };
        x[i] = x_lag + ex;
        y[i] = y_lag + 0.7 * x[i] + ey;
    }
    build(&["x", "y"], vec![x, y])
}

/// White-noise `x` driving `y` at a single known lag; `y` adds fresh noise.
pub fn chain_for_sink_search(seed: u64, t: usize, lag: usize, coef: f64) -> TimeSeriesScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..t).map(|_| StandardNormal.sample(&mut rng)).collect();
    let y: Vec<f64> = (0..t)
        .map(|i| {
            let e: f64 = StandardNormal.sample(&mut rng);
            if i >= lag {
                coef * x[i - lag] + e
            } else {
                e
            }
        })
        .collect();
    build(&["x", "y"], vec![x, y])
}

/// Hidden confounder: an unobserved autocorrelated series drives both
/// observed variables simultaneously; neither observed variable causes the
/// other, and no lagged functional model fits in either direction.
pub fn confounded_pair_scene(seed: u64, t: usize) -> TimeSeriesScene {
    // A hidden AR(1) process drives both outputs at the same instant. No
    // lagged model in either direction can absorb the shared innovation,
    // so residual-independence checks must fail both ways.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hidden = 0.0f64;
    let mut x = Vec::with_capacity(t);
    let mut y = Vec::with_capacity(t);
    for _ in 0..t {
        let w: f64 = StandardNormal.sample(&mut rng);
        hidden = 0.8 * hidden + w;
        let e_x: f64 = StandardNormal.sample(&mut rng);
        let e_y: f64 = StandardNormal.sample(&mut rng);
        x.push(2.0 * hidden + e_x);
        y.push(2.0 * hidden + e_y);
    }
    build(&["x", "y"], vec![x, y])
}

/// Noise-free VAR(1) trajectory `v_t = A₁ v_{t−1}` from a decaying rotation,
/// so every sample satisfies the linear relation exactly.
pub fn noiseless_var1_scene(t: usize) -> (TimeSeriesScene, DMatrix<f64>) {
    // Rotation scaled by 0.8: spectral radius 0.8, entries {0, ±0.8}.
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.8, -0.8, 0.0]);
    let mut x = vec![0.0f64; t];
    let mut y = vec![0.0f64; t];
    // Large start: the squared loss then dwarfs the fixed l1 penalty, so the
    // fit is effectively unpenalized and the exact relation is recoverable.
    x[0] = 1.0e10;
    y[0] = 2.0e10;
    for i in 1..t {
        x[i] = a[(0, 0)] * x[i - 1] + a[(0, 1)] * y[i - 1];
        y[i] = a[(1, 0)] * x[i - 1] + a[(1, 1)] * y[i - 1];
    }
    (build(&["x", "y"], vec![x, y]), a)
}
