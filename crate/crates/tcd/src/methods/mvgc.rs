//! Multivariate Granger causality.
//!
//! One full vector-autoregression is fit per target over every variable's
//! lags; each candidate cause is then judged by a Wald chi-squared test on
//! its block of lag coefficients. Because all pairs are tested jointly, the
//! resulting p-values go through Benjamini-Hochberg FDR control before edges
//! are emitted. Conditioning on all remaining variables lets the test
//! separate direct influence from paths through mediators.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{LaggedCoefficients, SummaryGraph};
use crate::methods::{centered, require_samples, DiscoveryOutcome, LinkTest, MethodConfig};
use crate::preprocess::lagged_design;
use crate::scene::TimeSeriesScene;
use crate::stats::fdr::bh_fdr;
use crate::stats::ols::ols_fit;
use crate::stats::tests::wald_chi2_block;

pub fn mvgc_discover(scene: &TimeSeriesScene, config: &MethodConfig) -> Result<DiscoveryOutcome> {
    config.validate()?;
    let tau = config.max_lag;
    let n_vars = scene.n_vars();
    require_samples(scene, n_vars * tau + 10)?;
    let data = centered(scene);
    let predictors: Vec<usize> = (0..n_vars).collect();

    // Fit the full VAR once per target and keep every pairwise test.
    let mut p_values = Vec::with_capacity(n_vars * (n_vars - 1));
    let mut pairs = Vec::with_capacity(n_vars * (n_vars - 1));
    let mut lag_mats = vec![DMatrix::zeros(n_vars, n_vars); tau];
    for y in 0..n_vars {
        let (design, response) = lagged_design(&data, &[y], &predictors, tau)?;
        let response = DVector::from_column_slice(response.column(0).as_slice());
        let fit = ols_fit(&design, &response)?;
        let coef = fit.coefficients.column(0).into_owned();
        for lag in 1..=tau {
            for x in 0..n_vars {
                lag_mats[lag - 1][(y, x)] = coef[x * tau + lag - 1];
            }
        }
        let covariance = fit.coefficient_covariance(0)?;
        for x in 0..n_vars {
            if x == y {
                continue;
            }
            let block: Vec<usize> = (x * tau..(x + 1) * tau).collect();
            let test = wald_chi2_block(&coef, &covariance, &block).map_err(|e| match e {
                Error::Singular(msg) => Error::Singular(format!(
                    "lag block of {} in the regression for {}: {msg}",
                    data.variable_names[x], data.variable_names[y]
                )),
                other => other,
            })?;
            pairs.push((x, y));
            p_values.push(test.p_value);
        }
    }

    let rejected = bh_fdr(&p_values, config.alpha)?;
    let mut graph = SummaryGraph::new(data.variable_names.clone());
    for &idx in &rejected {
        let (x, y) = pairs[idx];
        graph.add_edge(x, y)?;
    }

    let mut outcome = DiscoveryOutcome::new(graph);
    outcome.lagged = Some(LaggedCoefficients::new(lag_mats)?);
    for (i, &(x, y)) in pairs.iter().enumerate() {
        outcome.diagnostics.edge_scores.insert((x, y), p_values[i]);
        outcome.diagnostics.link_tests.push(LinkTest {
            source: x,
            target: y,
            lag: 0,
            p_value: p_values[i],
        });
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::tests_support::{independent_noise_scene, mediator_chain_scene};

    fn config(alpha: f64, max_lag: usize) -> MethodConfig {
        MethodConfig {
            alpha,
            max_lag,
            ..Default::default()
        }
    }

    #[test]
    fn separates_mediator_from_direct_cause() {
        let trials = 20;
        let mut chain_found = 0;
        let mut direct_found = 0;
        for seed in 0..trials {
            let scene = mediator_chain_scene(seed, 600);
            let out = mvgc_discover(&scene, &config(0.05, 10)).unwrap();
            // x=0, m=1, y=2
            if out.graph.has_edge(0, 1) && out.graph.has_edge(1, 2) {
                chain_found += 1;
            }
            if out.graph.has_edge(0, 2) {
                direct_found += 1;
            }
        }
        assert!(chain_found >= 18, "chain recovered in {chain_found}/{trials}");
        assert!(direct_found <= 2, "spurious direct edge in {direct_found}/{trials}");
    }

    #[test]
    fn independent_noise_yields_empty_graph_mostly() {
        let trials = 40;
        let mut empty = 0;
        for seed in 100..100 + trials {
            let scene = independent_noise_scene(seed, 400, 3);
            let out = mvgc_discover(&scene, &config(0.05, 5)).unwrap();
            if out.graph.n_edges() == 0 {
                empty += 1;
            }
        }
        // BH controls the family-wise false discovery: under the global null
        // any rejection at all has probability <= alpha.
        assert!(empty >= trials - 6, "empty graph in only {empty}/{trials}");
    }

    #[test]
    fn lagged_coefficients_are_exposed() {
        let scene = independent_noise_scene(7, 300, 2);
        let out = mvgc_discover(&scene, &config(0.05, 4)).unwrap();
        let lagged = out.lagged.expect("mvgc reports lag matrices");
        assert_eq!(lagged.max_lag(), 4);
        assert_eq!(lagged.n_vars(), 2);
    }

    #[test]
    fn monotone_in_alpha() {
        let scene = mediator_chain_scene(3, 500);
        let small = mvgc_discover(&scene, &config(0.01, 8)).unwrap();
        let large = mvgc_discover(&scene, &config(0.3, 8)).unwrap();
        for (s, t) in small.graph.edges() {
            assert!(large.graph.has_edge(s, t));
        }
    }

    #[test]
    fn insufficient_samples_is_an_error() {
        let scene = independent_noise_scene(1, 80, 3);
        assert!(mvgc_discover(&scene, &config(0.05, 25)).is_err());
    }
}
