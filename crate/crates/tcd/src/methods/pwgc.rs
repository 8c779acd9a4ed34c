//! Pairwise Granger causality.
//!
//! For each ordered pair (x, y) the target is fit twice: once on its own
//! lags, once on its own lags plus the candidate cause's lags. A nested
//! F-test decides whether the candidate's lags improve the fit. Each pair is
//! tested at the raw significance level; no multiple-testing correction is
//! applied.

use nalgebra::DVector;

use crate::error::Result;
use crate::graph::SummaryGraph;
use crate::methods::{centered, require_samples, DiscoveryOutcome, LinkTest, MethodConfig};
use crate::preprocess::lagged_design;
use crate::scene::TimeSeriesScene;
use crate::stats::ols::ols_fit;
use crate::stats::tests::f_test_nested;

pub fn pwgc_discover(scene: &TimeSeriesScene, config: &MethodConfig) -> Result<DiscoveryOutcome> {
    config.validate()?;
    let tau = config.max_lag;
    require_samples(scene, 2 * tau + 10)?;
    let data = centered(scene);
    let n_vars = data.n_vars();
    let n_obs = data.n_samples() - tau;

    let mut graph = SummaryGraph::new(data.variable_names.clone());
    let mut outcome_diag = crate::methods::Diagnostics::default();

    for y in 0..n_vars {
        // Restricted model: y on its own lags.
        let (own_design, response) = lagged_design(&data, &[y], &[y], tau)?;
        let response = DVector::from_column_slice(response.column(0).as_slice());
        let restricted = ols_fit(&own_design, &response)?;
        for x in 0..n_vars {
            if x == y {
                continue;
            }
            // Full model: y's own lags plus x's lags.
            let (full_design, _) = lagged_design(&data, &[y], &[y, x], tau)?;
            let full = ols_fit(&full_design, &response)?;
            let test = f_test_nested(restricted.rss[0], full.rss[0], tau, 2 * tau, n_obs)?;
            outcome_diag.edge_scores.insert((x, y), test.p_value);
            outcome_diag.link_tests.push(LinkTest {
                source: x,
                target: y,
                lag: 0,
                p_value: test.p_value,
            });
            if test.p_value <= config.alpha {
                graph.add_edge(x, y)?;
            }
        }
    }

    let mut outcome = DiscoveryOutcome::new(graph);
    outcome.diagnostics = outcome_diag;
    Ok(outcome)
}
