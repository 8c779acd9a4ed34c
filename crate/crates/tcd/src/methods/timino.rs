//! Residual-independence sink search.
//!
//! The variables are peeled off one at a time: a candidate is a valid sink if
//! a linear lagged predictor built from the remaining variables leaves
//! residuals that are independent of every other input series (lagged
//! cross-covariance test against each series' own innovations — see
//! [`min_independence_p`]). Parents are then pruned backwards: a parent whose
//! removal from the fit keeps all independence tests passing was never
//! needed. When no candidate yields independent residuals the method
//! abstains rather than guessing — hidden confounding looks exactly like
//! this.

use nalgebra::DVector;

use crate::error::Result;
use crate::graph::SummaryGraph;
use crate::methods::{centered, require_samples, DiscoveryOutcome, MethodConfig};
use crate::preprocess::lagged_design;
use crate::scene::TimeSeriesScene;
use crate::stats::correlation::cross_covariance_independence;
use crate::stats::ols::ols_fit;

/// Residuals of `target` fit on lags `1..=tau` of `fitting_set`, aligned to
/// times `tau..T`.
fn fit_residuals(
    data: &TimeSeriesScene,
    target: usize,
    fitting_set: &[usize],
    tau: usize,
) -> Result<Vec<f64>> {
    let (design, response) = lagged_design(data, &[target], fitting_set, tau)?;
    let response = DVector::from_column_slice(response.column(0).as_slice());
    let fit = ols_fit(&design, &response)?;
    Ok(fit.residuals.column(0).iter().copied().collect())
}

/// Smallest independence p-value of `residuals` against the innovation
/// series of each variable in `tested`, all aligned to times `tau..T`. An
/// empty set is vacuously independent.
///
/// Testing against innovations (each series prewhitened by a fit on its own
/// lags) instead of raw levels is the classical guard against the loss of
/// power cross-correlation suffers between autocorrelated series: a
/// near-integrated series buries its per-step information under its slow
/// trajectory component, while its innovations expose exactly the part a
/// causal link transmits.
fn min_independence_p(
    innovations: &[Vec<f64>],
    residuals: &[f64],
    tested: &[usize],
    tau: usize,
    alpha: f64,
) -> Result<f64> {
    let mut min_p = f64::INFINITY;
    for &v in tested {
        let test = cross_covariance_independence(residuals, &innovations[v], tau, alpha)?;
        min_p = min_p.min(test.p_value);
    }
    Ok(min_p)
}

pub fn timino_discover(scene: &TimeSeriesScene, config: &MethodConfig) -> Result<DiscoveryOutcome> {
    config.validate()?;
    let tau = config.max_lag;
    let n_vars = scene.n_vars();
    require_samples(scene, n_vars * tau + 10)?;
    let data = centered(scene);

    // Prewhiten every series once up front; independence is always tested
    // against these innovation series (see min_independence_p).
    let mut innovations = Vec::with_capacity(n_vars);
    for v in 0..n_vars {
        innovations.push(fit_residuals(&data, v, &[v], tau)?);
    }

    // Peel off sinks: the placed list runs from the bottom of the hierarchy
    // upward, each entry recording the fitting set it was predicted from.
    let mut working: Vec<usize> = (0..n_vars).collect();
    let mut placed: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut diagnostics = crate::methods::Diagnostics::default();
    while !working.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for &candidate in &working {
            let residuals = fit_residuals(&data, candidate, &working, tau)?;
            let tested: Vec<usize> = working.iter().copied().filter(|&v| v != candidate).collect();
            let min_p = min_independence_p(&innovations, &residuals, &tested, tau, config.alpha)?;
            if min_p > config.alpha {
                let better = match best {
                    None => true,
                    // Strict comparison keeps the lowest index on ties.
                    Some((_, best_p)) => min_p > best_p,
                };
                if better {
                    best = Some((candidate, min_p));
                }
            }
        }
        match best {
            Some((sink, min_p)) => {
                let parents: Vec<usize> =
                    working.iter().copied().filter(|&v| v != sink).collect();
                diagnostics.notes.push(format!(
                    "sink {} accepted with min independence p {min_p:.4}",
                    data.variable_names[sink]
                ));
                placed.push((sink, parents));
                working.retain(|&v| v != sink);
            }
            None => {
                // No variable has independent residuals: abstain.
                diagnostics
                    .notes
                    .push("no sink candidate passed the independence test; abstained".into());
                let mut outcome = DiscoveryOutcome::new(SummaryGraph::new(data.variable_names.clone()));
                outcome.diagnostics = diagnostics;
                outcome.abstained = true;
                return Ok(outcome);
            }
        }
    }

    // Backward pruning: drop parents that are unnecessary for residual
    // independence. Tests always run against the full original parent set so
    // a dropped parent must stay independent of the residuals too.
    let mut graph = SummaryGraph::new(data.variable_names.clone());
    for (sink, original_parents) in &placed {
        let mut kept = original_parents.clone();
        for &candidate in original_parents {
            let trial: Vec<usize> = kept.iter().copied().filter(|&v| v != candidate).collect();
            let mut fitting: Vec<usize> = trial.clone();
            fitting.push(*sink);
            fitting.sort_unstable();
            let residuals = fit_residuals(&data, *sink, &fitting, tau)?;
            let min_p =
                min_independence_p(&innovations, &residuals, original_parents, tau, config.alpha)?;
            if min_p > config.alpha {
                diagnostics.notes.push(format!(
                    "pruned {} -> {}: residuals stay independent without it (min p {min_p:.4})",
                    data.variable_names[candidate], data.variable_names[*sink]
                ));
                kept = trial;
            } else {
                diagnostics.notes.push(format!(
                    "kept {} -> {}: dropping it breaks independence (min p {min_p:.4})",
                    data.variable_names[candidate], data.variable_names[*sink]
                ));
            }
        }
        for parent in kept {
            graph.add_edge(parent, *sink)?;
        }
    }

    let mut outcome = DiscoveryOutcome::new(graph);
    outcome.diagnostics = diagnostics;
    Ok(outcome)
}
