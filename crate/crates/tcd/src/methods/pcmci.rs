//! PCMCI: two-phase conditional-independence discovery.
//!
//! Phase 1 trims, per target, the set of candidate (variable, lag) parents
//! with partial-correlation tests of growing conditioning size, always
//! conditioning on the strongest other candidates found so far. Phase 2
//! retests every link conditioning on the discovered parents of *both*
//! endpoints (the cause's parents shifted to its lag), which is what grants
//! robustness to autocorrelation. All link p-values are pooled through
//! Benjamini-Hochberg before edges are emitted.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::SummaryGraph;
use crate::methods::{centered, require_samples, DiscoveryOutcome, LinkTest, MethodConfig};
use crate::scene::TimeSeriesScene;
use crate::stats::correlation::{fisher_z_test, partial_correlation};
use crate::stats::fdr::bh_fdr;

/// A candidate parent: variable index and positive lag.
type Cand = (usize, usize);

/// Values of `var` at `time − lag` for each time in `start..end`.
fn lagged_slice(values: &DMatrix<f64>, var: usize, lag: usize, start: usize, end: usize) -> Vec<f64> {
    (start..end).map(|t| values[(t - lag, var)]).collect()
}

/// Candidates ordered by strength (descending), ties broken by index so the
/// conditioning choice is deterministic.
fn by_strength(cands: &[Cand], strength: &BTreeMap<Cand, f64>) -> Vec<Cand> {
    let mut sorted = cands.to_vec();
    sorted.sort_by(|a, b| {
        let sa = strength.get(a).copied().unwrap_or(0.0);
        let sb = strength.get(b).copied().unwrap_or(0.0);
        sb.total_cmp(&sa).then(a.cmp(b))
    });
    sorted
}

/// Phase 1: iteratively remove candidate parents of `y` that test
/// independent given the strongest `size` other candidates, one conditioning
/// combination per candidate per size.
fn select_conditions(
    values: &DMatrix<f64>,
    y: usize,
    tau: usize,
    alpha: f64,
    notes: &mut Vec<String>,
    names: &[String],
) -> Result<Vec<(Cand, f64)>> {
    let t_total = values.nrows();
    let n = t_total - tau;
    let y_series = lagged_slice(values, y, 0, tau, t_total);

    let mut cands: Vec<Cand> = (0..values.ncols())
        .flat_map(|v| (1..=tau).map(move |l| (v, l)))
        .collect();
    let mut strength: BTreeMap<Cand, f64> = BTreeMap::new();

    let mut size = 0;
    loop {
        let ranked = by_strength(&cands, &strength);
        let mut removed_any = false;
        let mut tested_any = false;
        let mut keep = Vec::with_capacity(cands.len());
        for &cand in &ranked {
            let others: Vec<Cand> = ranked.iter().copied().filter(|&o| o != cand).collect();
            if others.len() < size || n <= size + 3 {
                keep.push(cand); // not enough conditions or samples: survives this size
                continue;
            }
            tested_any = true;
            let cond = &others[..size];
            let x_series = lagged_slice(values, cand.0, cand.1, tau, t_total);
            let mut z = DMatrix::zeros(n, cond.len());
            for (c, &(v, l)) in cond.iter().enumerate() {
                z.column_mut(c)
                    .copy_from_slice(&lagged_slice(values, v, l, tau, t_total));
            }
            let p_value = match partial_correlation(&x_series, &y_series, &z) {
                Ok(rho) => {
                    strength.insert(cand, rho.abs());
                    fisher_z_test(rho, n, size)?.p_value
                }
                Err(Error::Degenerate(msg)) => {
                    notes.push(format!(
                        "condition selection for {}: {} at lag {} dropped as degenerate ({msg})",
                        names[y], names[cand.0], cand.1
                    ));
                    1.0
                }
                Err(other) => return Err(other),
            };
            if p_value > alpha {
                removed_any = true;
            } else {
                keep.push(cand);
            }
        }
        keep.sort_unstable();
        cands = keep;
        if cands.is_empty() || !removed_any || !tested_any {
            break;
        }
        size += 1;
        if size > cands.len().saturating_sub(1) {
            break;
        }
    }
    Ok(cands
        .into_iter()
        .map(|c| {
            let s = strength.get(&c).copied().unwrap_or(0.0);
            (c, s)
        })
        .collect())
}

pub fn pcmci_discover(scene: &TimeSeriesScene, config: &MethodConfig) -> Result<DiscoveryOutcome> {
    config.validate()?;
    let tau = config.max_lag;
    let n_vars = scene.n_vars();
    require_samples(scene, n_vars * tau + 10)?;
    let data = centered(scene);
    let values = data.values();
    let t_total = values.nrows();

    let mut notes = Vec::new();
    let parents: Vec<Vec<(Cand, f64)>> = (0..n_vars)
        .map(|y| select_conditions(values, y, tau, config.alpha, &mut notes, &data.variable_names))
        .collect::<Result<_>>()?;

    // Phase 2: momentary conditional independence for every link, including
    // self-links; those enter the correction pool but never become edges.
    let mut tests: Vec<(usize, usize, usize)> = Vec::new();
    let mut p_values: Vec<f64> = Vec::new();
    for y in 0..n_vars {
        for x in 0..n_vars {
            for lag in 1..=tau {
                let mut cond: Vec<Cand> = Vec::new();
                for &((v, l), _) in &parents[y] {
                    if (v, l) != (x, lag) {
                        cond.push((v, l));
                    }
                }
                for &((v, l), _) in &parents[x] {
                    let shifted = (v, l + lag);
                    if shifted != (x, lag) && !cond.contains(&shifted) {
                        cond.push(shifted);
                    }
                }
                cond.sort_unstable();
                cond.dedup();

                let max_needed = cond.iter().map(|&(_, l)| l).chain([lag]).max().unwrap();
                let n = t_total - max_needed;
                let p_value = if n <= cond.len() + 3 {
                    notes.push(format!(
                        "link {} lag {} -> {}: too few samples for {} conditions; treated independent",
                        data.variable_names[x], lag, data.variable_names[y], cond.len()
                    ));
                    1.0
                } else {
                    let x_series = lagged_slice(values, x, lag, max_needed, t_total);
                    let y_series = lagged_slice(values, y, 0, max_needed, t_total);
                    let mut z = DMatrix::zeros(n, cond.len());
                    for (c, &(v, l)) in cond.iter().enumerate() {
                        z.column_mut(c)
                            .copy_from_slice(&lagged_slice(values, v, l, max_needed, t_total));
                    }
                    match partial_correlation(&x_series, &y_series, &z) {
                        Ok(rho) => fisher_z_test(rho, n, cond.len())?.p_value,
                        Err(Error::Degenerate(msg)) => {
                            notes.push(format!(
                                "link {} lag {} -> {}: degenerate conditioning ({msg}); treated independent",
                                data.variable_names[x], lag, data.variable_names[y]
                            ));
                            1.0
                        }
                        Err(other) => return Err(other),
                    }
                };
                tests.push((x, y, lag));
                p_values.push(p_value);
            }
        }
    }

    let rejected = bh_fdr(&p_values, config.alpha)?;
    let mut graph = SummaryGraph::new(data.variable_names.clone());
    for &idx in &rejected {
        let (x, y, _) = tests[idx];
        if x != y {
            graph.add_edge(x, y)?;
        }
    }

    let mut outcome = DiscoveryOutcome::new(graph);
    for (i, &(x, y, lag)) in tests.iter().enumerate() {
        outcome.diagnostics.link_tests.push(LinkTest {
            source: x,
            target: y,
            lag,
            p_value: p_values[i],
        });
        if x != y {
            let entry = outcome.diagnostics.edge_scores.entry((x, y)).or_insert(1.0);
            *entry = entry.min(p_values[i]);
        }
    }
    outcome.diagnostics.notes = notes;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::tests_support::{ar1_pair_scene, lagged_pair_scene};

    fn config(alpha: f64, max_lag: usize) -> MethodConfig {
        MethodConfig {
            alpha,
            max_lag,
            ..Default::default()
        }
    }

    #[test]
    fn autocorrelated_null_stays_clean() {
        let mut clean = 0;
        let trials = 20;
        for seed in 0..trials {
            let scene = ar1_pair_scene(seed, 600, 0.9);
            let out = pcmci_discover(&scene, &config(0.05, 5)).unwrap();
            if out.graph.n_edges() == 0 {
                clean += 1;
            }
        }
        assert!(clean >= 18, "no cross edges in {clean}/{trials} trials");
    }

    #[test]
    fn recovers_a_lagged_link() {
        let mut hits = 0;
        let trials = 20;
        for seed in 100..100 + trials {
            let scene = lagged_pair_scene(seed, 600, 2, 0.7, 1.0);
            let out = pcmci_discover(&scene, &config(0.05, 5)).unwrap();
            if out.graph.has_edge(0, 1) {
                hits += 1;
            }
        }
        assert!(hits >= 18, "x->y found in {hits}/{trials} trials");
    }

    #[test]
    fn alpha_one_gives_the_complete_graph() {
        let scene = ar1_pair_scene(3, 300, 0.5);
        let out = pcmci_discover(&scene, &config(1.0, 3)).unwrap();
        assert_eq!(out.graph.n_edges(), 2, "edges: {:?}", out.graph.edges().collect::<Vec<_>>());
    }

    #[test]
    fn no_self_loops_in_output() {
        // Strong autocorrelation guarantees significant self-links
        // internally; they must not surface as graph edges.
        let scene = ar1_pair_scene(8, 500, 0.9);
        let out = pcmci_discover(&scene, &config(0.05, 4)).unwrap();
        for (s, t) in out.graph.edges() {
            assert_ne!(s, t);
        }
        // Self-links were still tested and pooled.
        assert!(out
            .diagnostics
            .link_tests
            .iter()
            .any(|lt| lt.source == lt.target));
    }

    #[test]
    fn frozen_phase2_pvalues_are_monotone_under_bh() {
        let scene = lagged_pair_scene(42, 500, 2, 0.5, 1.0);
        let out = pcmci_discover(&scene, &config(0.05, 4)).unwrap();
        let ps: Vec<f64> = out.diagnostics.link_tests.iter().map(|lt| lt.p_value).collect();
        let small = bh_fdr(&ps, 0.01).unwrap();
        let large = bh_fdr(&ps, 0.2).unwrap();
        for idx in &small {
            assert!(large.contains(idx));
        }
    }
}
