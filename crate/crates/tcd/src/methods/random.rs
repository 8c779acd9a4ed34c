//! Coin-flip baseline: every ordered pair becomes an edge with probability
//! one half. Useful as the floor any real method must clear.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::SummaryGraph;
use crate::methods::{DiscoveryOutcome, MethodConfig};
use crate::scene::TimeSeriesScene;

pub fn random_discover(
    scene: &TimeSeriesScene,
    config: &MethodConfig,
    seed: u64,
) -> Result<DiscoveryOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = scene.n_vars();
    let mut graph = SummaryGraph::new(scene.variable_names.clone());
    for source in 0..n {
        for target in 0..n {
            if source == target {
                continue;
            }
            if rng.gen_bool(0.5) {
                graph.add_edge(source, target)?;
            }
        }
    }
    Ok(DiscoveryOutcome::new(graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::tests_support::independent_noise_scene;

    #[test]
    fn same_seed_same_graph() {
        let scene = independent_noise_scene(0, 50, 4);
        let a = random_discover(&scene, &MethodConfig::default(), 123).unwrap();
        let b = random_discover(&scene, &MethodConfig::default(), 123).unwrap();
        assert_eq!(
            a.graph.edges().collect::<Vec<_>>(),
            b.graph.edges().collect::<Vec<_>>()
        );
    }

    #[test]
    fn different_seeds_differ_somewhere() {
        let scene = independent_noise_scene(0, 50, 4);
        let graphs: Vec<_> = (0..8)
            .map(|s| {
                random_discover(&scene, &MethodConfig::default(), s)
                    .unwrap()
                    .graph
                    .edges()
                    .collect::<Vec<_>>()
            })
            .collect();
        assert!(graphs.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn edge_frequency_is_near_half() {
        let scene = independent_noise_scene(0, 20, 3);
        let pairs = 6.0;
        let trials = 2000;
        let total: usize = (0..trials)
            .map(|s| {
                random_discover(&scene, &MethodConfig::default(), s)
                    .unwrap()
                    .graph
                    .n_edges()
            })
            .sum();
        let rate = total as f64 / (trials as f64 * pairs);
        // Binomial std over 12000 flips is ~0.0046; allow four sigma.
        assert!((rate - 0.5).abs() < 0.02, "edge rate {rate}");
    }

    #[test]
    fn never_emits_self_loops() {
        let scene = independent_noise_scene(0, 20, 5);
        for seed in 0..50 {
            let out = random_discover(&scene, &MethodConfig::default(), seed).unwrap();
            for (s, t) in out.graph.edges() {
                assert_ne!(s, t);
            }
        }
    }
}
