//! Scoring summary graphs against ground truth: worked examples of the
//! precision/recall/F1 arithmetic, then the exact expectation a uniformly
//! random guesser achieves on the convoy benchmark.
//!
//! ```text
//! cargo run --example score_graphs
//! ```

use tcd::eval::score_graph;
use tcd::SummaryGraph;

fn nodes() -> Vec<String> {
    vec!["c0".into(), "c1".into(), "i0".into()]
}

fn graph_with(edges: &[(usize, usize)]) -> SummaryGraph {
    let mut g = SummaryGraph::new(nodes());
    for &(s, t) in edges {
        g.add_edge(s, t).unwrap();
    }
    g
}

fn main() -> tcd::Result<()> {
    // The benchmark's ground truth: the leader drives the follower, and
    // the third vehicle is causally unrelated.
    let truth = graph_with(&[(0, 1)]);

    // Three worked examples: perfect, empty, and the right edge buried
    // under two false alarms.
    let exact = graph_with(&[(0, 1)]);
    let empty = graph_with(&[]);
    let noisy = graph_with(&[(0, 1), (2, 1), (1, 0)]);

    for (label, predicted) in [("exact", &exact), ("empty", &empty), ("two extra", &noisy)] {
        let s = score_graph(predicted, &truth)?;
        println!(
            "{label:<11} tp={} fp={} fn={}  precision={:.2} recall={:.2} F1={:.3}",
            s.true_positives, s.false_positives, s.false_negatives, s.precision, s.recall, s.f1
        );
    }

    // Self-loops never count: a series trivially relates to its own past.
    let mut with_loop = graph_with(&[(0, 1)]);
    with_loop.add_edge(2, 2)?;
    let s = score_graph(&with_loop, &truth)?;
    println!("self-loop   tp={} fp={} fn={}  F1={:.3}  (loop ignored)",
        s.true_positives, s.false_positives, s.false_negatives, s.f1);

    // A guesser flips a fair coin for each of the six possible directed
    // edges: 64 equally likely graphs. Enumerating them gives the exact
    // mean F1 against the convoy truth — the bar every method must clear.
    let pairs = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
    let mut total = 0.0;
    for mask in 0u32..64 {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask >> bit & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        total += score_graph(&graph_with(&edges), &truth)?.f1;
    }
    println!("\nuniform-random expectation over all 64 graphs: {:.5}", total / 64.0);
    println!("(the random baseline converges to this; see compare_methods)");
    Ok(())
}
