//! Summary graphs and auxiliary per-method outputs.
//!
//! A summary graph records, for each ordered pair of variables, whether the
//! source influences the target at *any* lag. Discovery methods may also
//! expose their lagged coefficient estimates and residuals for inspection.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A directed graph over named variables, edges stored as index pairs.
///
/// Edges are kept in a sorted set so iteration order is deterministic.
/// Self-loops are representable; evaluation strips them before scoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryGraph {
    nodes: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl SummaryGraph {
    /// An edgeless graph over the given nodes.
    pub fn new(nodes: Vec<String>) -> Self {
        SummaryGraph {
            nodes,
            edges: BTreeSet::new(),
        }
    }

    /// Node names, in column order of the scene they were derived from.
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    /// Number of nodes.
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Inserts the edge `source -> target`. Out-of-range indices are an error.
    pub fn add_edge(&mut self, source: usize, target: usize) -> Result<()> {
        if source >= self.nodes.len() || target >= self.nodes.len() {
            return Err(Error::InvalidInput(format!(
                "edge ({source}, {target}) out of range for {} nodes",
                self.nodes.len()
            )));
        }
        self.edges.insert((source, target));
        Ok(())
    }

    /// Whether `source -> target` is present.
    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.edges.contains(&(source, target))
    }

    /// Edges in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Number of edges, self-loops included.
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Copy with all `i -> i` edges removed.
    pub fn without_self_loops(&self) -> SummaryGraph {
        SummaryGraph {
            nodes: self.nodes.clone(),
            edges: self.edges.iter().copied().filter(|(s, t)| s != t).collect(),
        }
    }

    /// Renders the graph as one `src -> dst` line per edge (sorted), after a
    /// header line listing the nodes.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# nodes: {}\n", self.nodes.join(", "));
        for (s, t) in &self.edges {
            out.push_str(&format!("{} -> {}\n", self.nodes[*s], self.nodes[*t]));
        }
        out
    }

    /// Parses the `to_edge_list` format. Unknown node names are an error.
    pub fn from_edge_list(text: &str) -> Result<SummaryGraph> {
        let mut nodes: Option<Vec<String>> = None;
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# nodes:") {
                nodes = Some(rest.split(',').map(|s| s.trim().to_string()).collect());
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let (src, dst) = line.split_once("->").ok_or_else(|| {
                Error::InvalidInput(format!("line {}: expected \"src -> dst\", got {line:?}", idx + 1))
            })?;
            pairs.push((src.trim().to_string(), dst.trim().to_string()));
        }
        let nodes = nodes.ok_or_else(|| {
            Error::InvalidInput("edge list is missing its \"# nodes:\" header".into())
        })?;
        let mut graph = SummaryGraph::new(nodes);
        for (src, dst) in pairs {
            let s = graph
                .nodes
                .iter()
                .position(|n| *n == src)
                .ok_or_else(|| Error::InvalidInput(format!("unknown node {src:?}")))?;
            let t = graph
                .nodes
                .iter()
                .position(|n| *n == dst)
                .ok_or_else(|| Error::InvalidInput(format!("unknown node {dst:?}")))?;
            graph.add_edge(s, t)?;
        }
        Ok(graph)
    }
}

impl fmt::Display for SummaryGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_edge_list())
    }
}

/// Per-lag coefficient matrices from a fitted lagged model.
///
/// `coeffs[l][(i, j)]` is the influence of variable `j` at lag `l + 1` on
/// variable `i` now.
#[derive(Debug, Clone, PartialEq)]
pub struct LaggedCoefficients {
    coeffs: Vec<DMatrix<f64>>,
}

impl LaggedCoefficients {
    /// Wraps per-lag `N x N` matrices (index 0 holds lag 1).
    pub fn new(coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("need at least one lag matrix".into()));
        }
        let n = coeffs[0].nrows();
        for (l, m) in coeffs.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::InvalidInput(format!(
                    "lag {} matrix is {}x{}, expected {n}x{n}",
                    l + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "lag {} matrix contains a non-finite value",
                    l + 1
                )));
            }
        }
        Ok(LaggedCoefficients { coeffs })
    }

    /// Largest lag carried.
    pub fn max_lag(&self) -> usize {
        self.coeffs.len()
    }

    /// Number of variables.
    pub fn n_vars(&self) -> usize {
        self.coeffs[0].nrows()
    }

    /// The `N x N` matrix for `lag` (1-based).
    pub fn at_lag(&self, lag: usize) -> &DMatrix<f64> {
        &self.coeffs[lag - 1]
    }

    /// Coefficient of `source` at `lag` (1-based) on `target`.
    pub fn get(&self, target: usize, source: usize, lag: usize) -> f64 {
        self.coeffs[lag - 1][(target, source)]
    }

    /// Summary graph with `source -> target` whenever some lag coefficient
    /// exceeds `threshold` in absolute value. Self-loops are skipped.
    pub fn to_summary_graph(&self, nodes: Vec<String>, threshold: f64) -> Result<SummaryGraph> {
        if nodes.len() != self.n_vars() {
            return Err(Error::InvalidInput(format!(
                "{} node names for {} variables",
                nodes.len(),
                self.n_vars()
            )));
        }
        let mut graph = SummaryGraph::new(nodes);
        let n = self.n_vars();
        for source in 0..n {
            for target in 0..n {
                if source == target {
                    continue;
                }
                if self
                    .coeffs
                    .iter()
                    .any(|m| m[(target, source)].abs() > threshold)
                {
                    graph.add_edge(source, target)?;
                }
            }
        }
        Ok(graph)
    }
}

/// Residuals of a fitted model, one column per modeled variable, plus the
/// number of parameters spent per equation (for degree-of-freedom accounting).
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    /// `T' x N` residual matrix.
    pub values: DMatrix<f64>,
    /// Parameters estimated per equation.
    pub params_per_eq: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trips() {
        let mut g = SummaryGraph::new(vec!["c0".into(), "c1".into(), "c2".into()]);
        g.add_edge(0, 1).unwrap();
        g.add_edge(2, 0).unwrap();
        let text = g.to_edge_list();
        assert!(text.contains("c0 -> c1"));
        assert!(text.contains("c2 -> c0"));
        let back = SummaryGraph::from_edge_list(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn edge_list_rejects_unknown_nodes() {
        let text = "# nodes: a, b\na -> z\n";
        assert!(SummaryGraph::from_edge_list(text).is_err());
    }

    #[test]
    fn add_edge_checks_bounds() {
        let mut g = SummaryGraph::new(vec!["a".into()]);
        assert!(g.add_edge(0, 1).is_err());
        assert!(g.add_edge(0, 0).is_ok());
    }

    #[test]
    fn without_self_loops_strips_only_loops() {
        let mut g = SummaryGraph::new(vec!["a".into(), "b".into()]);
        g.add_edge(0, 0).unwrap();
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 1).unwrap();
        let stripped = g.without_self_loops();
        assert_eq!(stripped.n_edges(), 1);
        assert!(stripped.has_edge(0, 1));
    }

    #[test]
    fn summary_from_lagged_coefficients_uses_any_lag() {
        let lag1 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.0]);
        let mut lag2 = DMatrix::zeros(2, 2);
        lag2[(1, 0)] = 0.5; // variable 0 drives variable 1 at lag 2
        let lc = LaggedCoefficients::new(vec![lag1, lag2]).unwrap();
        let g = lc
            .to_summary_graph(vec!["x".into(), "y".into()], 0.01)
            .unwrap();
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(1, 0));
        assert_eq!(g.n_edges(), 1);
    }

    #[test]
    fn lagged_coefficients_reject_shape_mismatch() {
        let a = DMatrix::zeros(2, 2);
        let b = DMatrix::zeros(3, 3);
        assert!(LaggedCoefficients::new(vec![a, b]).is_err());
    }
}
