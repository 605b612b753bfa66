//! Topological entropy of transition graphs and the standard-map lower bound.

use std::f64::consts::FRAC_PI_2;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::standard_map::q_symbols;
use crate::symbolic::{count_words, SymbolicError, TransitionGraph};

const RELATIVE_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("sigma outside (0, π/2): {0}")]
    SigmaRange(f64),
    #[error("below threshold, no bound: |λ| = {lambda} < 8/cos σ = {threshold}")]
    BelowThreshold { lambda: f64, threshold: f64 },
    #[error("power iteration did not converge")]
    NotConverged,
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmcEntropy {
    /// `log ρ(A)` in nats.
    pub entropy: f64,
    pub spectral_radius: f64,
    /// False when no vertex lies on a cycle; entropy is then 0.
    pub recurrent: bool,
}

impl TmcEntropy {
    pub fn flag(&self) -> Option<&'static str> {
        (!self.recurrent).then_some("no recurrent part")
    }
}

/// Perron root of a nonnegative irreducible matrix by power iteration on
/// `A + I`, stopped by the Collatz–Wielandt bracket.
fn perron_root(a: &[Vec<f64>]) -> Result<f64, EntropyError> {
    let n = a.len();
    let mut v = vec![1.0; n];
    for _ in 0..MAX_ITERATIONS {
        let w: Vec<f64> = (0..n)
            .map(|i| v[i] + a[i].iter().zip(&v).map(|(x, y)| x * y).sum::<f64>())
            .collect();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for i in 0..n {
            let r = w[i] / v[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if hi - lo <= RELATIVE_TOL * hi {
            return Ok(0.5 * (lo + hi) - 1.0);
        }
        let norm = w.iter().cloned().fold(0.0, f64::max);
        v = w.into_iter().map(|x| x / norm).collect();
    }
    Err(EntropyError::NotConverged)
}

pub fn tmc_entropy(graph: &TransitionGraph) -> Result<TmcEntropy, EntropyError> {
    let n = graph.vertex_count();
    if n == 0 {
        return Err(EntropyError::EmptyGraph);
    }
    let adj = graph.adjacency();
    let mut g = DiGraph::<(), ()>::with_capacity(n, graph.edge_count());
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for (i, row) in adj.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut rho: f64 = 0.0;
    let mut recurrent = false;
    for scc in tarjan_scc(&g) {
        let idx: Vec<usize> = scc.iter().map(|v| v.index()).collect();
        if idx.len() == 1 && adj[idx[0]][idx[0]] == 0 {
            continue;
        }
        recurrent = true;
        let sub: Vec<Vec<f64>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| adj[i][j] as f64).collect())
            .collect();
        rho = rho.max(perron_root(&sub)?);
    }
    if !recurrent {
        return Ok(TmcEntropy { entropy: 0.0, spectral_radius: 0.0, recurrent });
    }
    Ok(TmcEntropy { entropy: rho.ln().max(0.0), spectral_radius: rho, recurrent })
}

/// `h_n = (1/n) log θ_n` for `n = 1..=n_max`, with `θ_n` the number of
/// admissible words on `n` vertices. Empty word sets give 0.
pub fn word_count_entropy(graph: &TransitionGraph, n_max: usize) -> Result<Vec<f64>, EntropyError> {
    (1..=n_max)
        .map(|n| {
            let c = count_words(graph, n)?;
            Ok(if c == 0 { 0.0 } else { (c as f64).ln() / n as f64 })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardEntropyBound {
    pub lambda: f64,
    pub sigma: f64,
    #[serde(rename = "Lambda_star")]
    pub lambda_star: f64,
    pub q: u64,
    pub bound_nats: f64,
}

pub fn standard_map_entropy_bound(
    lambda: f64,
    sigma: f64,
) -> Result<StandardEntropyBound, EntropyError> {
    if !(sigma > 0.0 && sigma < FRAC_PI_2) {
        return Err(EntropyError::SigmaRange(sigma));
    }
    let threshold = 8.0 / sigma.cos();
    if !(lambda.abs() >= threshold) {
        return Err(EntropyError::BelowThreshold { lambda: lambda.abs(), threshold });
    }
    let lambda_star = lambda.abs() * sigma.sin() - 4.0 * sigma;
    let q = if lambda_star > 0.0 { q_symbols(lambda_star).unwrap_or(1) } else { 1 };
    Ok(StandardEntropyBound { lambda, sigma, lambda_star, q, bound_nats: (q as f64).ln() })
}

/// Best bound over `σ ∈ {0.05, 0.10, …, 1.50}`; the first maximiser wins.
pub fn optimize_sigma(lambda: f64) -> Result<StandardEntropyBound, EntropyError> {
    let mut best: Option<StandardEntropyBound> = None;
    let mut last_err = None;
    for k in 1..=30 {
        match standard_map_entropy_bound(lambda, 0.05 * k as f64) {
            Ok(b) if best.as_ref().is_none_or(|c| b.bound_nats > c.bound_nats) => best = Some(b),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.expect("grid is nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn complete_and_golden() {
        for q in [2, 3, 7] {
            let h = tmc_entropy(&TransitionGraph::complete(q)).unwrap();
            assert!((h.entropy - (q as f64).ln()).abs() < 1e-9);
        }
        let h = tmc_entropy(&TransitionGraph::golden_mean()).unwrap();
        assert!((h.entropy - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-9);
        assert!(tmc_entropy(&TransitionGraph::cycle(9)).unwrap().entropy.abs() < 1e-9);
    }

    #[test]
    fn acyclic_graph_flagged() {
        let mut g = TransitionGraph::with_vertices(3);
        g.add_edge(crate::symbolic::VertexId(0), crate::symbolic::VertexId(1));
        let h = tmc_entropy(&g).unwrap();
        assert_eq!(h.entropy, 0.0);
        assert_eq!(h.flag(), Some("no recurrent part"));
    }

    #[test]
    fn standard_bound() {
        let b = standard_map_entropy_bound(20.0, PI / 4.0).unwrap();
        assert_eq!(b.q, 7);
        assert!((b.lambda_star - 11.0006).abs() < 1e-4);
        let t = standard_map_entropy_bound(8.0 / 0.3f64.cos(), 0.3).unwrap();
        assert_eq!(t.q, 1);
        assert_eq!(t.bound_nats, 0.0);
        assert!(standard_map_entropy_bound(5.0, PI / 4.0).is_err());
        let big = standard_map_entropy_bound(1e6, PI / 4.0).unwrap();
        let r = big.bound_nats / 1e6f64.ln();
        assert!((0.9..=1.01).contains(&r), "{r}");
    }
}
