//! Explicit finite lift of a lattice-equivariant system: sites are critical
//! points translated by lattice cells, graph vertices are pairs of sites at
//! cell distance at most `N`, and edges chain `(α, β) → (β, γ)`.

use std::collections::HashMap;

use nalgebra::DVector;
use rand::Rng;

use super::ModelError;
use crate::symbolic::{Code, EdgeId, TransitionGraph, VertexId};

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub class: usize,
    pub cell: Vec<i64>,
    pub point: DVector<f64>,
}

impl Site {
    pub fn in_base_cell(&self) -> bool {
        self.cell.iter().all(|&c| c == 0)
    }
}

pub(crate) struct Lift {
    pub sites: Vec<Site>,
    /// Vertex index → `(α, β)`.
    pub pairs: Vec<(usize, usize)>,
    /// `(α, β, γ)` → edge; the edge carries site `β`.
    pub edge_of: HashMap<(usize, usize, usize), EdgeId>,
    /// Edge index → carried site.
    pub carried: Vec<usize>,
    pub graph: TransitionGraph,
}

/// All cells in `[−c, c]^m`.
pub(crate) fn cells(m: usize, c: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-c..=c).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

impl Lift {
    pub fn build(
        sites: Vec<Site>,
        radius: i64,
        allowed: impl Fn(&Site, &Site) -> bool,
    ) -> Lift {
        let close = |a: &Site, b: &Site| {
            a.cell.iter().zip(&b.cell).all(|(x, y)| (x - y).abs() <= radius)
        };
        let mut graph = TransitionGraph::new();
        let mut pairs = Vec::new();
        let mut vertex_of = HashMap::new();
        // Successor lists of each site in the pair graph.
        let mut succ = vec![Vec::new(); sites.len()];
        for (a, sa) in sites.iter().enumerate() {
            for (b, sb) in sites.iter().enumerate() {
                if close(sa, sb) && allowed(sa, sb) {
                    let v = graph.add_vertex(pairs.len() as u64).expect("fresh label");
                    vertex_of.insert((a, b), v);
                    pairs.push((a, b));
                    succ[a].push(b);
                }
            }
        }
        let mut edge_of = HashMap::new();
        let mut carried = Vec::new();
        for (v, &(a, b)) in pairs.iter().enumerate() {
            for &c in &succ[b] {
                let w = vertex_of[&(b, c)];
                let e = graph.add_edge(VertexId(v), w);
                edge_of.insert((a, b, c), e);
                carried.push(b);
            }
        }
        Lift { sites, pairs, edge_of, carried, graph }
    }

    /// Nearest site to `x` within `tol` (sup norm).
    pub fn site_near(&self, x: &DVector<f64>, tol: f64) -> Result<usize, ModelError> {
        self.sites
            .iter()
            .enumerate()
            .map(|(i, s)| (i, (&s.point - x).amax()))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .map(|(i, _)| i)
            .ok_or_else(|| ModelError::UnknownSite(format!("{:?}", x.as_slice())))
    }

    /// Code visiting the given sites. Window codes are padded by reflecting
    /// the first and last step; the padding only selects the end pieces.
    pub fn code_from_sites(&self, seq: &[usize], periodic: bool) -> Result<Code, ModelError> {
        let n = seq.len();
        if n < 2 {
            return Err(ModelError::Invalid("a code needs at least two sites".into()));
        }
        let at = |i: isize| -> usize {
            if periodic {
                seq[i.rem_euclid(n as isize) as usize]
            } else if i < 0 {
                seq[1]
            } else if i as usize >= n {
                seq[n - 2]
            } else {
                seq[i as usize]
            }
        };
        let mut edges = Vec::with_capacity(n);
        for i in 0..n as isize {
            let key = (at(i - 1), at(i), at(i + 1));
            let e = self.edge_of.get(&key).ok_or(ModelError::NoTransition(
                (i - 1).rem_euclid(n as isize) as usize,
                i as usize,
            ))?;
            edges.push(*e);
        }
        Ok(if periodic { Code::Periodic(edges) } else { Code::Window(edges) })
    }

    pub fn code_from_points(
        &self,
        points: &[DVector<f64>],
        periodic: bool,
        tol: f64,
    ) -> Result<Code, ModelError> {
        let seq = points.iter().map(|p| self.site_near(p, tol)).collect::<Result<Vec<_>, _>>()?;
        self.code_from_sites(&seq, periodic)
    }

    /// Random window code of `len` slots starting from a pair whose first
    /// site lies in the base cell.
    pub fn random_code<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Result<Code, ModelError> {
        let starts: Vec<usize> = (0..self.pairs.len())
            .filter(|&v| self.sites[self.pairs[v].0].in_base_cell())
            .collect();
        if starts.is_empty() {
            return Err(ModelError::Invalid("lifted graph is empty".into()));
        }
        let v = starts[rng.gen_range(0..starts.len())];
        let path = self
            .graph
            .random_path(len, Some(VertexId(v)), rng)
            .map_err(|e| ModelError::Invalid(e.to_string()))?;
        Ok(Code::Window(path))
    }

    pub fn base_pieces(&self) -> Vec<VertexId> {
        (0..self.pairs.len())
            .filter(|&v| self.sites[self.pairs[v].0].in_base_cell())
            .map(VertexId)
            .collect()
    }

    pub fn base_edges(&self) -> Vec<EdgeId> {
        (0..self.carried.len())
            .filter(|&e| self.sites[self.carried[e]].in_base_cell())
            .map(EdgeId)
            .collect()
    }
}
