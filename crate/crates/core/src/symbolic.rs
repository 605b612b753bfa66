//! Symbol spaces: transition graphs, codes over their edges, and the
//! integer-multiple codes used by the standard map.
//!
//! Codes reference edges rather than vertices so that several edges may
//! join the same ordered pair of vertices (one per critical point).

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolicError {
    #[error("edge not in graph: {0}")]
    UnknownEdge(u64),
    #[error("vertex not in graph: {0}")]
    UnknownVertex(u64),
    #[error("duplicate {kind} label {label}")]
    DuplicateLabel { kind: &'static str, label: u64 },
    #[error("word count overflow at length {0}; use the spectral radius instead")]
    WordCountOverflow(usize),
    #[error("code must contain at least one edge")]
    EmptyCode,
    #[error("word length must be at least 1")]
    ZeroLength,
    #[error("code is not a path in the graph (break after slot {0})")]
    NotComposable(usize),
    #[error("random walk got stuck at vertex {0}")]
    DeadEnd(u64),
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// Dense vertex index into a [`TransitionGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

/// Dense edge index into a [`TransitionGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub label: u64,
    pub src: VertexId,
    pub dst: VertexId,
}

/// Directed multigraph. Vertices and edges carry external integer labels
/// (used by the JSON format) and are addressed internally by dense ids.
#[derive(Debug, Clone, Default)]
pub struct TransitionGraph {
    vertex_labels: Vec<u64>,
    vertex_index: HashMap<u64, VertexId>,
    edges: Vec<Edge>,
    edge_index: HashMap<u64, EdgeId>,
    out_edges: Vec<Vec<EdgeId>>,
}

impl TransitionGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph with vertices labelled `0..n`.
    pub fn with_vertices(n: usize) -> Self {
        let mut g = Self::new();
        for v in 0..n {
            g.add_vertex(v as u64).expect("fresh labels");
        }
        g
    }

    pub fn add_vertex(&mut self, label: u64) -> Result<VertexId, SymbolicError> {
        if self.vertex_index.contains_key(&label) {
            return Err(SymbolicError::DuplicateLabel { kind: "vertex", label });
        }
        let id = VertexId(self.vertex_labels.len());
        self.vertex_labels.push(label);
        self.vertex_index.insert(label, id);
        self.out_edges.push(Vec::new());
        Ok(id)
    }

    /// Adds an edge labelled by its dense index.
    pub fn add_edge(&mut self, src: VertexId, dst: VertexId) -> EdgeId {
        let label = self.edges.len() as u64;
        self.add_labelled_edge(label, src, dst)
            .expect("dense labels are unique unless mixed with custom labels")
    }

    pub fn add_labelled_edge(
        &mut self,
        label: u64,
        src: VertexId,
        dst: VertexId,
    ) -> Result<EdgeId, SymbolicError> {
        assert!(src.0 < self.vertex_count() && dst.0 < self.vertex_count());
        if self.edge_index.contains_key(&label) {
            return Err(SymbolicError::DuplicateLabel { kind: "edge", label });
        }
        let id = EdgeId(self.edges.len());
        self.edges.push(Edge { label, src, dst });
        self.edge_index.insert(label, id);
        self.out_edges[src.0].push(id);
        Ok(id)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, label: u64) -> Option<VertexId> {
        self.vertex_index.get(&label).copied()
    }

    pub fn vertex_label(&self, v: VertexId) -> u64 {
        self.vertex_labels[v.0]
    }

    pub fn edge_by_label(&self, label: u64) -> Option<EdgeId> {
        self.edge_index.get(&label).copied()
    }

    pub fn edge(&self, e: EdgeId) -> Result<&Edge, SymbolicError> {
        self.edges
            .get(e.0)
            .ok_or(SymbolicError::UnknownEdge(e.0 as u64))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> {
        self.edges.iter().enumerate().map(|(i, e)| (EdgeId(i), e))
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[v.0]
    }

    /// Vertex adjacency matrix counting parallel edges.
    pub fn adjacency(&self) -> Vec<Vec<u64>> {
        let n = self.vertex_count();
        let mut a = vec![vec![0u64; n]; n];
        for e in &self.edges {
            a[e.src.0][e.dst.0] += 1;
        }
        a
    }

    /// Complete graph on `q` vertices, one edge per ordered pair (loops included).
    pub fn complete(q: usize) -> Self {
        let mut g = Self::with_vertices(q);
        for i in 0..q {
            for j in 0..q {
                g.add_edge(VertexId(i), VertexId(j));
            }
        }
        g
    }

    /// Directed cycle of length `n`.
    pub fn cycle(n: usize) -> Self {
        let mut g = Self::with_vertices(n);
        for i in 0..n {
            g.add_edge(VertexId(i), VertexId((i + 1) % n));
        }
        g
    }

    /// The golden-mean shift: edges 0→0, 0→1, 1→0.
    pub fn golden_mean() -> Self {
        let mut g = Self::with_vertices(2);
        g.add_edge(VertexId(0), VertexId(0));
        g.add_edge(VertexId(0), VertexId(1));
        g.add_edge(VertexId(1), VertexId(0));
        g
    }

    /// Random walk of `len` edges starting at `start` (or a random vertex).
    pub fn random_path<R: Rng + ?Sized>(
        &self,
        len: usize,
        start: Option<VertexId>,
        rng: &mut R,
    ) -> Result<Vec<EdgeId>, SymbolicError> {
        if self.vertex_count() == 0 {
            return Err(SymbolicError::EmptyCode);
        }
        let mut v = start.unwrap_or_else(|| VertexId(rng.gen_range(0..self.vertex_count())));
        let mut path = Vec::with_capacity(len);
        for _ in 0..len {
            let out = self.out_edges(v);
            if out.is_empty() {
                return Err(SymbolicError::DeadEnd(self.vertex_label(v)));
            }
            let e = out[rng.gen_range(0..out.len())];
            path.push(e);
            v = self.edges[e.0].dst;
        }
        Ok(path)
    }

    pub fn to_json(&self) -> GraphFile {
        GraphFile {
            vertices: self.vertex_labels.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    id: e.label,
                    src: self.vertex_labels[e.src.0],
                    dst: self.vertex_labels[e.dst.0],
                })
                .collect(),
        }
    }

    pub fn from_json(file: &GraphFile) -> Result<Self, SymbolicError> {
        let mut g = Self::new();
        for &v in &file.vertices {
            g.add_vertex(v)?;
        }
        for e in &file.edges {
            let src = g.vertex(e.src).ok_or(SymbolicError::UnknownVertex(e.src))?;
            let dst = g.vertex(e.dst).ok_or(SymbolicError::UnknownVertex(e.dst))?;
            g.add_labelled_edge(e.id, src, dst)?;
        }
        Ok(g)
    }

    pub fn from_json_str(s: &str) -> Result<Self, SymbolicError> {
        let file: GraphFile =
            serde_json::from_str(s).map_err(|e| SymbolicError::Json(e.to_string()))?;
        Self::from_json(&file)
    }
}

/// On-disk graph format: `{"vertices":[..],"edges":[{"id":..,"src":..,"dst":..}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<u64>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: u64,
    pub src: u64,
    pub dst: u64,
}

/// Finite stand-in for a bi-infinite path.
///
/// `Periodic` repeats its cycle forever. `Window` is a finite stretch whose
/// first and last slots are pinned to the critical points of their edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Code {
    Periodic(Vec<EdgeId>),
    Window(Vec<EdgeId>),
}

impl Code {
    pub fn edges(&self) -> &[EdgeId] {
        match self {
            Code::Periodic(e) | Code::Window(e) => e,
        }
    }

    pub fn len(&self) -> usize {
        self.edges().len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges().is_empty()
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Code::Periodic(_))
    }

    /// Cyclic rotation by `k` slots (periodic codes only; windows are returned unchanged).
    pub fn rotated(&self, k: usize) -> Code {
        match self {
            Code::Periodic(e) if !e.is_empty() => {
                let mut v = e.clone();
                v.rotate_left(k % e.len());
                Code::Periodic(v)
            }
            other => other.clone(),
        }
    }

    pub fn to_json(&self, graph: &TransitionGraph) -> Result<CodeFile, SymbolicError> {
        let edges = self
            .edges()
            .iter()
            .map(|&e| graph.edge(e).map(|r| r.label))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CodeFile {
            kind: if self.is_periodic() {
                CodeKind::Periodic
            } else {
                CodeKind::Window
            },
            edges,
        })
    }

    pub fn from_json(file: &CodeFile, graph: &TransitionGraph) -> Result<Self, SymbolicError> {
        let edges = file
            .edges
            .iter()
            .map(|&l| graph.edge_by_label(l).ok_or(SymbolicError::UnknownEdge(l)))
            .collect::<Result<Vec<_>, _>>()?;
        if edges.is_empty() {
            return Err(SymbolicError::EmptyCode);
        }
        Ok(match file.kind {
            CodeKind::Periodic => Code::Periodic(edges),
            CodeKind::Window => Code::Window(edges),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Periodic,
    Window,
}

/// On-disk code format: `{"type":"periodic"|"window","edges":[..]}` with edge labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeFile {
    #[serde(rename = "type")]
    pub kind: CodeKind,
    pub edges: Vec<u64>,
}

/// True iff consecutive edges compose (cyclically for periodic codes).
pub fn is_admissible(code: &Code, graph: &TransitionGraph) -> Result<bool, SymbolicError> {
    Ok(first_break(code, graph)?.is_none())
}

/// First slot `i` such that edge `i` does not feed into edge `i + 1`.
pub fn first_break(code: &Code, graph: &TransitionGraph) -> Result<Option<usize>, SymbolicError> {
    let edges = code.edges();
    for &e in edges {
        graph.edge(e)?;
    }
    let n = edges.len();
    let pairs = if code.is_periodic() { n } else { n.saturating_sub(1) };
    for i in 0..pairs {
        let a = graph.edge(edges[i])?;
        let b = graph.edge(edges[(i + 1) % n])?;
        if a.dst != b.src {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Number θ_n of admissible words of `n` symbols, i.e. paths visiting `n`
/// vertices, counted with edge multiplicity: the sum of all entries of
/// Aⁿ⁻¹. Exact integer dynamic programming.
pub fn count_words(graph: &TransitionGraph, n: usize) -> Result<u128, SymbolicError> {
    if n == 0 {
        return Err(SymbolicError::ZeroLength);
    }
    let mut ends: Vec<u128> = vec![1; graph.vertex_count()];
    for _ in 1..n {
        let mut next = vec![0u128; graph.vertex_count()];
        for e in &graph.edges {
            next[e.dst.0] = next[e.dst.0]
                .checked_add(ends[e.src.0])
                .ok_or(SymbolicError::WordCountOverflow(n))?;
        }
        ends = next;
    }
    ends.iter().try_fold(0u128, |acc, &c| {
        acc.checked_add(c).ok_or(SymbolicError::WordCountOverflow(n))
    })
}

/// Standard-map code: `a_k = π·m_k`, stored as the integers `m_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardCode {
    pub multiples: Vec<i64>,
    pub periodic: bool,
}

impl StandardCode {
    pub fn periodic(multiples: Vec<i64>) -> Self {
        Self { multiples, periodic: true }
    }

    pub fn window(multiples: Vec<i64>) -> Self {
        Self { multiples, periodic: false }
    }

    pub fn len(&self) -> usize {
        self.multiples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multiples.is_empty()
    }

    pub fn value(&self, k: usize) -> f64 {
        std::f64::consts::PI * self.multiples[k] as f64
    }

    /// Second differences `m_{k-1} - 2 m_k + m_{k+1}` in units of π, over the
    /// indices where they are defined (all indices for periodic codes).
    pub fn second_differences(&self) -> Vec<(usize, i64)> {
        let n = self.multiples.len();
        let m = &self.multiples;
        if self.periodic {
            (0..n)
                .map(|k| (k, m[(k + n - 1) % n] - 2 * m[k] + m[(k + 1) % n]))
                .collect()
        } else {
            (1..n.saturating_sub(1))
                .map(|k| (k, m[k - 1] - 2 * m[k] + m[k + 1]))
                .collect()
        }
    }

    /// Window code with `a_0 = π·m0`, `a_1 = π·m1` and prescribed second
    /// differences (in units of π) continuing the sequence.
    pub fn from_second_differences(m0: i64, m1: i64, diffs: &[i64]) -> Self {
        let mut m = vec![m0, m1];
        for &b in diffs {
            let k = m.len();
            m.push(b + 2 * m[k - 1] - m[k - 2]);
        }
        Self::window(m)
    }

    pub fn from_json_str(s: &str) -> Result<Self, SymbolicError> {
        serde_json::from_str(s).map_err(|e| SymbolicError::Json(e.to_string()))
    }
}

/// True iff `|a_{k-1} - 2a_k + a_{k+1}| <= bound` wherever defined.
pub fn standard_code_check(code: &StandardCode, bound: f64) -> bool {
    code.second_differences()
        .iter()
        .all(|&(_, d)| std::f64::consts::PI * (d.abs() as f64) <= bound)
}
