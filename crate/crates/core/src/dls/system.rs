use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::critical::{find_critical_point, EdgeData};
use super::lagrangian::{DiscreteLagrangian, LagrangianPiece, ScalarField};
use super::DlsError;
use crate::symbolic::{first_break, Code, EdgeId, TransitionGraph, VertexId};

/// `Ψ_γ = V_κ⁺ + V_κ'⁻` for an edge `γ = (κ, κ')`.
pub struct EdgePotential {
    pub from: Arc<dyn DiscreteLagrangian>,
    pub to: Arc<dyn DiscreteLagrangian>,
}

impl ScalarField for EdgePotential {
    fn dim(&self) -> usize {
        self.from.dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.from.v_plus().value(x) + self.to.v_minus().value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.from.v_plus().gradient(x) + self.to.v_minus().gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.from.v_plus().hessian(x) + self.to.v_minus().hessian(x)
    }
}

/// A discrete Lagrangian system: one piece per graph vertex and the
/// critical-point data of every edge.
#[derive(Clone)]
pub struct DlsSystem {
    pub graph: TransitionGraph,
    pub pieces: Vec<LagrangianPiece>,
    pub edge_data: Vec<Arc<EdgeData>>,
    /// Representatives modulo a symmetry of the system, if the builder knows
    /// one. Uniformity checks only visit these.
    pub fundamental_pieces: Option<Vec<VertexId>>,
    pub fundamental_edges: Option<Vec<EdgeId>>,
}

impl DlsSystem {
    pub fn new(
        graph: TransitionGraph,
        pieces: Vec<LagrangianPiece>,
        edge_data: Vec<Arc<EdgeData>>,
    ) -> Result<Self, DlsError> {
        if pieces.len() != graph.vertex_count() {
            return Err(DlsError::Shape(format!(
                "{} pieces for {} vertices",
                pieces.len(),
                graph.vertex_count()
            )));
        }
        if edge_data.len() != graph.edge_count() {
            return Err(DlsError::Shape(format!(
                "{} edge records for {} edges",
                edge_data.len(),
                graph.edge_count()
            )));
        }
        let m = pieces.first().map(|p| p.dim()).unwrap_or(0);
        if pieces.iter().any(|p| p.dim() != m) || edge_data.iter().any(|e| e.dim() != m) {
            return Err(DlsError::Shape("mixed dimensions".into()));
        }
        Ok(Self {
            graph,
            pieces,
            edge_data,
            fundamental_pieces: None,
            fundamental_edges: None,
        })
    }

    /// Builds the edge data by Newton's method from one seed per edge.
    pub fn from_seeds(
        graph: TransitionGraph,
        pieces: Vec<LagrangianPiece>,
        seeds: &[DVector<f64>],
    ) -> Result<Self, DlsError> {
        if seeds.len() != graph.edge_count() {
            return Err(DlsError::Shape("one seed per edge required".into()));
        }
        let mut data = Vec::with_capacity(seeds.len());
        for ((_, edge), seed) in graph.edges().zip(seeds) {
            let from = &pieces[edge.src.0];
            let to = &pieces[edge.dst.0];
            let domain = from
                .domain_plus
                .intersect(&to.domain_minus)
                .ok_or(DlsError::NoCriticalPoint)?;
            let psi = Arc::new(EdgePotential {
                from: from.lagrangian.clone(),
                to: to.lagrangian.clone(),
            });
            data.push(Arc::new(find_critical_point(psi, &domain, seed)?));
        }
        Self::new(graph, pieces, data)
    }

    pub fn dim(&self) -> usize {
        self.pieces.first().map(|p| p.dim()).unwrap_or(0)
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeData {
        &self.edge_data[e.0]
    }

    /// Pieces on either side of slot `i`: `(κ_{i-1}, κ_i)`.
    pub fn slot_pieces(&self, code: &Code, i: usize) -> (&LagrangianPiece, &LagrangianPiece) {
        let e = self.graph.edge(code.edges()[i]).expect("validated code");
        (&self.pieces[e.src.0], &self.pieces[e.dst.0])
    }

    /// The AI-limit configuration `a(code)`.
    pub fn code_points(&self, code: &Code) -> Vec<DVector<f64>> {
        code.edges().iter().map(|&e| self.edge(e).point.clone()).collect()
    }

    pub fn check_code(&self, code: &Code) -> Result<(), DlsError> {
        if code.is_empty() {
            return Err(DlsError::EmptyCode);
        }
        match first_break(code, &self.graph)? {
            Some(i) => Err(DlsError::NotAdmissible(i)),
            None => Ok(()),
        }
    }
}

/// Slots carrying an Euler–Lagrange equation: every slot of a periodic
/// code, the interior of a window.
pub fn equation_slots(code: &Code) -> std::ops::Range<usize> {
    let n = code.len();
    if code.is_periodic() {
        0..n
    } else {
        1..n.saturating_sub(1).max(1)
    }
}

/// Neighbouring slots `(i - 1, i + 1)`, cyclic for periodic codes.
pub fn neighbours(code: &Code, i: usize) -> (usize, usize) {
    let n = code.len();
    if code.is_periodic() {
        ((i + n - 1) % n, (i + 1) % n)
    } else {
        (i - 1, i + 1)
    }
}
