//! Separatrix map in Lagrangian form.
//!
//! Pieces are labelled `κ = (k, σ, θ)` with a jump `k ∈ [c₁, c₂]`, a loop
//! `σ = ±1` and a sign `θ = ±1`:
//!
//! ```text
//! L_κ(x₋, x₊) = θ·exp(λ(x₊ − x₋ − k − ω̂_σ)) + V_σ(x₋)
//! ```
//!
//! with `x₋, x₊` in the chart `[−1/4, 3/4]` and 1-periodic `V_σ`. Consecutive
//! pieces satisfy `σ' = σθ`; there is one edge per critical point of `V_σ'`.
//! In global coordinates `X_{j+1} = X_j + x_{j+1} − x_j − k_j`, so orbits move
//! left by roughly `k` per step.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::profile::{PeriodicFn, Profile, SeparableField};
use super::ModelError;
use crate::dls::{
    find_critical_point, uniformity_report, DiscreteLagrangian, DlsSystem, DomainBox, EdgeData,
    HessianBlocks, LagrangianPiece, Orbit, ScalarField, UniformityReport, ZeroField,
};
use crate::symbolic::{Code, EdgeId, TransitionGraph, VertexId};

const CHART_CENTER: f64 = 0.25;
const CHART_HALF: f64 = 0.5;

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SepMapSpec {
    /// Splitting exponent `λ`.
    pub lambda_s: f64,
    /// `ω̂_σ` for `σ = −1`.
    #[serde(default)]
    pub omega_hat_minus: f64,
    /// `ω̂_σ` for `σ = +1`.
    #[serde(default)]
    pub omega_hat_plus: f64,
    pub potential_minus: Profile,
    pub potential_plus: Profile,
    /// Smallest jump.
    pub c1: i64,
    /// Largest jump kept in the truncated graph (default `c₁ + 10`).
    #[serde(default)]
    pub c2: Option<i64>,
    /// Keep the exponential coupling; `false` gives the anti-integrable limit.
    #[serde(default = "default_true")]
    pub coupling: bool,
}

impl SepMapSpec {
    pub fn new(lambda_s: f64, potential: Profile, c1: i64) -> Self {
        Self {
            lambda_s,
            omega_hat_minus: 0.0,
            omega_hat_plus: 0.0,
            potential_minus: potential.clone(),
            potential_plus: potential,
            c1,
            c2: None,
            coupling: true,
        }
    }

    pub fn omega_hat(&self, sigma: i8) -> f64 {
        if sigma < 0 { self.omega_hat_minus } else { self.omega_hat_plus }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PieceLabel {
    pub k: i64,
    pub sigma: i8,
    pub theta: i8,
}

pub struct SepLagrangian {
    lambda: f64,
    shift: f64,
    theta: f64,
    coupled: bool,
    v: Arc<SeparableField>,
    zero: ZeroField,
}

impl SepLagrangian {
    fn exp_term(&self, x: f64, y: f64) -> f64 {
        if self.coupled { self.theta * (self.lambda * (y - x - self.shift)).exp() } else { 0.0 }
    }
}

impl DiscreteLagrangian for SepLagrangian {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.exp_term(x[0], y[0]) + self.v.value(x)
    }
    fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.coupling_grad_x(x, y) + self.v.gradient(x)
    }
    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.coupling_grad_y(x, y)
    }
    fn hessian(&self, x: &DVector<f64>, y: &DVector<f64>) -> HessianBlocks {
        let mut h = self.coupling_hessian(x, y);
        h.xx += self.v.hessian(x);
        h
    }
    fn v_minus(&self) -> &dyn ScalarField {
        self.v.as_ref()
    }
    fn v_plus(&self) -> &dyn ScalarField {
        &self.zero
    }
    fn coupling_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.exp_term(x[0], y[0])
    }
    fn coupling_grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, -self.lambda * self.exp_term(x[0], y[0]))
    }
    fn coupling_grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, self.lambda * self.exp_term(x[0], y[0]))
    }
    fn coupling_hessian(&self, x: &DVector<f64>, y: &DVector<f64>) -> HessianBlocks {
        let e = self.lambda * self.lambda * self.exp_term(x[0], y[0]);
        let s = |v: f64| nalgebra::DMatrix::from_element(1, 1, v);
        HessianBlocks { xx: s(e), xy: s(-e), yy: s(e) }
    }
}

pub struct SepMap {
    pub system: DlsSystem,
    pub spec: SepMapSpec,
    pub labels: Vec<PieceLabel>,
    /// Critical points of `V_−` and `V_+` in the chart.
    pub critical_minus: Vec<f64>,
    pub critical_plus: Vec<f64>,
    pub uniformity: UniformityReport,
    vertex_of: HashMap<PieceLabel, VertexId>,
    edge_of: HashMap<(VertexId, VertexId, usize), EdgeId>,
    potentials: [PeriodicFn; 2],
}

/// One step of a path in global coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalPoint {
    pub x: f64,
    pub sigma: i8,
    pub theta: i8,
}

impl SepMap {
    pub fn vertex(&self, label: PieceLabel) -> Option<VertexId> {
        self.vertex_of.get(&label).copied()
    }

    pub fn critical_points(&self, sigma: i8) -> &[f64] {
        if sigma < 0 { &self.critical_minus } else { &self.critical_plus }
    }

    fn potential(&self, sigma: i8) -> &PeriodicFn {
        &self.potentials[usize::from(sigma > 0)]
    }

    /// Code from pieces `κ_{−1}, …, κ_{n−1}` (window) or `κ_0, …, κ_{n−1}`
    /// (periodic, `κ_{−1} = κ_{n−1}`) and the index of the critical point at
    /// each slot.
    pub fn code_from_path(
        &self,
        pieces: &[PieceLabel],
        critical: &[usize],
        periodic: bool,
    ) -> Result<Code, ModelError> {
        let n = critical.len();
        let expected = if periodic { n } else { n + 1 };
        if pieces.len() != expected || n == 0 {
            return Err(ModelError::Invalid("path and slot counts do not match".into()));
        }
        let v = |l: &PieceLabel| {
            self.vertex(*l).ok_or_else(|| ModelError::Invalid(format!("no piece {l:?}")))
        };
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let (src, dst) = if periodic {
                (&pieces[(i + n - 1) % n], &pieces[i])
            } else {
                (&pieces[i], &pieces[i + 1])
            };
            let key = (v(src)?, v(dst)?, critical[i]);
            edges.push(*self.edge_of.get(&key).ok_or(ModelError::NoTransition(i, i + 1))?);
        }
        Ok(if periodic { Code::Periodic(edges) } else { Code::Window(edges) })
    }

    pub fn random_code<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Result<Code, ModelError> {
        let path = self
            .system
            .graph
            .random_path(len, None, rng)
            .map_err(|e| ModelError::Invalid(e.to_string()))?;
        Ok(Code::Window(path))
    }

    /// Label of the piece following each slot.
    pub fn slot_labels(&self, code: &Code) -> Vec<PieceLabel> {
        code.edges()
            .iter()
            .map(|&e| self.labels[self.system.graph.edge(e).expect("code edge").dst.0])
            .collect()
    }

    /// Orbit in global coordinates with its labels `σ_j` and `θ_j`.
    pub fn global_orbit(&self, orbit: &Orbit) -> Vec<GlobalPoint> {
        let labels = self.slot_labels(&orbit.code);
        let n = orbit.points.len();
        let mut x = orbit.points[0][0];
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let theta = if j == 0 {
                let e = self.system.graph.edge(orbit.code.edges()[0]).expect("code edge");
                self.labels[e.src.0].theta
            } else {
                labels[j - 1].theta
            };
            out.push(GlobalPoint { x, sigma: labels[j].sigma, theta });
            if j + 1 < n {
                x += orbit.points[j + 1][0] - orbit.points[j][0] - labels[j].k as f64;
            }
        }
        out
    }

    /// Largest violation of the generating relations along the orbit:
    /// with `y_j = −λ ∂_x L_j(X_j, X_{j+1})`,
    ///
    /// ```text
    /// y_{j+1} = y_j + λ V'_σj(X_j),  X_{j+1} = X_j + (ω_σj + log|y_{j+1}|)/λ,
    /// σ_{j+1} = σ_j sign y_{j+1},    ω_σ = λ ω̂_σ − log λ².
    /// ```
    ///
    /// Label mismatches count as infinite error.
    pub fn generating_relations_error(&self, orbit: &Orbit) -> f64 {
        let lam = self.spec.lambda_s;
        let labels = self.slot_labels(&orbit.code);
        let n = orbit.points.len();
        let periodic = orbit.code.is_periodic();
        let x = |j: usize| orbit.points[j % n][0];
        let dx = |j: usize| x(j + 1) - x(j) - labels[j % n].k as f64;
        // y_j from the closed form of −λ ∂_x L_j.
        let y = |j: usize| {
            let l = labels[j % n];
            let e = (lam * (dx(j) - self.spec.omega_hat(l.sigma))).exp();
            lam * lam * l.theta as f64 * e - lam * self.potential(l.sigma).derivative(x(j))
        };
        let last = if periodic { n } else { n.saturating_sub(2) };
        let mut worst: f64 = 0.0;
        for j in 0..last {
            let l = labels[j % n];
            let y_next = y(j) + lam * self.potential(l.sigma).derivative(x(j));
            let omega = lam * self.spec.omega_hat(l.sigma) - (lam * lam).ln();
            let step = (omega + y_next.abs().ln()) / lam;
            let sigma_next = l.sigma * if y_next >= 0.0 { 1 } else { -1 };
            if sigma_next != labels[(j + 1) % n].sigma {
                return f64::INFINITY;
            }
            worst = worst.max((y_next - y(j + 1)).abs()).max((step - dx(j)).abs());
        }
        worst
    }
}

pub fn make_sepmap(spec: &SepMapSpec) -> Result<SepMap, ModelError> {
    let lam = spec.lambda_s;
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(ModelError::Invalid(format!("lambda_s must be positive: {lam}")));
    }
    let c2 = spec.c2.unwrap_or(spec.c1 + 10);
    if spec.c1 < 1 || c2 < spec.c1 {
        return Err(ModelError::Invalid(format!("need 1 <= c1 <= c2, got {} and {c2}", spec.c1)));
    }
    let potentials = [spec.potential_minus.compile()?, spec.potential_plus.compile()?];
    for p in &potentials {
        if (p.period() - 1.0).abs() > 1e-12 {
            return Err(ModelError::Invalid("Melnikov potentials must be 1-periodic".into()));
        }
    }
    let chart = DomainBox::cube(DVector::from_element(1, CHART_CENTER), CHART_HALF);
    let mut crit: [Vec<Arc<EdgeData>>; 2] = [Vec::new(), Vec::new()];
    for (s, p) in potentials.iter().enumerate() {
        let psi: Arc<dyn ScalarField> = SeparableField::new(vec![p.clone()], 1.0);
        for c in p.critical_points() {
            // Move into the chart.
            let c = if c > CHART_CENTER + CHART_HALF - 1e-12 { c - 1.0 } else { c };
            let seed = DVector::from_element(1, c);
            if let Ok(e) = find_critical_point(psi.clone(), &chart, &seed) {
                if !crit[s].iter().any(|d| (d.point[0] - e.point[0]).abs() < 1e-9) {
                    crit[s].push(Arc::new(e));
                }
            }
        }
        if crit[s].is_empty() {
            return Err(ModelError::NotAntiIntegrable(
                "Melnikov potential has no nondegenerate critical point".into(),
            ));
        }
    }

    let mut graph = TransitionGraph::new();
    let mut labels = Vec::new();
    let mut vertex_of = HashMap::new();
    let mut pieces = Vec::new();
    for k in spec.c1..=c2 {
        for sigma in [-1i8, 1] {
            for theta in [-1i8, 1] {
                let label = PieceLabel { k, sigma, theta };
                let v = graph.add_vertex(labels.len() as u64).expect("fresh label");
                vertex_of.insert(label, v);
                labels.push(label);
                let lag = SepLagrangian {
                    lambda: lam,
                    shift: k as f64 + spec.omega_hat(sigma),
                    theta: theta as f64,
                    coupled: spec.coupling,
                    v: SeparableField::new(vec![potentials[usize::from(sigma > 0)].clone()], 1.0),
                    zero: ZeroField(1),
                };
                pieces.push(LagrangianPiece::new(Arc::new(lag), chart.clone(), chart.clone()));
            }
        }
    }
    let mut edge_of = HashMap::new();
    let mut edge_data = Vec::new();
    for (a, la) in labels.iter().enumerate() {
        for (b, lb) in labels.iter().enumerate() {
            if lb.sigma != la.sigma * la.theta {
                continue;
            }
            for (c, data) in crit[usize::from(lb.sigma > 0)].iter().enumerate() {
                let e = graph.add_edge(VertexId(a), VertexId(b));
                edge_of.insert((VertexId(a), VertexId(b), c), e);
                edge_data.push(data.clone());
            }
        }
    }
    let system = DlsSystem::new(graph, pieces, edge_data)?;
    let uniformity = uniformity_report(&system, None, 0)?;
    if spec.coupling && !uniformity.satisfied {
        return Err(ModelError::NotAntiIntegrable(format!(
            "c1 = {} too small: contraction bound {:.3e} not below sigma {:.3e} and 1/2",
            spec.c1, uniformity.contraction_bound, uniformity.sigma
        )));
    }
    let pts = |s: usize| crit[s].iter().map(|d| d.point[0]).collect();
    Ok(SepMap {
        system,
        spec: spec.clone(),
        labels,
        critical_minus: pts(0),
        critical_plus: pts(1),
        uniformity,
        vertex_of,
        edge_of,
        potentials,
    })
}
