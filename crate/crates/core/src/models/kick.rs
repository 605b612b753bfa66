//! Light-particle kick map `L(x, y) = ½⟨B(x − y), x − y⟩ − V(y)` on ℝᵐ with a
//! lattice-periodic, separable potential `V`.
//!
//! The split is `V⁻ = 0`, `V⁺ = −V`, `u = ½⟨B(x − y), x − y⟩`, so every edge
//! potential is `Ψ = −V`. For `m = 1`, `B = ε²` and `V = −cos` on the lattice
//! 2π this is the standard map with coupling `−1/ε²`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lift::{cells, Lift, Site};
use super::profile::{PeriodicFn, Profile, SeparableField};
use super::ModelError;
use crate::dls::{
    find_critical_point, DiscreteLagrangian, DlsError, DlsSystem, DomainBox, EdgeData,
    HessianBlocks, LagrangianPiece, ScalarField, ZeroField,
};
use crate::symbolic::Code;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickMapSpec {
    /// One profile per coordinate; `V(x) = Σ_j V_j(x_j)`, lattice periods from
    /// the profiles.
    pub potential: Vec<Profile>,
    /// `ε²`, giving `B = ε² I`. Ignored when `b_matrix` is set.
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default)]
    pub b_matrix: Option<Vec<Vec<f64>>>,
    /// Seeds for the critical points of `V` in one lattice cell. When absent
    /// they are found by scanning each coordinate profile.
    #[serde(default)]
    pub seeds: Option<Vec<Vec<f64>>>,
    /// Largest cell offset between consecutive sites (default 3 for m = 1,
    /// 1 otherwise).
    #[serde(default)]
    pub translation_radius: Option<i64>,
    /// Cells `[−C, C]^m` kept in the lift (default 8 for m = 1, 2 otherwise).
    #[serde(default)]
    pub cells: Option<i64>,
}

impl KickMapSpec {
    pub fn new(potential: Vec<Profile>, mass: f64) -> Self {
        Self {
            potential,
            mass: Some(mass),
            b_matrix: None,
            seeds: None,
            translation_radius: None,
            cells: None,
        }
    }

    fn dim(&self) -> usize {
        self.potential.len()
    }

    fn b(&self) -> Result<DMatrix<f64>, ModelError> {
        let m = self.dim();
        if let Some(rows) = &self.b_matrix {
            if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                return Err(ModelError::Invalid(format!("b_matrix must be {m}×{m}")));
            }
            let b = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
            if (&b - b.transpose()).amax() > 1e-12 * b.amax().max(1.0) {
                return Err(ModelError::Invariant("B symmetric".into()));
            }
            return Ok(b);
        }
        match self.mass {
            Some(e2) if e2 >= 0.0 && e2.is_finite() => Ok(DMatrix::identity(m, m) * e2),
            Some(e2) => Err(ModelError::Invalid(format!("mass must be nonnegative: {e2}"))),
            None => Err(ModelError::Invalid("either mass or b_matrix is required".into())),
        }
    }
}

pub struct KickLagrangian {
    b: DMatrix<f64>,
    v: Arc<SeparableField>,
    neg_v: Arc<SeparableField>,
    zero: ZeroField,
}

impl KickLagrangian {
    pub fn new(b: DMatrix<f64>, parts: Vec<PeriodicFn>) -> Self {
        let m = parts.len();
        Self {
            b,
            v: SeparableField::new(parts.clone(), 1.0),
            neg_v: SeparableField::new(parts, -1.0),
            zero: ZeroField(m),
        }
    }

    pub fn potential(&self) -> &SeparableField {
        &self.v
    }
}

impl DiscreteLagrangian for KickLagrangian {
    fn dim(&self) -> usize {
        self.b.nrows()
    }
    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.coupling_value(x, y) - self.v.value(y)
    }
    fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        &self.b * (x - y)
    }
    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        -(&self.b * (x - y)) - self.v.gradient(y)
    }
    fn hessian(&self, x: &DVector<f64>, y: &DVector<f64>) -> HessianBlocks {
        let mut h = self.coupling_hessian(x, y);
        h.yy -= self.v.hessian(y);
        h
    }
    fn v_minus(&self) -> &dyn ScalarField {
        &self.zero
    }
    fn v_plus(&self) -> &dyn ScalarField {
        self.neg_v.as_ref()
    }
    fn coupling_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let d = x - y;
        0.5 * d.dot(&(&self.b * &d))
    }
    fn coupling_grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        &self.b * (x - y)
    }
    fn coupling_grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        -(&self.b * (x - y))
    }
    fn coupling_hessian(&self, _x: &DVector<f64>, _y: &DVector<f64>) -> HessianBlocks {
        HessianBlocks { xx: self.b.clone(), xy: -self.b.clone(), yy: self.b.clone() }
    }
}

pub struct KickMap {
    pub system: DlsSystem,
    pub spec: KickMapSpec,
    pub lattice: DVector<f64>,
    /// Critical points of `V` in the base cell.
    pub classes: Vec<DVector<f64>>,
    pub twist_nondegenerate: bool,
    lift: Lift,
}

impl KickMap {
    pub fn sites(&self) -> &[Site] {
        &self.lift.sites
    }

    pub fn site_near(&self, x: &DVector<f64>) -> Result<usize, ModelError> {
        self.lift.site_near(x, 1e-6 * self.lattice.amax())
    }

    pub fn code_from_sites(&self, seq: &[usize], periodic: bool) -> Result<Code, ModelError> {
        self.lift.code_from_sites(seq, periodic)
    }

    pub fn code_from_points(
        &self,
        points: &[DVector<f64>],
        periodic: bool,
    ) -> Result<Code, ModelError> {
        self.lift.code_from_points(points, periodic, 1e-6 * self.lattice.amax())
    }

    pub fn random_code<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Result<Code, ModelError> {
        self.lift.random_code(len, rng)
    }
}

fn product_points(per_axis: &[Vec<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for axis in per_axis {
        out = out
            .into_iter()
            .flat_map(|v| {
                axis.iter().map(move |&c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out.into_iter().map(DVector::from_vec).collect()
}

/// Half the smallest cyclic gap between critical-point coordinates, per axis.
fn half_gaps(classes: &[DVector<f64>], lattice: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(lattice.len(), |j, _| {
        let mut cs: Vec<f64> = classes.iter().map(|c| c[j].rem_euclid(lattice[j])).collect();
        cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cs.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * lattice[j]);
        let mut gap = lattice[j];
        for k in 0..cs.len() {
            let next = if k + 1 < cs.len() { cs[k + 1] } else { cs[0] + lattice[j] };
            if cs.len() > 1 {
                gap = gap.min(next - cs[k]);
            }
        }
        0.5 * gap
    })
}

pub fn make_kick_map(spec: &KickMapSpec) -> Result<KickMap, ModelError> {
    let m = spec.dim();
    if m == 0 {
        return Err(ModelError::Invalid("potential needs at least one coordinate".into()));
    }
    let b = spec.b()?;
    let parts = spec.potential.iter().map(|p| p.compile()).collect::<Result<Vec<_>, _>>()?;
    let lattice = DVector::from_fn(m, |j, _| parts[j].period());
    let lag = Arc::new(KickLagrangian::new(b.clone(), parts.clone()));
    let psi: Arc<dyn ScalarField> = lag.neg_v.clone();

    // Critical points of Ψ = −V in the base cell.
    let seeds: Vec<DVector<f64>> = match &spec.seeds {
        Some(s) => {
            if s.iter().any(|v| v.len() != m) {
                return Err(ModelError::Invalid("seed dimension".into()));
            }
            s.iter().map(|v| DVector::from_vec(v.clone())).collect()
        }
        None => product_points(&parts.iter().map(|p| p.critical_points()).collect::<Vec<_>>()),
    };
    let mut classes: Vec<Arc<EdgeData>> = Vec::new();
    for seed in &seeds {
        let domain = DomainBox::new(seed.clone(), &lattice * 0.5);
        let data = match find_critical_point(psi.clone(), &domain, seed) {
            Ok(d) => d,
            Err(DlsError::NoCriticalPoint) | Err(DlsError::DegenerateCriticalPoint) => continue,
            Err(e) => return Err(e.into()),
        };
        let reduced = DVector::from_fn(m, |j, _| data.point[j].rem_euclid(lattice[j]));
        let reduced = reduced.map_with_location(|j, _, v| {
            if (lattice[j] - v).abs() < 1e-9 * lattice[j] { 0.0 } else { v }
        });
        if !classes.iter().any(|c| (&c.point - &reduced).amax() < 1e-9 * lattice.amax()) {
            classes.push(Arc::new(data.translated(&(&reduced - &data.point))));
        }
    }
    if classes.is_empty() {
        return Err(ModelError::NotAntiIntegrable(
            "no nondegenerate critical points of the potential".into(),
        ));
    }
    // Recompute the edge data on boxes that separate neighbouring classes.
    let points: Vec<DVector<f64>> = classes.iter().map(|c| c.point.clone()).collect();
    let half = half_gaps(&points, &lattice);
    let classes: Vec<Arc<EdgeData>> = points
        .iter()
        .map(|p| {
            find_critical_point(psi.clone(), &DomainBox::new(p.clone(), half.clone()), p)
                .map(Arc::new)
        })
        .collect::<Result<_, _>>()?;

    let radius = spec.translation_radius.unwrap_or(if m == 1 { 3 } else { 1 });
    let c = spec.cells.unwrap_or(if m == 1 { 8 } else { 2 });
    if radius < 0 || c < 0 {
        return Err(ModelError::Invalid("translation radius and cells must be nonnegative".into()));
    }
    let mut sites = Vec::new();
    let mut site_data = Vec::new();
    for cell in cells(m, c) {
        let shift = DVector::from_fn(m, |j, _| lattice[j] * cell[j] as f64);
        for (k, base) in classes.iter().enumerate() {
            let data = Arc::new(base.translated(&shift));
            sites.push(Site { class: k, cell: cell.clone(), point: data.point.clone() });
            site_data.push(data);
        }
    }
    let lift = Lift::build(sites, radius, |_, _| true);
    let pieces = lift
        .pairs
        .iter()
        .map(|&(a, b)| {
            LagrangianPiece::new(
                lag.clone(),
                DomainBox::new(lift.sites[a].point.clone(), half.clone()),
                DomainBox::new(lift.sites[b].point.clone(), half.clone()),
            )
        })
        .collect();
    let edge_data = lift.carried.iter().map(|&s| site_data[s].clone()).collect();
    let mut system = DlsSystem::new(lift.graph.clone(), pieces, edge_data)?;
    system.fundamental_pieces = Some(lift.base_pieces());
    system.fundamental_edges = Some(lift.base_edges());
    let det = b.determinant();
    Ok(KickMap {
        system,
        spec: spec.clone(),
        lattice,
        classes: points,
        twist_nondegenerate: det.abs() > 1e-12 * b.norm().powi(m as i32).max(1e-300),
        lift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn cosine_classes() {
        let km = make_kick_map(&KickMapSpec::new(vec![Profile::neg_cos(1.0, TAU)], 0.05)).unwrap();
        assert_eq!(km.classes.len(), 2);
        assert!(km.classes[0][0].abs() < 1e-12);
        assert!((km.classes[1][0] - PI).abs() < 1e-12);
        assert!(km.twist_nondegenerate);
    }

    #[test]
    fn rescaled_cosine_seeds() {
        let mut spec = KickMapSpec::new(vec![Profile::neg_cos(1.0 / (TAU * TAU), 1.0)], 0.01);
        spec.seeds = Some(vec![vec![0.01], vec![0.49]]);
        let km = make_kick_map(&spec).unwrap();
        assert!(km.classes[0][0].abs() < 1e-12 && (km.classes[1][0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn flat_potential_rejected() {
        let err = make_kick_map(&KickMapSpec::new(vec![Profile::Zero { period: 1.0 }], 0.1));
        assert!(matches!(err, Err(ModelError::NotAntiIntegrable(_))));
    }
}
