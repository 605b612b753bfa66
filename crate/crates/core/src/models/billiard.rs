//! Billiard in the strip between `y = f₁(x)` and `y = d + f₂(x)`.
//!
//! Bounces alternate between the walls. A segment from `x` on one wall to
//! `y` on the other has length `√((y − x)² + h²)` with `h` the vertical gap,
//! and orbits are critical points of the total length. The split keeps the
//! wall heights in the potentials: lower→upper has `V⁻ = d − f₁`, `V⁺ = f₂`,
//! upper→lower has `V⁻ = d + f₂`, `V⁺ = −f₁`, so bounce points are critical
//! points of `d + 2f₂` (upper) and `d − 2f₁` (lower).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lift::{cells, Lift, Site};
use super::profile::{PeriodicFn, Profile, SeparableField};
use super::ModelError;
use crate::dls::{
    self, find_critical_point, AffineField, DiscreteLagrangian, DlsSystem, DomainBox, EdgeData,
    HessianBlocks, LagrangianPiece, Orbit, ScalarField,
};
use crate::symbolic::Code;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wall {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripBilliardSpec {
    pub lower: Profile,
    pub upper: Profile,
    pub width: f64,
    #[serde(default)]
    pub seeds_lower: Option<Vec<f64>>,
    #[serde(default)]
    pub seeds_upper: Option<Vec<f64>>,
    /// Largest cell offset between consecutive bounces (default 2).
    #[serde(default)]
    pub translation_radius: Option<i64>,
    /// Cells kept in the lift (default 4).
    #[serde(default)]
    pub cells: Option<i64>,
}

impl StripBilliardSpec {
    pub fn new(lower: Profile, upper: Profile, width: f64) -> Self {
        Self {
            lower,
            upper,
            width,
            seeds_lower: None,
            seeds_upper: None,
            translation_radius: None,
            cells: None,
        }
    }

    fn walls(&self) -> Result<(PeriodicFn, PeriodicFn), ModelError> {
        let f1 = self.lower.compile()?;
        let f2 = self.upper.compile()?;
        if (f1.period() - f2.period()).abs() > 1e-12 * f1.period() {
            return Err(ModelError::Invalid("walls must share a period".into()));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(ModelError::Invalid(format!("width must be positive: {}", self.width)));
        }
        let bump = f1.sup_abs().max(f2.sup_abs());
        if !(bump + 1.0 < self.width / 4.0) {
            return Err(ModelError::Invariant(format!(
                "strip too narrow: need max|f| + 1 < d/4, got {} >= {}",
                bump + 1.0,
                self.width / 4.0
            )));
        }
        Ok((f1, f2))
    }
}

/// Segment length from wall `F` at `x` to wall `G` at `y`:
/// `h = d + sx·F(x) + sy·G(y)`, `w = y − x`.
pub struct SegmentLagrangian {
    from: PeriodicFn,
    to: PeriodicFn,
    sx: f64,
    sy: f64,
    d: f64,
    v_minus: AffineField,
    v_plus: AffineField,
}

impl SegmentLagrangian {
    fn new(from: PeriodicFn, to: PeriodicFn, sx: f64, sy: f64, d: f64) -> Self {
        let v_minus = AffineField {
            inner: SeparableField::new(vec![from.clone()], 1.0),
            scale: sx,
            offset: d,
        };
        let v_plus =
            AffineField { inner: SeparableField::new(vec![to.clone()], 1.0), scale: sy, offset: 0.0 };
        Self { from, to, sx, sy, d, v_minus, v_plus }
    }

    pub fn upward(f1: &PeriodicFn, f2: &PeriodicFn, d: f64) -> Self {
        Self::new(f1.clone(), f2.clone(), -1.0, 1.0, d)
    }

    pub fn downward(f1: &PeriodicFn, f2: &PeriodicFn, d: f64) -> Self {
        Self::new(f2.clone(), f1.clone(), 1.0, -1.0, d)
    }

    /// `(L, [w, h] partials)` at `(x, y)`.
    fn parts(&self, x: f64, y: f64) -> (f64, f64, [f64; 3], [f64; 3]) {
        let (fx, dfx, d2fx) = self.from.eval(x);
        let (gy, dgy, d2gy) = self.to.eval(y);
        let w = y - x;
        let h = self.d + self.sx * fx + self.sy * gy;
        let len = w.hypot(h);
        // (w_a, h_a, h_aa) for a = x and a = y.
        (len, h, [-1.0, self.sx * dfx, self.sx * d2fx], [1.0, self.sy * dgy, self.sy * d2gy])
    }
}

impl DiscreteLagrangian for SegmentLagrangian {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.parts(x[0], y[0]).0
    }
    fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let (len, h, px, _) = self.parts(x[0], y[0]);
        let w = y[0] - x[0];
        DVector::from_element(1, (w * px[0] + h * px[1]) / len)
    }
    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let (len, h, _, py) = self.parts(x[0], y[0]);
        let w = y[0] - x[0];
        DVector::from_element(1, (w * py[0] + h * py[1]) / len)
    }
    fn hessian(&self, x: &DVector<f64>, y: &DVector<f64>) -> HessianBlocks {
        let (len, h, px, py) = self.parts(x[0], y[0]);
        let w = y[0] - x[0];
        let lx = (w * px[0] + h * px[1]) / len;
        let ly = (w * py[0] + h * py[1]) / len;
        let second = |a: &[f64; 3], b: &[f64; 3], haa: f64, la: f64, lb: f64| {
            (a[0] * b[0] + a[1] * b[1] + h * haa) / len - la * lb / len
        };
        let s = |v: f64| DMatrix::from_element(1, 1, v);
        HessianBlocks {
            xx: s(second(&px, &px, px[2], lx, lx)),
            xy: s(second(&px, &py, 0.0, lx, ly)),
            yy: s(second(&py, &py, py[2], ly, ly)),
        }
    }
    fn v_minus(&self) -> &dyn ScalarField {
        &self.v_minus
    }
    fn v_plus(&self) -> &dyn ScalarField {
        &self.v_plus
    }
}

pub struct StripBilliard {
    pub system: DlsSystem,
    pub spec: StripBilliardSpec,
    pub lower_points: Vec<f64>,
    pub upper_points: Vec<f64>,
    f1: PeriodicFn,
    f2: PeriodicFn,
    walls: Vec<Wall>,
    lift: Lift,
}

impl StripBilliard {
    pub fn sites(&self) -> &[Site] {
        &self.lift.sites
    }

    pub fn site_wall(&self, site: usize) -> Wall {
        self.walls[site]
    }

    /// Site on `wall` at `x`, up to 1e-6 of the period.
    pub fn site_at(&self, wall: Wall, x: f64) -> Result<usize, ModelError> {
        let tol = 1e-6 * self.f1.period();
        self.lift
            .sites
            .iter()
            .enumerate()
            .find(|(i, s)| self.walls[*i] == wall && (s.point[0] - x).abs() <= tol)
            .map(|(i, _)| i)
            .ok_or_else(|| ModelError::UnknownSite(format!("{wall:?} {x}")))
    }

    pub fn code_from_bounces(
        &self,
        bounces: &[(Wall, f64)],
        periodic: bool,
    ) -> Result<Code, ModelError> {
        let seq = bounces
            .iter()
            .map(|&(w, x)| self.site_at(w, x))
            .collect::<Result<Vec<_>, _>>()?;
        self.lift.code_from_sites(&seq, periodic)
    }

    pub fn code_from_sites(&self, seq: &[usize], periodic: bool) -> Result<Code, ModelError> {
        self.lift.code_from_sites(seq, periodic)
    }

    pub fn random_code<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Result<Code, ModelError> {
        self.lift.random_code(len, rng)
    }

    /// Wall of each slot of `code`.
    pub fn slot_walls(&self, code: &Code) -> Vec<Wall> {
        code.edges().iter().map(|e| self.walls[self.lift.carried[e.0]]).collect()
    }

    /// Euler–Lagrange residual of the unrefined code.
    pub fn residual_at_code(&self, code: &Code) -> f64 {
        dls::residual(&self.system, code, &self.system.code_points(code))
    }

    pub fn reflection_error(&self, orbit: &Orbit) -> f64 {
        let xs: Vec<f64> = orbit.points.iter().map(|p| p[0]).collect();
        let walls = self.slot_walls(&orbit.code);
        reflection_angles(&self.f1, &self.f2, self.spec.width, &walls, &xs, orbit.code.is_periodic())
    }
}

fn reflection_angles(
    f1: &PeriodicFn,
    f2: &PeriodicFn,
    d: f64,
    walls: &[Wall],
    xs: &[f64],
    periodic: bool,
) -> f64 {
    let n = xs.len();
    let point = |i: usize| match walls[i] {
        Wall::Lower => (xs[i], f1.value(xs[i])),
        Wall::Upper => (xs[i], d + f2.value(xs[i])),
    };
    let angle = |v: (f64, f64), t: (f64, f64)| (v.0 * t.1 - v.1 * t.0).abs().atan2(v.0 * t.0 + v.1 * t.1);
    let range = if periodic { 0..n } else { 1..n.saturating_sub(1).max(1) };
    range
        .map(|i| {
            let (p, q) = if periodic { ((i + n - 1) % n, (i + 1) % n) } else { (i - 1, i + 1) };
            let (a, b, c) = (point(p), point(i), point(q));
            let slope = match walls[i] {
                Wall::Lower => f1.derivative(xs[i]),
                Wall::Upper => f2.derivative(xs[i]),
            };
            let t = (1.0, slope);
            let din = (b.0 - a.0, b.1 - a.1);
            let dout = (c.0 - b.0, c.1 - b.1);
            (angle(din, t) - angle(dout, t)).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest difference between incidence and reflection angles against the
/// wall tangent, in radians, over the bounces with both neighbours.
pub fn reflection_check(
    spec: &StripBilliardSpec,
    walls: &[Wall],
    xs: &[f64],
    periodic: bool,
) -> Result<f64, ModelError> {
    let f1 = spec.lower.compile()?;
    let f2 = spec.upper.compile()?;
    if walls.len() != xs.len() {
        return Err(ModelError::Invalid("one wall per bounce".into()));
    }
    Ok(reflection_angles(&f1, &f2, spec.width, walls, xs, periodic))
}

/// Euler–Lagrange residual of the exact segment lengths for a bounce
/// sequence, without building a system (works for flat walls too).
pub fn direct_residual(
    spec: &StripBilliardSpec,
    walls: &[Wall],
    xs: &[f64],
    periodic: bool,
) -> Result<f64, ModelError> {
    let (f1, f2) = spec.walls()?;
    let up = SegmentLagrangian::upward(&f1, &f2, spec.width);
    let down = SegmentLagrangian::downward(&f1, &f2, spec.width);
    let seg = |from: Wall| if from == Wall::Lower { &up } else { &down };
    let n = xs.len();
    let v = |i: usize| DVector::from_element(1, xs[i]);
    let range = if periodic { 0..n } else { 1..n.saturating_sub(1).max(1) };
    Ok(range
        .map(|i| {
            let (p, q) = if periodic { ((i + n - 1) % n, (i + 1) % n) } else { (i - 1, i + 1) };
            (seg(walls[p]).grad_y(&v(p), &v(i)) + seg(walls[i]).grad_x(&v(i), &v(q)))[0].abs()
        })
        .fold(0.0, f64::max))
}

fn wall_classes(
    f: &PeriodicFn,
    psi: Arc<dyn ScalarField>,
    seeds: Option<&Vec<f64>>,
) -> Result<(Vec<Arc<EdgeData>>, f64), ModelError> {
    let p = f.period();
    let seeds = seeds.cloned().unwrap_or_else(|| f.critical_points());
    let mut points: Vec<f64> = Vec::new();
    for s in seeds {
        let domain = DomainBox::cube(DVector::from_element(1, s), 0.5 * p);
        if let Ok(e) = find_critical_point(psi.clone(), &domain, &DVector::from_element(1, s)) {
            let x = e.point[0].rem_euclid(p);
            let x = if (p - x).abs() < 1e-9 * p { 0.0 } else { x };
            if !points.iter().any(|&c| (c - x).abs() < 1e-9 * p) {
                points.push(x);
            }
        }
    }
    if points.is_empty() {
        return Err(ModelError::NotAntiIntegrable("wall has no nondegenerate critical point".into()));
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut gap = p;
    if points.len() > 1 {
        for k in 0..points.len() {
            let next = if k + 1 < points.len() { points[k + 1] } else { points[0] + p };
            gap = gap.min(next - points[k]);
        }
    }
    let half = 0.5 * gap;
    let data = points
        .iter()
        .map(|&x| {
            let c = DVector::from_element(1, x);
            find_critical_point(psi.clone(), &DomainBox::cube(c.clone(), half), &c).map(Arc::new)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((data, half))
}

pub fn make_strip_billiard(spec: &StripBilliardSpec) -> Result<StripBilliard, ModelError> {
    let (f1, f2) = spec.walls()?;
    let d = spec.width;
    let period = f1.period();
    let psi_lower: Arc<dyn ScalarField> = Arc::new(AffineField {
        inner: SeparableField::new(vec![f1.clone()], 1.0),
        scale: -2.0,
        offset: d,
    });
    let psi_upper: Arc<dyn ScalarField> = Arc::new(AffineField {
        inner: SeparableField::new(vec![f2.clone()], 1.0),
        scale: 2.0,
        offset: d,
    });
    let (lower, half_lower) = wall_classes(&f1, psi_lower, spec.seeds_lower.as_ref())?;
    let (upper, half_upper) = wall_classes(&f2, psi_upper, spec.seeds_upper.as_ref())?;

    let radius = spec.translation_radius.unwrap_or(2);
    let c = spec.cells.unwrap_or(4);
    if radius < 0 || c < 0 {
        return Err(ModelError::Invalid("translation radius and cells must be nonnegative".into()));
    }
    let mut sites = Vec::new();
    let mut data = Vec::new();
    let mut walls = Vec::new();
    for cell in cells(1, c) {
        let shift = DVector::from_element(1, period * cell[0] as f64);
        for (wall, list) in [(Wall::Lower, &lower), (Wall::Upper, &upper)] {
            for (k, base) in list.iter().enumerate() {
                let e = Arc::new(base.translated(&shift));
                let class = if wall == Wall::Lower { k } else { lower.len() + k };
                sites.push(Site { class, cell: cell.clone(), point: e.point.clone() });
                data.push(e);
                walls.push(wall);
            }
        }
    }
    let nl = lower.len();
    let lift = Lift::build(sites, radius, |a, b| (a.class < nl) != (b.class < nl));
    let up: Arc<dyn DiscreteLagrangian> = Arc::new(SegmentLagrangian::upward(&f1, &f2, d));
    let down: Arc<dyn DiscreteLagrangian> = Arc::new(SegmentLagrangian::downward(&f1, &f2, d));
    let half = |w: Wall| if w == Wall::Lower { half_lower } else { half_upper };
    let pieces = lift
        .pairs
        .iter()
        .map(|&(a, b)| {
            let l = if walls[a] == Wall::Lower { up.clone() } else { down.clone() };
            LagrangianPiece::new(
                l,
                DomainBox::cube(lift.sites[a].point.clone(), half(walls[a])),
                DomainBox::cube(lift.sites[b].point.clone(), half(walls[b])),
            )
        })
        .collect();
    let edge_data = lift.carried.iter().map(|&s| data[s].clone()).collect();
    let mut system = DlsSystem::new(lift.graph.clone(), pieces, edge_data)?;
    system.fundamental_pieces = Some(lift.base_pieces());
    system.fundamental_edges = Some(lift.base_edges());
    Ok(StripBilliard {
        system,
        spec: spec.clone(),
        lower_points: lower.iter().map(|e| e.point[0]).collect(),
        upper_points: upper.iter().map(|e| e.point[0]).collect(),
        f1,
        f2,
        walls,
        lift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn narrow_strip_rejected() {
        let spec = StripBilliardSpec::new(Profile::cosine(0.6, 1.0), Profile::cosine(0.6, 1.0), 2.0);
        assert!(matches!(make_strip_billiard(&spec), Err(ModelError::Invariant(_))));
    }

    #[test]
    fn flat_walls_vertical_bounces() {
        let flat = Profile::Zero { period: 1.0 };
        let spec = StripBilliardSpec::new(flat.clone(), flat, 50.0);
        let walls = [Wall::Lower, Wall::Upper, Wall::Lower, Wall::Upper];
        let xs = [0.3; 4];
        assert_eq!(direct_residual(&spec, &walls, &xs, true).unwrap(), 0.0);
        assert_eq!(reflection_check(&spec, &walls, &xs, true).unwrap(), 0.0);
    }
}
