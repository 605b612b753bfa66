use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Smooth scalar function on ℝᵐ with first and second derivatives.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

/// The zero function on ℝᵐ.
#[derive(Debug, Clone, Copy)]
pub struct ZeroField(pub usize);

impl ScalarField for ZeroField {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, _x: &DVector<f64>) -> f64 {
        0.0
    }
    fn gradient(&self, _x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(self.0)
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.0, self.0)
    }
}

/// `scale * f(x) + offset`.
#[derive(Clone)]
pub struct AffineField {
    pub inner: Arc<dyn ScalarField>,
    pub scale: f64,
    pub offset: f64,
}

impl ScalarField for AffineField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.scale * self.inner.value(x) + self.offset
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.inner.gradient(x) * self.scale
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.inner.hessian(x) * self.scale
    }
}

/// Sum of two fields on the same space.
#[derive(Clone)]
pub struct SumField(pub Arc<dyn ScalarField>, pub Arc<dyn ScalarField>);

impl ScalarField for SumField {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.0.value(x) + self.1.value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.gradient(x) + self.1.gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.0.hessian(x) + self.1.hessian(x)
    }
}

/// Closure-backed one-dimensional field, handy for small problems and tests.
pub struct FnField1 {
    pub f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub df: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d2f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl FnField1 {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { f: Box::new(f), df: Box::new(df), d2f: Box::new(d2f) }
    }
}

impl ScalarField for FnField1 {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (self.f)(x[0])
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, (self.df)(x[0]))
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, (self.d2f)(x[0]))
    }
}

/// Mixed and pure second derivatives of a two-point function.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianBlocks {
    /// ∂²/∂x∂x
    pub xx: DMatrix<f64>,
    /// Entry (j, k) is ∂²/∂x_j∂y_k.
    pub xy: DMatrix<f64>,
    /// ∂²/∂y∂y
    pub yy: DMatrix<f64>,
}

impl HessianBlocks {
    /// The full symmetric 2m×2m Hessian.
    pub fn full(&self) -> DMatrix<f64> {
        let m = self.xx.nrows();
        let mut h = DMatrix::zeros(2 * m, 2 * m);
        h.view_mut((0, 0), (m, m)).copy_from(&self.xx);
        h.view_mut((0, m), (m, m)).copy_from(&self.xy);
        h.view_mut((m, 0), (m, m)).copy_from(&self.xy.transpose());
        h.view_mut((m, m), (m, m)).copy_from(&self.yy);
        h
    }
}

/// A discrete Lagrangian `L(x, y)` together with its anti-integrable split
/// `L = V⁻(x) + V⁺(y) + u(x, y)`.
///
/// Implementors supply `L` and the two potentials. The coupling `u` defaults
/// to the difference; models with a closed form for `u` may override it, in
/// which case [`LagrangianPiece::check_split`] verifies the two agree.
pub trait DiscreteLagrangian: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64;
    fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;
    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>, y: &DVector<f64>) -> HessianBlocks;

    fn v_minus(&self) -> &dyn ScalarField;
    fn v_plus(&self) -> &dyn ScalarField;

    fn coupling_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.value(x, y) - self.v_minus().value(x) - self.v_plus().value(y)
    }
    fn coupling_grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.grad_x(x, y) - self.v_minus().gradient(x)
    }
    fn coupling_grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.grad_y(x, y) - self.v_plus().gradient(y)
    }
    fn coupling_hessian(&self, x: &DVector<f64>, y: &DVector<f64>) -> HessianBlocks {
        let mut h = self.hessian(x, y);
        h.xx -= self.v_minus().hessian(x);
        h.yy -= self.v_plus().hessian(y);
        h
    }
}

/// Axis-aligned box `center ± half_width` in ℝᵐ.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    pub center: DVector<f64>,
    pub half_width: DVector<f64>,
}

impl DomainBox {
    pub fn new(center: DVector<f64>, half_width: DVector<f64>) -> Self {
        assert_eq!(center.len(), half_width.len());
        Self { center, half_width }
    }

    pub fn cube(center: DVector<f64>, half_width: f64) -> Self {
        let m = center.len();
        Self::new(center, DVector::from_element(m, half_width))
    }

    pub fn unbounded(m: usize) -> Self {
        Self::cube(DVector::zeros(m), f64::INFINITY)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        (0..self.dim()).all(|j| (x[j] - self.center[j]).abs() <= self.half_width[j])
    }

    pub fn lower(&self, j: usize) -> f64 {
        self.center[j] - self.half_width[j]
    }

    pub fn upper(&self, j: usize) -> f64 {
        self.center[j] + self.half_width[j]
    }

    /// Intersection with another box; `None` if empty.
    pub fn intersect(&self, other: &DomainBox) -> Option<DomainBox> {
        let m = self.dim();
        let mut c = DVector::zeros(m);
        let mut h = DVector::zeros(m);
        for j in 0..m {
            let lo = self.lower(j).max(other.lower(j));
            let hi = self.upper(j).min(other.upper(j));
            if lo > hi {
                return None;
            }
            if lo.is_infinite() || hi.is_infinite() {
                c[j] = if lo.is_finite() {
                    lo
                } else if hi.is_finite() {
                    hi
                } else {
                    0.0
                };
                h[j] = f64::INFINITY;
            } else {
                c[j] = 0.5 * (lo + hi);
                h[j] = 0.5 * (hi - lo);
            }
        }
        Some(DomainBox::new(c, h))
    }

    /// Euclidean distance from an interior point to the boundary.
    pub fn inner_radius(&self, x: &DVector<f64>) -> f64 {
        (0..self.dim())
            .map(|j| (x[j] - self.lower(j)).min(self.upper(j) - x[j]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Uniform sample; infinite sides are sampled within ±1 of the center.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(self.dim(), |j, _| {
            let h = if self.half_width[j].is_finite() { self.half_width[j] } else { 1.0 };
            self.center[j] + h * rng.gen_range(-1.0..=1.0)
        })
    }

    /// Tensor grid with `k` points per axis (corners included).
    pub fn grid(&self, k: usize) -> Vec<DVector<f64>> {
        let m = self.dim();
        let total = k.pow(m as u32);
        (0..total)
            .map(|mut idx| {
                DVector::from_fn(m, |j, _| {
                    let t = (idx % k) as f64 / (k.max(2) - 1) as f64;
                    idx /= k;
                    let h = if self.half_width[j].is_finite() { self.half_width[j] } else { 1.0 };
                    self.center[j] + h * (2.0 * t - 1.0)
                })
            })
            .collect()
    }
}

/// One Lagrangian `L_κ` restricted to its domain boxes `U_κ⁻ × U_κ⁺`.
#[derive(Clone)]
pub struct LagrangianPiece {
    pub lagrangian: Arc<dyn DiscreteLagrangian>,
    pub domain_minus: DomainBox,
    pub domain_plus: DomainBox,
}

impl LagrangianPiece {
    pub fn new(
        lagrangian: Arc<dyn DiscreteLagrangian>,
        domain_minus: DomainBox,
        domain_plus: DomainBox,
    ) -> Self {
        Self { lagrangian, domain_minus, domain_plus }
    }

    pub fn dim(&self) -> usize {
        self.lagrangian.dim()
    }

    /// Largest deviation of `L - V⁻ - V⁺ - u` over `samples` random points of
    /// the domain.
    pub fn check_split<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> f64 {
        let l = &self.lagrangian;
        (0..samples)
            .map(|_| {
                let x = self.domain_minus.sample(rng);
                let y = self.domain_plus.sample(rng);
                let total = l.value(&x, &y);
                let split =
                    l.v_minus().value(&x) + l.v_plus().value(&y) + l.coupling_value(&x, &y);
                (total - split).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Twist matrix `B = ∂x∂y L` with a nondegeneracy flag.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistMatrix {
    pub matrix: DMatrix<f64>,
    pub nondegenerate: bool,
}

pub fn twist_matrix(piece: &LagrangianPiece, x: &DVector<f64>, y: &DVector<f64>) -> TwistMatrix {
    let b = piece.lagrangian.hessian(x, y).xy;
    let m = b.nrows() as i32;
    let norm = b.norm();
    let det = b.clone().determinant();
    TwistMatrix { nondegenerate: det.abs() > 1e-12 * norm.powi(m), matrix: b }
}

/// Worst relative mismatch between analytic derivatives and central
/// differences with step `h`, over `samples` random points of the domain.
/// Covers `∂L`, the Hessian blocks of `L` and the potentials.
pub fn derivative_mismatch<R: Rng + ?Sized>(
    piece: &LagrangianPiece,
    samples: usize,
    h: f64,
    rng: &mut R,
) -> f64 {
    let l = &piece.lagrangian;
    let m = l.dim();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = piece.domain_minus.sample(rng);
        let y = piece.domain_plus.sample(rng);
        let gx = l.grad_x(&x, &y);
        let gy = l.grad_y(&x, &y);
        let hb = l.hessian(&x, &y);
        for j in 0..m {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[j] += h;
            ym[j] -= h;
            worst = worst.max(rel(gx[j], (l.value(&xp, &y) - l.value(&xm, &y)) / (2.0 * h)));
            worst = worst.max(rel(gy[j], (l.value(&x, &yp) - l.value(&x, &ym)) / (2.0 * h)));
            let dgx_dx = (l.grad_x(&xp, &y) - l.grad_x(&xm, &y)) / (2.0 * h);
            let dgx_dy = (l.grad_x(&x, &yp) - l.grad_x(&x, &ym)) / (2.0 * h);
            let dgy_dy = (l.grad_y(&x, &yp) - l.grad_y(&x, &ym)) / (2.0 * h);
            for i in 0..m {
                worst = worst.max(rel(hb.xx[(i, j)], dgx_dx[i]));
                worst = worst.max(rel(hb.xy[(i, j)], dgx_dy[i]));
                worst = worst.max(rel(hb.yy[(i, j)], dgy_dy[i]));
            }
            for (v, p) in [(l.v_minus(), &x), (l.v_plus(), &y)] {
                let mut pp = p.clone();
                let mut pm = p.clone();
                pp[j] += h;
                pm[j] -= h;
                worst = worst.max(rel(v.gradient(p)[j], (v.value(&pp) - v.value(&pm)) / (2.0 * h)));
                let dg = (v.gradient(&pp) - v.gradient(&pm)) / (2.0 * h);
                for i in 0..m {
                    worst = worst.max(rel(v.hessian(p)[(i, j)], dg[i]));
                }
            }
        }
    }
    worst
}
