use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::lagrangian::{DomainBox, ScalarField};
use super::DlsError;

const NEWTON_STEPS: usize = 100;
const GRADIENT_TOL: f64 = 1e-12;
const CONDITION_LIMIT: f64 = 1e12;
const HESSIAN_VARIATION: f64 = 0.5;

/// Nondegenerate critical point `a_γ` of `Ψ_γ = V_κ⁺ + V_κ'⁻` with the
/// local data the shadowing operator needs.
///
/// Several edges may share one `EdgeData` (an `Arc` in the system) when
/// they have the same `Ψ_γ` and critical point.
#[derive(Clone)]
pub struct EdgeData {
    pub psi: Arc<dyn ScalarField>,
    pub point: DVector<f64>,
    pub hessian: DMatrix<f64>,
    /// Radius of the ball around `point` on which `D²Ψ` stays within 50% of
    /// its value at `point`.
    pub radius: f64,
    /// `2·‖(D²Ψ(a))⁻¹‖`, a Lipschitz bound for `φ_γ` on the `radius` ball.
    pub lip_phi: f64,
    pub domain: DomainBox,
}

impl std::fmt::Debug for EdgeData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EdgeData")
            .field("point", &self.point.as_slice())
            .field("hessian", &self.hessian.as_slice())
            .field("radius", &self.radius)
            .field("lip_phi", &self.lip_phi)
            .finish()
    }
}

impl EdgeData {
    pub fn dim(&self) -> usize {
        self.point.len()
    }

    /// Copy moved by a lattice vector. Only valid when `Ψ` is invariant
    /// under that translation.
    pub fn translated(&self, shift: &DVector<f64>) -> EdgeData {
        let mut out = self.clone();
        out.point += shift;
        out.domain.center += shift;
        out
    }
}

pub(crate) fn symmetric_spectrum(m: &DMatrix<f64>) -> DVector<f64> {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues
}

/// Spectral norm of a symmetric matrix.
pub(crate) fn sym_norm(m: &DMatrix<f64>) -> f64 {
    symmetric_spectrum(m).amax()
}

/// Operator 2-norm of a general matrix.
pub(crate) fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].abs();
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Newton's method on `∇Ψ = 0` from `seed`, staying inside `domain`.
pub fn find_critical_point(
    psi: Arc<dyn ScalarField>,
    domain: &DomainBox,
    seed: &DVector<f64>,
) -> Result<EdgeData, DlsError> {
    let mut x = seed.clone();
    for _ in 0..NEWTON_STEPS {
        let g = psi.gradient(&x);
        if g.amax() == 0.0 {
            break;
        }
        let Some(step) = psi.hessian(&x).lu().solve(&g) else {
            break;
        };
        x -= &step;
        if !domain.contains(&x) || !x.iter().all(|v| v.is_finite()) {
            return Err(DlsError::NoCriticalPoint);
        }
        if step.norm() <= 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    if psi.gradient(&x).norm() > GRADIENT_TOL {
        return Err(DlsError::NoCriticalPoint);
    }
    let hessian = psi.hessian(&x);
    let spectrum = symmetric_spectrum(&hessian);
    let smallest = spectrum.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let largest = spectrum.amax().max(1.0);
    if smallest == 0.0 || largest / smallest > CONDITION_LIMIT {
        return Err(DlsError::DegenerateCriticalPoint);
    }
    let radius = uniformity_radius(psi.as_ref(), domain, &x, &hessian);
    Ok(EdgeData {
        lip_phi: 2.0 / smallest,
        psi,
        point: x,
        hessian,
        radius,
        domain: domain.clone(),
    })
}

fn probe_directions(m: usize) -> Vec<DVector<f64>> {
    let mut dirs = Vec::new();
    for j in 0..m {
        for s in [1.0, -1.0] {
            let mut d = DVector::zeros(m);
            d[j] = s;
            dirs.push(d);
        }
    }
    if (2..=6).contains(&m) {
        for mask in 0..(1usize << m) {
            let d = DVector::from_fn(m, |j, _| if mask >> j & 1 == 1 { 1.0 } else { -1.0 });
            dirs.push(d.normalize());
        }
    }
    dirs
}

/// Largest radius, capped by the domain, on which `‖D²Ψ(x) − D²Ψ(a)‖`
/// stays below half of `‖D²Ψ(a)‖` along a fixed set of probe directions.
fn uniformity_radius(
    psi: &dyn ScalarField,
    domain: &DomainBox,
    a: &DVector<f64>,
    h0: &DMatrix<f64>,
) -> f64 {
    let cap = {
        let c = domain.inner_radius(a);
        if c.is_finite() { c } else { 100.0 }
    };
    let limit = HESSIAN_VARIATION * sym_norm(h0);
    let ok = |x: &DVector<f64>| sym_norm(&(psi.hessian(x) - h0)) <= limit;
    let mut radius = cap;
    const SCAN: usize = 256;
    for d in probe_directions(a.len()) {
        let mut lo = 0.0;
        let mut hi = None;
        for k in 1..=SCAN {
            let t = cap * k as f64 / SCAN as f64;
            if ok(&(a + &d * t)) {
                lo = t;
            } else {
                hi = Some(t);
                break;
            }
        }
        if let Some(mut hi) = hi {
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if ok(&(a + &d * mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            radius = radius.min(lo);
        }
    }
    radius
}

/// `φ_γ(b)`: the solution of `DΨ_γ(x) = b` near `a_γ`, by Newton's method
/// seeded at `a_γ`. Returns `a_γ` itself for `b = 0`.
pub fn phi_eval(edge: &EdgeData, b: &DVector<f64>, tol: f64) -> Result<DVector<f64>, DlsError> {
    if b.iter().all(|&v| v == 0.0) {
        return Ok(edge.point.clone());
    }
    let mut x = edge.point.clone();
    for _ in 0..60 {
        let resid = edge.psi.gradient(&x) - b;
        if resid.norm() <= tol {
            return Ok(x);
        }
        let step = edge
            .psi
            .hessian(&x)
            .lu()
            .solve(&resid)
            .ok_or(DlsError::PhiOutsideBall)?;
        x -= &step;
        if (&x - &edge.point).norm() > edge.radius || !x.iter().all(|v| v.is_finite()) {
            return Err(DlsError::PhiOutsideBall);
        }
        if step.norm() <= 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    if (edge.psi.gradient(&x) - b).norm() <= tol.max(1e-10) {
        Ok(x)
    } else {
        Err(DlsError::PhiOutsideBall)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dls::lagrangian::FnField1;
    use std::f64::consts::PI;

    fn line(center: f64, half: f64) -> DomainBox {
        DomainBox::cube(DVector::from_vec(vec![center]), half)
    }

    fn v1(x: f64) -> DVector<f64> {
        DVector::from_vec(vec![x])
    }

    #[test]
    fn cosine_well_at_pi() {
        let psi: Arc<dyn ScalarField> = Arc::new(FnField1::new(f64::cos, |x| -x.sin(), |x| -x.cos()));
        let e = find_critical_point(psi, &line(PI, 1.5), &v1(3.0)).unwrap();
        assert!((e.point[0] - PI).abs() < 1e-14);
        assert!((e.hessian[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((e.lip_phi - 2.0).abs() < 1e-12);
        // |cos t| >= 1/2 up to t = π/3.
        assert!((e.radius - PI / 3.0).abs() < 1e-9, "radius {}", e.radius);
    }

    #[test]
    fn quadratic_converges_in_one_step() {
        let psi: Arc<dyn ScalarField> = Arc::new(FnField1::new(|x| 0.5 * x * x, |x| x, |_| 1.0));
        let e = find_critical_point(psi, &line(0.0, 1.0), &v1(0.4)).unwrap();
        assert_eq!(e.point[0], 0.0);
        let x = phi_eval(&e, &v1(0.3), 1e-13).unwrap();
        assert!((x[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn quartic_is_degenerate() {
        let psi: Arc<dyn ScalarField> =
            Arc::new(FnField1::new(|x| x.powi(4), |x| 4.0 * x.powi(3), |x| 12.0 * x * x));
        let err = find_critical_point(psi, &line(0.0, 1.0), &v1(0.1)).unwrap_err();
        assert!(err.to_string().contains("degenerate critical point"));
    }

    #[test]
    fn no_critical_point_in_domain() {
        let psi: Arc<dyn ScalarField> = Arc::new(FnField1::new(|x| x, |_| 1.0, |_| 0.0));
        assert!(find_critical_point(psi, &line(0.0, 1.0), &v1(0.1)).is_err());
    }

    /// Bisection for `-sin x = b` on `[π - 1, π + 1]`, where `-sin` is increasing.
    fn bisect_branch(b: f64) -> f64 {
        let (mut lo, mut hi) = (PI - 1.0, PI + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if -mid.sin() < b {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn phi_on_cosine_branch() {
        let psi: Arc<dyn ScalarField> = Arc::new(FnField1::new(f64::cos, |x| -x.sin(), |x| -x.cos()));
        let e = find_critical_point(psi, &line(PI, 1.5), &v1(3.0)).unwrap();
        assert_eq!(phi_eval(&e, &v1(0.0), 1e-13).unwrap()[0], e.point[0]);
        let x = phi_eval(&e, &v1(0.1), 1e-13).unwrap()[0];
        let oracle = bisect_branch(0.1);
        assert!((x - oracle).abs() < 1e-12);
        assert!((x - 3.2417).abs() < 1e-4);
        assert!(phi_eval(&e, &v1(0.99), 1e-13).is_err());
    }
}
