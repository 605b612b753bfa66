use nalgebra::DVector;

use super::critical::phi_eval;
use super::system::{equation_slots, neighbours, DlsSystem};
use super::DlsError;
use crate::symbolic::Code;

/// Sweeps in a row with a non-decreasing update before giving up.
const STALL_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowConfig {
    /// Radius of the ball around `a(code)` the orbit must stay in.
    /// Defaults to half the smallest edge radius along the code.
    pub sigma: Option<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Tolerance of the inner Newton solve for `φ_γ`.
    pub inner_tolerance: f64,
    pub fd_step: f64,
    pub sample_seed: u64,
}

impl Default for ShadowConfig {
    fn default() -> Self {
        Self {
            sigma: None,
            tolerance: 1e-12,
            max_iterations: 10_000,
            inner_tolerance: 1e-13,
            fd_step: 1e-6,
            sample_seed: 0,
        }
    }
}

impl ShadowConfig {
    fn resolve_sigma(&self, system: &DlsSystem, code: &Code) -> Result<f64, DlsError> {
        if !(self.tolerance > 0.0) || self.max_iterations == 0 || !(self.inner_tolerance > 0.0) {
            return Err(DlsError::Config("tolerances and iteration cap must be positive".into()));
        }
        let r_min = code
            .edges()
            .iter()
            .map(|&e| system.edge(e).radius)
            .fold(f64::INFINITY, f64::min);
        match self.sigma {
            None => Ok(r_min / 2.0),
            Some(s) if s > 0.0 && s <= r_min => Ok(s),
            Some(s) => Err(DlsError::Config(format!(
                "sigma {s} outside (0, {r_min}]"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Orbit {
    pub code: Code,
    pub points: Vec<DVector<f64>>,
    /// Sup-norm of the Euler–Lagrange gradient over the equation slots.
    pub residual: f64,
    pub iterations: usize,
    /// Largest ratio of successive sweep updates.
    pub contraction_estimate: f64,
    /// `max_i ‖x_i − a_i‖`.
    pub rho: f64,
    /// `max_i lip_φ · ‖∂u‖` at the orbit, an a-priori bound for `rho`.
    pub rho_bound: f64,
}

/// Coupling force at slot `i`: `∂_y u_prev(x_{i-1}, x_i) + ∂_x u_next(x_i, x_{i+1})`.
fn coupling_force(system: &DlsSystem, code: &Code, x: &[DVector<f64>], i: usize) -> DVector<f64> {
    let (p, q) = neighbours(code, i);
    let (prev, next) = system.slot_pieces(code, i);
    prev.lagrangian.coupling_grad_y(&x[p], &x[i]) + next.lagrangian.coupling_grad_x(&x[i], &x[q])
}

/// Full Euler–Lagrange gradient at slot `i`.
pub fn el_gradient(system: &DlsSystem, code: &Code, x: &[DVector<f64>], i: usize) -> DVector<f64> {
    let (p, q) = neighbours(code, i);
    let (prev, next) = system.slot_pieces(code, i);
    prev.lagrangian.grad_y(&x[p], &x[i]) + next.lagrangian.grad_x(&x[i], &x[q])
}

/// Sup-norm of the Euler–Lagrange gradient over the equation slots.
pub fn residual(system: &DlsSystem, code: &Code, x: &[DVector<f64>]) -> f64 {
    equation_slots(code)
        .map(|i| el_gradient(system, code, x, i).norm())
        .fold(0.0, f64::max)
}

/// One Jacobi sweep of the shadowing operator. Pinned window ends are
/// copied through.
pub fn phi_sweep(
    system: &DlsSystem,
    code: &Code,
    x: &[DVector<f64>],
    inner_tol: f64,
) -> Result<Vec<DVector<f64>>, DlsError> {
    let mut y = x.to_vec();
    for i in equation_slots(code) {
        let f = coupling_force(system, code, x, i);
        y[i] = phi_eval(system.edge(code.edges()[i]), &(-f), inner_tol)?;
    }
    Ok(y)
}

/// Shadowing orbit of `code`, iterating from the AI-limit configuration.
pub fn shadow(system: &DlsSystem, code: &Code, config: &ShadowConfig) -> Result<Orbit, DlsError> {
    system.check_code(code)?;
    let start = system.code_points(code);
    shadow_from(system, code, start, config)
}

/// As [`shadow`], from an explicit starting configuration. Window end slots
/// are reset to their AI-limit points.
pub fn shadow_from(
    system: &DlsSystem,
    code: &Code,
    start: Vec<DVector<f64>>,
    config: &ShadowConfig,
) -> Result<Orbit, DlsError> {
    system.check_code(code)?;
    if start.len() != code.len() || start.iter().any(|p| p.len() != system.dim()) {
        return Err(DlsError::Shape("starting configuration does not match code".into()));
    }
    let sigma = config.resolve_sigma(system, code)?;
    let a = system.code_points(code);
    let mut x = start;
    if !code.is_periodic() {
        let n = x.len();
        x[0] = a[0].clone();
        x[n - 1] = a[n - 1].clone();
    }

    let mut prev_update = f64::NAN;
    let mut stalls = 0;
    let mut contraction: f64 = 0.0;
    let mut converged = None;
    for k in 1..=config.max_iterations {
        let y = phi_sweep(system, code, &x, config.inner_tolerance)?;
        let update = y.iter().zip(&x).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        for (i, (yi, ai)) in y.iter().zip(&a).enumerate() {
            let d = (yi - ai).norm();
            if d > sigma {
                return Err(DlsError::LeftUniquenessBall { slot: i, distance: d, sigma });
            }
        }
        if prev_update.is_finite() && prev_update > 0.0 {
            let ratio = update / prev_update;
            if prev_update > 1e-10 {
                contraction = contraction.max(ratio);
            }
            if ratio >= 1.0 && update > config.tolerance {
                stalls += 1;
                if stalls >= STALL_LIMIT {
                    return Err(DlsError::ContractionFailure);
                }
            } else {
                stalls = 0;
            }
        }
        x = y;
        prev_update = update;
        if update < config.tolerance {
            converged = Some(k);
            break;
        }
    }
    let iterations = converged.ok_or(DlsError::MaxIterations(config.max_iterations))?;

    let rho = x.iter().zip(&a).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
    let rho_bound = equation_slots(code)
        .map(|i| system.edge(code.edges()[i]).lip_phi * coupling_force(system, code, &x, i).norm())
        .fold(0.0, f64::max);
    Ok(Orbit {
        residual: residual(system, code, &x),
        code: code.clone(),
        points: x,
        iterations,
        contraction_estimate: contraction,
        rho,
        rho_bound,
    })
}

/// Action `Σ_{i0 ≤ i < i1} L_κ(i)(x_i, x_{i+1})` along the orbit. For
/// periodic codes the index wraps.
pub fn action_window(
    system: &DlsSystem,
    orbit: &Orbit,
    i0: usize,
    i1: usize,
) -> Result<f64, DlsError> {
    let n = orbit.points.len();
    let limit = if orbit.code.is_periodic() { n } else { n - 1 };
    if i0 > i1 || i1 > limit {
        return Err(DlsError::IndexOutOfRange { i0, i1, len: n });
    }
    let code = &orbit.code;
    Ok((i0..i1)
        .map(|i| {
            let j = (i + 1) % n;
            let piece = system.slot_pieces(code, j).0;
            piece.lagrangian.value(&orbit.points[i], &orbit.points[j])
        })
        .sum())
}
