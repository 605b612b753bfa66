//! The Chirikov standard map `y₊ = y + λ sin x, x₊ = x + y₊` in Lagrangian
//! form `x₊ − 2x + x₋ = λ sin x`, with `L(x, y) = (x − y)²/(2λ) − cos y`.
//!
//! Codes are sequences `a_k = π·m_k`. The shadowing orbit is the fixed point
//! of `x_k ← a_k + (−1)^{m_k} asin((x_{k+1} − 2x_k + x_{k−1})/λ)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbolic::{standard_code_check, StandardCode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StandardMapError {
    #[error("sigma outside (0, π/2): {0}")]
    SigmaRange(f64),
    #[error("code bound must be positive: {0}")]
    BoundRange(f64),
    #[error("coupling must be nonzero")]
    ZeroCoupling,
    #[error("code violates |a_(k-1) - 2a_k + a_(k+1)| <= {0}")]
    CodeOutOfBound(f64),
    #[error("empty code")]
    EmptyCode,
    #[error("left arcsin domain at index {index} (|s| = {s:.6} >= sin σ = {limit:.6})")]
    LeftArcsinDomain { index: usize, s: f64, limit: f64 },
    #[error("contraction failure: {0}")]
    ContractionFailure(String),
    #[error("orbit not converged after {0} sweeps")]
    NotConverged(usize),
    #[error("codes differ inside the agreement window at offset {0}")]
    CodesDisagree(i64),
    #[error("codes have different shapes")]
    ShapeMismatch,
    #[error("below threshold, no bound: λ = {lambda} < 8/cos σ = {threshold}")]
    BelowThreshold { lambda: f64, threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardMapParams {
    pub coupling: f64,
    pub sigma: f64,
    /// Code bound `Λ` on `|a_{k−1} − 2a_k + a_{k+1}|`.
    pub code_bound: f64,
}

impl StandardMapParams {
    pub fn new(coupling: f64, sigma: f64, code_bound: f64) -> Result<Self, StandardMapError> {
        let p = Self { coupling, sigma, code_bound };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), StandardMapError> {
        if !(self.sigma > 0.0 && self.sigma < FRAC_PI_2) {
            return Err(StandardMapError::SigmaRange(self.sigma));
        }
        if !(self.code_bound > 0.0) {
            return Err(StandardMapError::BoundRange(self.code_bound));
        }
        if self.coupling == 0.0 || !self.coupling.is_finite() {
            return Err(StandardMapError::ZeroCoupling);
        }
        Ok(())
    }

    /// True iff `|λ| ≥ λ₀(Λ, σ)`, the regime where the contraction argument
    /// applies.
    pub fn above_threshold(&self) -> bool {
        lambda0(self.code_bound, self.sigma)
            .map(|l0| self.coupling.abs() >= l0)
            .unwrap_or(false)
    }
}

pub fn map_forward(x: f64, y: f64, coupling: f64) -> (f64, f64) {
    let y1 = y + coupling * x.sin();
    (x + y1, y1)
}

pub fn step_lagrangian(x_prev: f64, x: f64, coupling: f64) -> f64 {
    2.0 * x - x_prev + coupling * x.sin()
}

pub fn lambda0(code_bound: f64, sigma: f64) -> Result<f64, StandardMapError> {
    if !(sigma > 0.0 && sigma < FRAC_PI_2) {
        return Err(StandardMapError::SigmaRange(sigma));
    }
    if !(code_bound > 0.0) {
        return Err(StandardMapError::BoundRange(code_bound));
    }
    Ok(((code_bound + 4.0 * sigma) / sigma.sin()).max(8.0 / sigma.cos()))
}

/// Number of admissible second differences `{−π·(q−1)/2, …, π·(q−1)/2}`.
pub fn q_symbols(code_bound: f64) -> Result<u64, StandardMapError> {
    if !(code_bound > 0.0) {
        return Err(StandardMapError::BoundRange(code_bound));
    }
    Ok(1 + 2 * (code_bound / PI).floor() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardOrbit {
    pub code: StandardCode,
    pub points: Vec<f64>,
    pub coupling: f64,
    /// `max_k |x_{k+1} − 2x_k + x_{k−1} − λ sin x_k|` over interior indices.
    pub residual: f64,
    pub iterations: usize,
    pub contraction_estimate: f64,
    /// `max_k |x_k − a_k|`.
    pub rho: f64,
}

/// Sup of the Lagrangian-form residual over the equation indices (all of
/// them for periodic sequences, the interior otherwise).
pub fn residual(points: &[f64], coupling: f64, periodic: bool) -> f64 {
    let n = points.len();
    equation_indices(n, periodic)
        .map(|k| {
            let (p, q) = around(n, k, periodic);
            (points[q] - 2.0 * points[k] + points[p] - coupling * points[k].sin()).abs()
        })
        .fold(0.0, f64::max)
}

fn equation_indices(n: usize, periodic: bool) -> std::ops::Range<usize> {
    if periodic {
        0..n
    } else {
        1..n.saturating_sub(1).max(1)
    }
}

fn around(n: usize, k: usize, periodic: bool) -> (usize, usize) {
    if periodic {
        ((k + n - 1) % n, (k + 1) % n)
    } else {
        (k - 1, k + 1)
    }
}

const TOLERANCE: f64 = 1e-13;
const MAX_SWEEPS: usize = 10_000;

pub fn shadow_code(
    code: &StandardCode,
    params: &StandardMapParams,
) -> Result<StandardOrbit, StandardMapError> {
    let start = (0..code.len()).map(|k| code.value(k)).collect();
    shadow_code_from(code, params, start)
}

/// Shadowing from an arbitrary starting sequence; window end points are
/// pinned to the code.
pub fn shadow_code_from(
    code: &StandardCode,
    params: &StandardMapParams,
    start: Vec<f64>,
) -> Result<StandardOrbit, StandardMapError> {
    params.validate()?;
    if code.is_empty() {
        return Err(StandardMapError::EmptyCode);
    }
    if start.len() != code.len() {
        return Err(StandardMapError::ShapeMismatch);
    }
    if !standard_code_check(code, params.code_bound + 1e-12) {
        return Err(StandardMapError::CodeOutOfBound(params.code_bound));
    }
    let n = code.len();
    let periodic = code.periodic;
    let lambda = params.coupling;
    let limit = params.sigma.sin();
    let a: Vec<f64> = (0..n).map(|k| code.value(k)).collect();
    let mut x = start;
    if !periodic {
        x[0] = a[0];
        x[n - 1] = a[n - 1];
    }

    let mut prev_update = f64::NAN;
    let mut contraction: f64 = 0.0;
    let mut stalls = 0;
    let mut done = None;
    let mut y = x.clone();
    for sweep in 1..=MAX_SWEEPS {
        let mut update: f64 = 0.0;
        for k in equation_indices(n, periodic) {
            let (p, q) = around(n, k, periodic);
            let s = (x[q] - 2.0 * x[k] + x[p]) / lambda;
            if !(s.abs() < limit) {
                if !params.above_threshold() {
                    return Err(StandardMapError::ContractionFailure(format!(
                        "|λ| = {} below λ₀ = {:.6}, iterate left the arcsin domain at index {k}",
                        lambda.abs(),
                        lambda0(params.code_bound, params.sigma)?
                    )));
                }
                return Err(StandardMapError::LeftArcsinDomain { index: k, s: s.abs(), limit });
            }
            let t = s.asin();
            y[k] = if code.multiples[k].rem_euclid(2) == 0 { a[k] + t } else { a[k] - t };
            update = update.max((y[k] - x[k]).abs());
        }
        if prev_update.is_finite() && prev_update > 0.0 {
            let ratio = update / prev_update;
            if prev_update > 1e-10 {
                contraction = contraction.max(ratio);
            }
            if ratio >= 1.0 && update > TOLERANCE {
                stalls += 1;
                if stalls >= 10 {
                    return Err(StandardMapError::ContractionFailure(
                        "update ratio stayed >= 1".into(),
                    ));
                }
            } else {
                stalls = 0;
            }
        }
        std::mem::swap(&mut x, &mut y);
        prev_update = update;
        // Absolute tolerance, floored at a few ulps of the largest entry.
        let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if update <= TOLERANCE.max(4.0 * f64::EPSILON * scale) {
            done = Some(sweep);
            break;
        }
    }
    let iterations = done.ok_or(StandardMapError::NotConverged(MAX_SWEEPS))?;
    let rho = x.iter().zip(&a).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    Ok(StandardOrbit {
        residual: residual(&x, lambda, periodic),
        code: code.clone(),
        points: x,
        coupling: lambda,
        iterations,
        contraction_estimate: contraction,
        rho,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    /// `max_{|k| ≤ n} |x'_k − x_k| / (5^{|k|−n}·2σ)`.
    pub ratio: f64,
    /// Offset from the centre where the ratio is attained.
    pub worst_offset: i64,
    pub pass: bool,
}

/// Shadows two window codes that agree on `center − n ..= center + n` and
/// compares the orbits there against the locality bound.
pub fn decay_check(
    a: &StandardCode,
    b: &StandardCode,
    center: usize,
    n: usize,
    params: &StandardMapParams,
) -> Result<DecayReport, StandardMapError> {
    if a.len() != b.len() || a.periodic != b.periodic || center < n || center + n >= a.len() {
        return Err(StandardMapError::ShapeMismatch);
    }
    for k in center - n..=center + n {
        if a.multiples[k] != b.multiples[k] {
            return Err(StandardMapError::CodesDisagree(k as i64 - center as i64));
        }
    }
    let x = shadow_code(a, params)?;
    let y = shadow_code(b, params)?;
    let mut ratio: f64 = 0.0;
    let mut worst_offset = 0;
    for k in center - n..=center + n {
        let off = k as i64 - center as i64;
        let bound = 5f64.powi(off.abs() as i32 - n as i32) * 2.0 * params.sigma;
        let r = (x.points[k] - y.points[k]).abs() / bound;
        if r > ratio {
            ratio = r;
            worst_offset = off;
        }
    }
    Ok(DecayReport { ratio, worst_offset, pass: ratio <= 1.0 })
}

/// Consecutive pairs `(x_k, x_{k+1})` reduced mod 2π to `[0, 2π)`.
pub fn quotient_project(points: &[f64]) -> Vec<(f64, f64)> {
    points
        .windows(2)
        .map(|w| (w[0].rem_euclid(TAU), w[1].rem_euclid(TAU)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: f64) -> StandardMapParams {
        StandardMapParams::new(l, PI / 4.0, PI).unwrap()
    }

    #[test]
    fn forward_examples() {
        assert_eq!(map_forward(0.0, 0.0, 5.0), (0.0, 0.0));
        let (x, y) = map_forward(PI, 0.5, 3.0);
        assert!((y - 0.5).abs() < 1e-15 && (x - PI - 0.5).abs() < 1e-15);
        let (x, y) = map_forward(FRAC_PI_2, 1.0, 2.0);
        assert_eq!(y, 3.0);
        assert_eq!(x, FRAC_PI_2 + 3.0);
    }

    #[test]
    fn step_examples() {
        assert_eq!(step_lagrangian(0.0, 0.0, 7.0), 0.0);
        assert!((step_lagrangian(0.0, PI, 5.0) - TAU).abs() < 1e-14);
        assert_eq!(step_lagrangian(FRAC_PI_2, FRAC_PI_2, 4.0), FRAC_PI_2 + 4.0);
    }

    #[test]
    fn threshold_values() {
        assert!((lambda0(PI, PI / 4.0).unwrap() - 11.313708).abs() < 1e-6);
        assert!((lambda0(TAU, PI / 4.0).unwrap() - 13.328648).abs() < 1e-5);
        assert!((lambda0(1e-12, PI / 4.0).unwrap() - 8.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!(lambda0(PI, 1.6).is_err());
        assert_eq!(q_symbols(PI).unwrap(), 3);
        assert_eq!(q_symbols(3.0).unwrap(), 1);
        assert_eq!(q_symbols(7.0).unwrap(), 5);
    }

    #[test]
    fn zero_code_is_exact() {
        let o = shadow_code(&StandardCode::periodic(vec![0; 5]), &params(12.0)).unwrap();
        assert!(o.points.iter().all(|&v| v == 0.0));
        assert_eq!(o.iterations, 1);
    }

    #[test]
    fn period_two_closed_form() {
        let p = StandardMapParams::new(20.0, PI / 4.0, TAU).unwrap();
        let o = shadow_code(&StandardCode::periodic(vec![0, 1]), &p).unwrap();
        let u = (TAU / 20.0).asin();
        assert!((o.points[0] - u).abs() < 1e-10, "{:?}", o.points);
        assert!((o.points[1] - PI - u).abs() < 1e-10);
        assert!(o.residual < 1e-10);
    }

    #[test]
    fn low_coupling_leaves_domain() {
        let p = StandardMapParams::new(6.0, PI / 4.0, TAU).unwrap();
        let err = shadow_code(&StandardCode::periodic(vec![0, 1]), &p).unwrap_err();
        assert!(matches!(err, StandardMapError::ContractionFailure(_)));
        assert!(err.to_string().contains("left the arcsin domain"), "{err}");
    }

    #[test]
    fn projection() {
        assert_eq!(quotient_project(&[0.0, TAU, 2.0 * TAU]), vec![(0.0, 0.0), (0.0, 0.0)]);
        let p = quotient_project(&[7.0, 8.0]);
        assert!((p[0].0 - (7.0 - TAU)).abs() < 1e-15 && (p[0].1 - (8.0 - TAU)).abs() < 1e-15);
    }
}
