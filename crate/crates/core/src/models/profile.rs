use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::dls::ScalarField;

fn one() -> f64 {
    1.0
}

/// Named periodic profiles for potentials and billiard walls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `−A cos(2πx/P)`
    NegCos {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        period: f64,
    },
    /// `A cos(2πx/P)`
    Cosine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        period: f64,
    },
    /// `−A (cos θ + 0.4 cos 2θ)` with `θ = 2πx/P`; minima at θ = 0 and a
    /// secondary well at θ = π.
    TwoWell {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        period: f64,
    },
    /// Periodic cubic spline through equally spaced `values` on `[0, P)`.
    Spline { period: f64, values: Vec<f64> },
    Zero {
        #[serde(default = "one")]
        period: f64,
    },
}

impl Profile {
    pub fn neg_cos(amplitude: f64, period: f64) -> Self {
        Profile::NegCos { amplitude, period }
    }

    pub fn cosine(amplitude: f64, period: f64) -> Self {
        Profile::Cosine { amplitude, period }
    }

    pub fn period(&self) -> f64 {
        match self {
            Profile::NegCos { period, .. }
            | Profile::Cosine { period, .. }
            | Profile::TwoWell { period, .. }
            | Profile::Spline { period, .. }
            | Profile::Zero { period } => *period,
        }
    }

    pub fn compile(&self) -> Result<PeriodicFn, ModelError> {
        let period = self.period();
        if !(period > 0.0 && period.is_finite()) {
            return Err(ModelError::Invalid(format!("profile period must be positive: {period}")));
        }
        let kind = match self {
            Profile::NegCos { amplitude, .. } => Kind::Trig { c1: -amplitude, c2: 0.0 },
            Profile::Cosine { amplitude, .. } => Kind::Trig { c1: *amplitude, c2: 0.0 },
            Profile::TwoWell { amplitude, .. } => {
                Kind::Trig { c1: -amplitude, c2: -0.4 * amplitude }
            }
            Profile::Zero { .. } => Kind::Trig { c1: 0.0, c2: 0.0 },
            Profile::Spline { values, .. } => Kind::Spline(Spline::new(period, values)?),
        };
        Ok(PeriodicFn { period, kind })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `c1 cos θ + c2 cos 2θ`
    Trig { c1: f64, c2: f64 },
    Spline(Spline),
}

#[derive(Debug, Clone, PartialEq)]
struct Spline {
    h: f64,
    y: Vec<f64>,
    /// Second derivatives at the nodes.
    m: Vec<f64>,
}

impl Spline {
    fn new(period: f64, y: &[f64]) -> Result<Self, ModelError> {
        let n = y.len();
        if n < 3 {
            return Err(ModelError::Invalid("spline needs at least 3 values".into()));
        }
        let h = period / n as f64;
        // Cyclic tridiagonal system M_{i-1} + 4 M_i + M_{i+1} = 6 Δ²y_i / h².
        let mut a = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        for i in 0..n {
            let (p, q) = ((i + n - 1) % n, (i + 1) % n);
            a[(i, i)] += 4.0;
            a[(i, p)] += 1.0;
            a[(i, q)] += 1.0;
            rhs[i] = 6.0 * (y[q] - 2.0 * y[i] + y[p]) / (h * h);
        }
        let m = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| ModelError::Invalid("singular spline system".into()))?;
        Ok(Self { h, y: y.to_vec(), m: m.iter().copied().collect() })
    }

    fn eval(&self, x: f64, period: f64) -> (f64, f64, f64) {
        let n = self.y.len();
        let x = x.rem_euclid(period);
        let i = ((x / self.h).floor() as usize).min(n - 1);
        let j = (i + 1) % n;
        let h = self.h;
        let (a, b) = ((i + 1) as f64 * h - x, x - i as f64 * h);
        let (mi, mj, yi, yj) = (self.m[i], self.m[j], self.y[i], self.y[j]);
        let f = mi * a.powi(3) / (6.0 * h)
            + mj * b.powi(3) / (6.0 * h)
            + (yi - mi * h * h / 6.0) * a / h
            + (yj - mj * h * h / 6.0) * b / h;
        let df = -mi * a * a / (2.0 * h) + mj * b * b / (2.0 * h) + (yj - yi) / h
            - (mj - mi) * h / 6.0;
        let d2f = (mi * a + mj * b) / h;
        (f, df, d2f)
    }
}

/// A compiled 1-periodic-up-to-scale function with two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFn {
    period: f64,
    kind: Kind,
}

impl PeriodicFn {
    pub fn period(&self) -> f64 {
        self.period
    }

    /// `(f, f', f'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match &self.kind {
            Kind::Trig { c1, c2 } => {
                let w = TAU / self.period;
                let t = w * x;
                let (s1, k1) = t.sin_cos();
                let (s2, k2) = (2.0 * t).sin_cos();
                (
                    c1 * k1 + c2 * k2,
                    -w * (c1 * s1 + 2.0 * c2 * s2),
                    -w * w * (c1 * k1 + 4.0 * c2 * k2),
                )
            }
            Kind::Spline(s) => s.eval(x, self.period),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    /// Sampled sup of `|f|` over one period.
    pub fn sup_abs(&self) -> f64 {
        (0..1024)
            .map(|k| self.value(self.period * k as f64 / 1024.0).abs())
            .fold(0.0, f64::max)
    }

    /// Nondegenerate critical points in `[0, P)`: sign changes of `f'` on a
    /// 4096-point grid, refined by Newton and bisection.
    pub fn critical_points(&self) -> Vec<f64> {
        const GRID: usize = 4096;
        let p = self.period;
        let step = p / GRID as f64;
        let mut out: Vec<f64> = Vec::new();
        for k in 0..GRID {
            let (mut lo, mut hi) = (k as f64 * step, (k + 1) as f64 * step);
            let (dlo, dhi) = (self.derivative(lo), self.derivative(hi));
            let root = if dlo == 0.0 {
                lo
            } else if dlo * dhi < 0.0 {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.derivative(mid) * dlo > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            } else {
                continue;
            };
            let root = root.rem_euclid(p);
            let d2 = self.eval(root).2;
            let scale = (0..64)
                .map(|j| self.eval(p * j as f64 / 64.0).2.abs())
                .fold(0.0, f64::max);
            if d2.abs() > 1e-8 * scale.max(1e-300)
                && !out.iter().any(|&c| {
                    let d = (c - root).abs();
                    d.min(p - d) < 1e-9 * p
                })
            {
                out.push(root);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

/// `scale · Σ_j f_j(x_j)`.
#[derive(Debug, Clone)]
pub struct SeparableField {
    pub parts: Vec<PeriodicFn>,
    pub scale: f64,
}

impl SeparableField {
    pub fn new(parts: Vec<PeriodicFn>, scale: f64) -> Arc<Self> {
        Arc::new(Self { parts, scale })
    }
}

impl ScalarField for SeparableField {
    fn dim(&self) -> usize {
        self.parts.len()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.scale * self.parts.iter().enumerate().map(|(j, f)| f.value(x[j])).sum::<f64>()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.parts.len(), |j, _| self.scale * self.parts[j].eval(x[j]).1)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let m = self.parts.len();
        DMatrix::from_fn(m, m, |i, j| {
            if i == j { self.scale * self.parts[i].eval(x[i]).2 } else { 0.0 }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_well_critical_points() {
        let f = Profile::TwoWell { amplitude: 1.0, period: 1.0 }.compile().unwrap();
        let c = f.critical_points();
        let side = (-0.625f64).acos() / TAU;
        let expected = [0.0, side, 0.5, 1.0 - side];
        assert_eq!(c.len(), 4, "{c:?}");
        for (a, b) in c.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spline_interpolates_and_is_c2() {
        let n = 16;
        let values: Vec<f64> = (0..n).map(|k| (TAU * k as f64 / n as f64).cos()).collect();
        let f = Profile::Spline { period: 1.0, values: values.clone() }.compile().unwrap();
        for (k, v) in values.iter().enumerate() {
            assert!((f.value(k as f64 / n as f64) - v).abs() < 1e-12);
        }
        // Continuity of f'' across a node.
        let x = 3.0 / n as f64;
        assert!((f.eval(x - 1e-9).2 - f.eval(x + 1e-9).2).abs() < 1e-5);
        // Close to the interpolated cosine.
        assert!((f.value(0.03) - (TAU * 0.03).cos()).abs() < 1e-3);
        let c = f.critical_points();
        assert_eq!(c.len(), 2);
    }
}
