//! Newton's method on the full Euler–Lagrange system, independent of the
//! anti-integrable splitting.

use nalgebra::{DMatrix, DVector};

use super::shadow::{el_gradient, residual};
use super::system::{equation_slots, neighbours, DlsSystem};
use super::DlsError;
use crate::symbolic::Code;

/// Solves `∂_y L_prev(x_{i-1}, x_i) + ∂_x L_next(x_i, x_{i+1}) = 0` for the
/// equation slots of `code`, starting from `init` (or `a(code)`).
pub fn newton_oracle(
    system: &DlsSystem,
    code: &Code,
    init: Option<&[DVector<f64>]>,
    tol: f64,
) -> Result<Vec<DVector<f64>>, DlsError> {
    system.check_code(code)?;
    let m = system.dim();
    let mut x: Vec<DVector<f64>> = match init {
        Some(p) => p.to_vec(),
        None => system.code_points(code),
    };
    let slots: Vec<usize> = equation_slots(code).collect();
    if slots.is_empty() {
        return Ok(x);
    }
    // Position of each unknown slot in the stacked vector.
    let mut pos = vec![None; code.len()];
    for (k, &i) in slots.iter().enumerate() {
        pos[i] = Some(k);
    }
    let dim = slots.len() * m;
    for _ in 0..100 {
        if residual(system, code, &x) <= tol {
            return Ok(x);
        }
        let mut f = DVector::zeros(dim);
        let mut jac = DMatrix::zeros(dim, dim);
        for (k, &i) in slots.iter().enumerate() {
            f.rows_mut(k * m, m).copy_from(&el_gradient(system, code, &x, i));
            let (p, q) = neighbours(code, i);
            let (prev, next) = system.slot_pieces(code, i);
            let hp = prev.lagrangian.hessian(&x[p], &x[i]);
            let hn = next.lagrangian.hessian(&x[i], &x[q]);
            let mut add = |col: usize, block: &DMatrix<f64>| {
                if let Some(c) = pos[col] {
                    let mut v = jac.view_mut((k * m, c * m), (m, m));
                    v += block;
                }
            };
            add(i, &(&hp.yy + &hn.xx));
            add(p, &hp.xy.transpose());
            add(q, &hn.xy);
        }
        let step = jac
            .lu()
            .solve(&f)
            .ok_or_else(|| DlsError::OracleFailed("singular Jacobian".into()))?;
        for (k, &i) in slots.iter().enumerate() {
            x[i] -= step.rows(k * m, m);
        }
        if !x.iter().all(|p| p.iter().all(|v| v.is_finite())) {
            return Err(DlsError::OracleFailed("diverged".into()));
        }
    }
    let r = residual(system, code, &x);
    if r <= tol {
        Ok(x)
    } else {
        Err(DlsError::OracleFailed(format!("residual {r:.3e} after 100 steps")))
    }
}
