use std::collections::HashSet;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::critical::{op_norm, symmetric_spectrum, EdgeData};
use super::lagrangian::DomainBox;
use super::system::DlsSystem;
use super::DlsError;

const GRID: usize = 5;
const RANDOM_SAMPLES: usize = 100;

/// Measured constants of the shadowing theorem. All sups are sampled, not
/// rigorous.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct UniformityReport {
    /// Smallest edge radius.
    pub r_min: f64,
    pub sigma: f64,
    /// Sampled sup of `‖(D²Ψ)⁻¹‖` over the σ-balls around the critical points.
    pub lip_max: f64,
    /// Largest `2‖(D²Ψ(a))⁻¹‖`.
    pub lip_phi_max: f64,
    /// Sampled sup of the operator norm of the full Hessian of `u`.
    pub eps: f64,
    /// Sampled sup of `‖∂_x u‖` and `‖∂_y u‖`.
    pub grad_sup: f64,
    /// `2 · lip_max · eps`, the Lipschitz constant of the shadowing operator.
    pub contraction_bound: f64,
    pub satisfied: bool,
}

fn ball_samples(edge: &EdgeData, sigma: f64, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let cube = DomainBox::cube(edge.point.clone(), sigma);
    let mut pts = cube.grid(GRID);
    pts.extend((0..RANDOM_SAMPLES).map(|_| cube.sample(rng)));
    for p in pts.iter_mut() {
        let d = &*p - &edge.point;
        let n = d.norm();
        if n > sigma {
            *p = &edge.point + d * (sigma / n);
        }
    }
    pts
}

pub fn uniformity_report(
    system: &DlsSystem,
    sigma: Option<f64>,
    seed: u64,
) -> Result<UniformityReport, DlsError> {
    let edge_ids: Vec<usize> = match &system.fundamental_edges {
        Some(es) => es.iter().map(|e| e.0).collect(),
        None => (0..system.edge_data.len()).collect(),
    };
    if edge_ids.is_empty() {
        return Err(DlsError::NoEdges);
    }
    let mut seen = HashSet::new();
    let edges: Vec<&EdgeData> = edge_ids
        .iter()
        .map(|&e| &system.edge_data[e])
        .filter(|d| seen.insert(std::sync::Arc::as_ptr(d) as *const () as usize))
        .map(|d| d.as_ref())
        .collect();
    let r_min = edges.iter().map(|e| e.radius).fold(f64::INFINITY, f64::min);
    let sigma = match sigma {
        None => r_min / 2.0,
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(DlsError::Config(format!("sigma {s} must be positive"))),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut lip_max: f64 = 0.0;
    let mut lip_phi_max: f64 = 0.0;
    for e in &edges {
        lip_phi_max = lip_phi_max.max(e.lip_phi);
        for p in ball_samples(e, sigma, &mut rng) {
            let smallest = symmetric_spectrum(&e.psi.hessian(&p))
                .iter()
                .fold(f64::INFINITY, |m, v| m.min(v.abs()));
            lip_max = lip_max.max(1.0 / smallest);
        }
    }

    let piece_ids: Vec<usize> = match &system.fundamental_pieces {
        Some(ps) => ps.iter().map(|v| v.0).collect(),
        None => (0..system.pieces.len()).collect(),
    };
    let m = system.dim();
    let mut eps: f64 = 0.0;
    let mut grad_sup: f64 = 0.0;
    for &k in &piece_ids {
        let piece = &system.pieces[k];
        let joint = DomainBox::new(
            DVector::from_fn(2 * m, |j, _| {
                if j < m { piece.domain_minus.center[j] } else { piece.domain_plus.center[j - m] }
            }),
            DVector::from_fn(2 * m, |j, _| {
                if j < m {
                    piece.domain_minus.half_width[j]
                } else {
                    piece.domain_plus.half_width[j - m]
                }
            }),
        );
        let mut pts = joint.grid(GRID);
        pts.extend((0..RANDOM_SAMPLES).map(|_| joint.sample(&mut rng)));
        for p in pts {
            let x = p.rows(0, m).into_owned();
            let y = p.rows(m, m).into_owned();
            let l = &piece.lagrangian;
            eps = eps.max(op_norm(&l.coupling_hessian(&x, &y).full()));
            grad_sup = grad_sup
                .max(l.coupling_grad_x(&x, &y).norm())
                .max(l.coupling_grad_y(&x, &y).norm());
        }
    }

    let contraction_bound = 2.0 * lip_max * eps;
    Ok(UniformityReport {
        r_min,
        sigma,
        lip_max,
        lip_phi_max,
        eps,
        grad_sup,
        contraction_bound,
        satisfied: contraction_bound < sigma && contraction_bound < 0.5,
    })
}
