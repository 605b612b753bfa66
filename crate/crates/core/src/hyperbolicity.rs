//! Cone-criterion hyperbolicity along shadowing orbits.
//!
//! The variational equation of an orbit reads
//! `G_{i−} u_{i−1} + G_i u_i + G_{i+} u_{i+1} = 0`, or equivalently, after
//! splitting off `D²Ψ` at each slot, `u_i = P_i u_{i−1} + Q_i u_i + R_i u_{i+1}`.
//! Pairs `(u_{i−1}, u_i)` live in the max-norm product, and the cones are
//!
//! ```text
//! H_i = { ‖u_{i−1}‖ ≤ α_H ‖u_i‖ },   V_i = { ‖u_i‖ ≤ α_V ‖u_{i−1}‖ }.
//! ```

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dls::{self, equation_slots, neighbours, DlsSystem, Orbit};
use crate::standard_map::StandardOrbit;

const CONVERGED: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HyperbolicityError {
    #[error("orbit not converged (residual {0:.3e})")]
    NotConverged(f64),
    #[error("twist failure at index {0}")]
    TwistFailure(usize),
    #[error("singular second derivative of the potential at index {0}")]
    SingularPotential(usize),
    #[error("no stable direction certified")]
    NoStableDirection,
    #[error("invalid cone parameters: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub alpha_h: f64,
    pub alpha_v: f64,
    /// Expansion target.
    pub mu: f64,
    /// Unit vectors per index and cone for the sampled tier.
    pub samples: usize,
    pub seed: u64,
}

impl Default for ConeParams {
    fn default() -> Self {
        Self { alpha_h: 0.5, alpha_v: 0.5, mu: 2.0, samples: 1000, seed: 0 }
    }
}

impl ConeParams {
    fn validate(&self) -> Result<(), HyperbolicityError> {
        let ok = |a: f64| a > 0.0 && a <= 1.0;
        if !ok(self.alpha_h) || !ok(self.alpha_v) {
            return Err(HyperbolicityError::Config("cone apertures must lie in (0, 1]".into()));
        }
        if !(self.mu > 1.0) {
            return Err(HyperbolicityError::Config("expansion target must exceed 1".into()));
        }
        Ok(())
    }
}

/// Variational data at one equation slot.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRow {
    pub index: usize,
    pub prev: usize,
    pub next: usize,
    pub g_minus: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub g_plus: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalBlocks {
    pub rows: Vec<BlockRow>,
    pub periodic: bool,
    pub len: usize,
    /// `max_i max(‖P_i‖, ‖Q_i‖, ‖R_i‖)`.
    pub pqr_norm: f64,
}

impl VariationalBlocks {
    pub fn dim(&self) -> usize {
        self.rows.first().map(|r| r.g.nrows()).unwrap_or(0)
    }

    fn finish(rows: Vec<BlockRow>, periodic: bool, len: usize) -> Self {
        let pqr_norm = rows
            .iter()
            .map(|r| dls::op_norm(&r.p).max(dls::op_norm(&r.q)).max(dls::op_norm(&r.r)))
            .fold(0.0, f64::max);
        Self { rows, periodic, len, pqr_norm }
    }
}

pub fn variational_blocks(
    system: &DlsSystem,
    orbit: &Orbit,
) -> Result<VariationalBlocks, HyperbolicityError> {
    let code = &orbit.code;
    let x = &orbit.points;
    let res = dls::residual(system, code, x);
    if !(res <= CONVERGED) {
        return Err(HyperbolicityError::NotConverged(res));
    }
    let mut rows = Vec::new();
    for i in equation_slots(code) {
        let (p, q) = neighbours(code, i);
        let (prev, next) = system.slot_pieces(code, i);
        let hp = prev.lagrangian.hessian(&x[p], &x[i]);
        let hn = next.lagrangian.hessian(&x[i], &x[q]);
        let up = prev.lagrangian.coupling_hessian(&x[p], &x[i]);
        let un = next.lagrangian.coupling_hessian(&x[i], &x[q]);
        let h = system.edge(code.edges()[i]).psi.hessian(&x[i]);
        let lu = h.lu();
        let solve = |m: DMatrix<f64>| lu.solve(&(-m)).ok_or(HyperbolicityError::SingularPotential(i));
        rows.push(BlockRow {
            index: i,
            prev: p,
            next: q,
            g_minus: hp.xy.transpose(),
            g: &hp.yy + &hn.xx,
            g_plus: hn.xy.clone(),
            p: solve(up.xy.transpose())?,
            q: solve(&up.yy + &un.xx)?,
            r: solve(un.xy)?,
        });
    }
    Ok(VariationalBlocks::finish(rows, code.is_periodic(), code.len()))
}

/// Closed-form blocks of the standard map, `L = (x − y)²/(2λ) − cos y`.
pub fn standard_blocks(orbit: &StandardOrbit) -> Result<VariationalBlocks, HyperbolicityError> {
    if !(orbit.residual <= CONVERGED) {
        return Err(HyperbolicityError::NotConverged(orbit.residual));
    }
    let n = orbit.points.len();
    let periodic = orbit.code.periodic;
    let lambda = orbit.coupling;
    let range = if periodic { 0..n } else { 1..n.saturating_sub(1).max(1) };
    let s = |v: f64| DMatrix::from_element(1, 1, v);
    let mut rows = Vec::new();
    for k in range {
        let (p, q) = if periodic { ((k + n - 1) % n, (k + 1) % n) } else { (k - 1, k + 1) };
        let c = orbit.points[k].cos();
        if c == 0.0 {
            return Err(HyperbolicityError::SingularPotential(k));
        }
        rows.push(BlockRow {
            index: k,
            prev: p,
            next: q,
            g_minus: s(-1.0 / lambda),
            g: s(2.0 / lambda + c),
            g_plus: s(-1.0 / lambda),
            p: s(1.0 / (lambda * c)),
            q: s(-2.0 / (lambda * c)),
            r: s(1.0 / (lambda * c)),
        });
    }
    Ok(VariationalBlocks::finish(rows, periodic, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    /// Both cone implications decided exactly (scalar case).
    Exact,
    /// Sufficient norm bound on `P, Q, R`.
    Norm,
    /// Dense sampling of the cone boundaries; not a proof.
    Sampled,
    /// All mixed blocks vanish; the variational relation does not determine
    /// `u_{i+1}`.
    AiLimitDegenerate,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub pass: bool,
    pub tier: Tier,
    pub mu: Option<f64>,
    pub worst_index: Option<usize>,
    pub log_mu: Option<f64>,
}

impl ConeReport {
    fn new(pass: bool, tier: Tier, mu: Option<f64>, worst_index: Option<usize>) -> Self {
        Self { pass, tier, mu, worst_index, log_mu: mu.map(f64::ln) }
    }
}

fn is_singular(m: &DMatrix<f64>) -> bool {
    let scale = m.amax();
    if scale == 0.0 {
        return true;
    }
    let sv = m.clone().svd(false, false).singular_values;
    sv.min() <= 1e-12 * sv.max()
}

pub fn cone_verify(
    blocks: &VariationalBlocks,
    cones: &ConeParams,
) -> Result<ConeReport, HyperbolicityError> {
    cones.validate()?;
    if blocks.rows.is_empty() {
        return Err(HyperbolicityError::Shape("no equation slots".into()));
    }
    if blocks.rows.iter().all(|r| r.g_minus.amax() == 0.0 && r.g_plus.amax() == 0.0) {
        return Ok(ConeReport::new(true, Tier::AiLimitDegenerate, None, None));
    }
    for r in &blocks.rows {
        if is_singular(&r.g_plus) || is_singular(&r.g_minus) {
            return Err(HyperbolicityError::TwistFailure(r.index));
        }
    }
    if blocks.dim() == 1 {
        return Ok(scalar_tier(blocks, cones));
    }
    if let Some(report) = norm_tier(blocks, cones) {
        return Ok(report);
    }
    Ok(sampled_tier(blocks, cones))
}

fn scalar_tier(blocks: &VariationalBlocks, cones: &ConeParams) -> ConeReport {
    let (ah, av) = (cones.alpha_h, cones.alpha_v);
    let mut included = true;
    let mut mu = f64::INFINITY;
    let mut worst = None;
    for r in &blocks.rows {
        let (a, b, c) = (r.g_minus[(0, 0)].abs(), r.g[(0, 0)].abs(), r.g_plus[(0, 0)].abs());
        let mu_h = (b - ah * a) / c;
        let mu_v = (b - av * c) / a;
        included &= mu_h > 1.0 / ah && mu_v > 1.0 / av;
        let m = mu_h.min(mu_v);
        if m < mu {
            mu = m;
            worst = Some(r.index);
        }
    }
    ConeReport::new(included && mu >= cones.mu, Tier::Exact, Some(mu), worst)
}

fn norm_tier(blocks: &VariationalBlocks, cones: &ConeParams) -> Option<ConeReport> {
    let delta = blocks.pqr_norm;
    let worst = blocks
        .rows
        .iter()
        .map(|r| (r.index, dls::op_norm(&r.p).max(dls::op_norm(&r.q)).max(dls::op_norm(&r.r))))
        .fold((0, -1.0), |best, x| if x.1 > best.1 { x } else { best })
        .0;
    let mut mu = f64::INFINITY;
    for alpha in [cones.alpha_h, cones.alpha_v] {
        let denom = 1.0 - delta * (1.0 + alpha);
        if !(denom > 0.0) || !(delta / denom < alpha) {
            return None;
        }
        mu = mu.min(denom / delta);
    }
    (mu >= cones.mu).then(|| ConeReport::new(true, Tier::Norm, Some(mu), Some(worst)))
}

fn random_unit(m: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Propagates sampled pairs from each cone: boundary pairs (`‖u_side‖ = α`)
/// for even samples, interior pairs for odd ones.
fn sampled_tier(blocks: &VariationalBlocks, cones: &ConeParams) -> ConeReport {
    let m = blocks.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cones.seed);
    let mut included = true;
    let mut mu = f64::INFINITY;
    let mut worst = None;
    for r in &blocks.rows {
        let (Some(inv_plus), Some(inv_minus)) =
            (r.g_plus.clone().try_inverse(), r.g_minus.clone().try_inverse())
        else {
            return ConeReport::new(false, Tier::None, None, Some(r.index));
        };
        for s in 0..cones.samples {
            let scale = |rng: &mut ChaCha8Rng, alpha: f64| {
                if s % 2 == 0 { alpha } else { alpha * rng.gen_range(0.0..1.0) }
            };
            // H: forward.
            let u = random_unit(m, &mut rng);
            let um = random_unit(m, &mut rng) * scale(&mut rng, cones.alpha_h);
            let up = -(&inv_plus * (&r.g_minus * &um + &r.g * &u));
            let growth = up.norm();
            included &= 1.0 < cones.alpha_h * growth;
            if growth < mu {
                mu = growth;
                worst = Some(r.index);
            }
            // V: backward.
            let u = random_unit(m, &mut rng);
            let up = random_unit(m, &mut rng) * scale(&mut rng, cones.alpha_v);
            let um = -(&inv_minus * (&r.g * &u + &r.g_plus * &up));
            let growth = um.norm();
            included &= 1.0 < cones.alpha_v * growth;
            if growth < mu {
                mu = growth;
                worst = Some(r.index);
            }
        }
    }
    let pass = included && mu >= cones.mu;
    ConeReport::new(pass, if pass { Tier::Sampled } else { Tier::None }, Some(mu), worst)
}

/// Bounded forward solution of the variational equation with `u_0 = u0` at
/// row `start`, truncated with `u_{N+1} = 0`, by Jacobi iteration on the
/// `P, Q, R` form. Checks `‖u_j‖ ≤ μ^{−j}‖u0‖(1 + 1e−6)`.
pub fn stable_vector(
    blocks: &VariationalBlocks,
    start: usize,
    u0: &DVector<f64>,
    horizon: usize,
    mu: f64,
) -> Result<Vec<DVector<f64>>, HyperbolicityError> {
    let nrows = blocks.rows.len();
    if start >= nrows || u0.len() != blocks.dim() {
        return Err(HyperbolicityError::Shape("start row or vector size".into()));
    }
    if !blocks.periodic && start + horizon >= nrows {
        return Err(HyperbolicityError::Shape("horizon exceeds window".into()));
    }
    let row = |j: usize| &blocks.rows[(start + j) % nrows];
    let m = blocks.dim();
    let mut u = vec![DVector::zeros(m); horizon + 2];
    u[0] = u0.clone();
    let mut prev_change = f64::INFINITY;
    let mut stalls = 0;
    for _ in 0..100_000 {
        let mut next = u.clone();
        let mut change: f64 = 0.0;
        for j in 1..=horizon {
            let r = row(j);
            next[j] = &r.p * &u[j - 1] + &r.q * &u[j] + &r.r * &u[j + 1];
            change = change.max((&next[j] - &u[j]).amax());
        }
        u = next;
        if change <= 1e-15 * (1.0 + u0.amax()) {
            stalls = usize::MAX;
            break;
        }
        if change >= prev_change {
            stalls += 1;
            if stalls >= 10 {
                return Err(HyperbolicityError::NoStableDirection);
            }
        } else {
            stalls = 0;
        }
        prev_change = change;
    }
    if stalls != usize::MAX {
        return Err(HyperbolicityError::NoStableDirection);
    }
    u.truncate(horizon + 1);
    let n0 = u0.norm();
    for (j, v) in u.iter().enumerate() {
        if v.norm() > mu.powi(-(j as i32)) * n0 * (1.0 + 1e-6) {
            return Err(HyperbolicityError::NoStableDirection);
        }
    }
    Ok(u)
}

/// Largest relative disagreement between the `G` and `P, Q, R` predictions
/// of `u_{i+1}` from random `(u_{i−1}, u_i)`.
pub fn pqr_consistency(blocks: &VariationalBlocks, samples: usize, seed: u64) -> f64 {
    let m = blocks.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for r in &blocks.rows {
        let (Some(gp), Some(rinv)) = (r.g_plus.clone().try_inverse(), r.r.clone().try_inverse())
        else {
            continue;
        };
        for _ in 0..samples {
            let um = random_unit(m, &mut rng);
            let u = random_unit(m, &mut rng);
            let from_g = -(&gp * (&r.g_minus * &um + &r.g * &u));
            let from_pqr = &rinv * (&u - &r.p * &um - &r.q * &u);
            worst = worst.max((&from_g - &from_pqr).norm() / from_g.norm().max(1e-300));
        }
    }
    worst
}
