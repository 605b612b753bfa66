//! General anti-integrable shadowing for discrete Lagrangian systems.
//!
//! A system is a transition graph whose vertices carry Lagrangian pieces
//! `L_κ = V_κ⁻(x) + V_κ⁺(y) + u_κ(x, y)` and whose edges carry nondegenerate
//! critical points `a_γ` of `Ψ_γ = V_κ⁺ + V_κ'⁻`. For small couplings `u`, every
//! admissible code is shadowed by a unique orbit, obtained as the fixed
//! point of
//!
//! ```text
//! x_i ← φ_γi( −∂x_i [ u_κ(i-1)(x_{i-1}, x_i) + u_κi(x_i, x_{i+1}) ] ),   φ_γ = (DΨ_γ)⁻¹
//! ```
//!
//! [`oracle::newton_oracle`] solves the same Euler–Lagrange system by plain
//! Newton iteration on the full Lagrangians and serves as an independent
//! check.

mod critical;
mod lagrangian;
pub mod oracle;
mod shadow;
mod system;
mod uniformity;

pub use critical::{find_critical_point, phi_eval, EdgeData};
pub(crate) use critical::op_norm;
pub use lagrangian::{
    derivative_mismatch, twist_matrix, AffineField, DiscreteLagrangian, DomainBox, FnField1,
    HessianBlocks, LagrangianPiece, ScalarField, SumField, TwistMatrix, ZeroField,
};
pub use oracle::newton_oracle;
pub use shadow::{
    action_window, el_gradient, phi_sweep, residual, shadow, shadow_from, Orbit, ShadowConfig,
};
pub use system::{equation_slots, neighbours, DlsSystem, EdgePotential};
pub use uniformity::{uniformity_report, UniformityReport};

use thiserror::Error;

use crate::symbolic::SymbolicError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DlsError {
    #[error("no critical point from seed")]
    NoCriticalPoint,
    #[error("degenerate critical point")]
    DegenerateCriticalPoint,
    #[error("phi outside uniformity ball")]
    PhiOutsideBall,
    #[error("contraction failure: ε too large")]
    ContractionFailure,
    #[error("left uniqueness ball at slot {slot} (distance {distance:.3e} > σ = {sigma:.3e})")]
    LeftUniquenessBall { slot: usize, distance: f64, sigma: f64 },
    #[error("no convergence after {0} sweeps")]
    MaxIterations(usize),
    #[error("code is not admissible (break after slot {0})")]
    NotAdmissible(usize),
    #[error("empty code")]
    EmptyCode,
    #[error("index out of range: [{i0}, {i1}) for length {len}")]
    IndexOutOfRange { i0: usize, i1: usize, len: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("system has no edges")]
    NoEdges,
    #[error("newton oracle failed: {0}")]
    OracleFailed(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}
