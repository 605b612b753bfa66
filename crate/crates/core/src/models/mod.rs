//! Concrete systems: the light-particle kick map, the wide-strip billiard
//! and the separatrix map.

pub mod billiard;
pub mod kick;
mod lift;
pub mod profile;
pub mod sepmap;
pub mod spec;

pub use billiard::{make_strip_billiard, reflection_check, StripBilliard, StripBilliardSpec, Wall};
pub use kick::{make_kick_map, KickMap, KickMapSpec};
pub use lift::Site;
pub use profile::{PeriodicFn, Profile, SeparableField};
pub use sepmap::{make_sepmap, GlobalPoint, PieceLabel, SepMap, SepMapSpec};
pub use spec::{BuiltModel, ModelSpec};

use thiserror::Error;

use crate::dls::DlsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("model not anti-integrable: {0}")]
    NotAntiIntegrable(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("no lifted site near {0}")]
    UnknownSite(String),
    #[error("transition not in graph between slots {0} and {1}")]
    NoTransition(usize, usize),
    #[error(transparent)]
    Dls(#[from] DlsError),
}
