//! JSON model specifications accepted by the command line.

use std::f64::consts::{FRAC_PI_4, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    make_kick_map, make_sepmap, make_strip_billiard, KickMap, KickMapSpec, ModelError, SepMap,
    SepMapSpec, StripBilliard, StripBilliardSpec,
};
use crate::dls::DlsSystem;
use crate::standard_map::StandardMapParams;
use crate::symbolic::Code;

fn default_sigma() -> f64 {
    FRAC_PI_4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Standard {
        lambda: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
        /// Defaults to the smallest multiple of π the code needs, at least π.
        #[serde(default)]
        code_bound: Option<f64>,
    },
    Kick(KickMapSpec),
    Billiard(StripBilliardSpec),
    Sepmap(SepMapSpec),
}

pub enum BuiltModel {
    Standard(StandardMapParams),
    Kick(KickMap),
    Billiard(StripBilliard),
    SepMap(SepMap),
}

impl ModelSpec {
    pub fn from_json_str(s: &str) -> Result<Self, ModelError> {
        serde_json::from_str(s).map_err(|e| ModelError::Invalid(e.to_string()))
    }

    pub fn build(&self) -> Result<BuiltModel, ModelError> {
        Ok(match self {
            ModelSpec::Standard { lambda, sigma, code_bound } => BuiltModel::Standard(
                StandardMapParams::new(*lambda, *sigma, code_bound.unwrap_or(PI))
                    .map_err(|e| ModelError::Invalid(e.to_string()))?,
            ),
            ModelSpec::Kick(s) => BuiltModel::Kick(make_kick_map(s)?),
            ModelSpec::Billiard(s) => BuiltModel::Billiard(make_strip_billiard(s)?),
            ModelSpec::Sepmap(s) => BuiltModel::SepMap(make_sepmap(s)?),
        })
    }
}

impl BuiltModel {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltModel::Standard(_) => "standard",
            BuiltModel::Kick(_) => "kick",
            BuiltModel::Billiard(_) => "billiard",
            BuiltModel::SepMap(_) => "sepmap",
        }
    }

    /// The general system; the standard map is handled in closed form.
    pub fn system(&self) -> Option<&DlsSystem> {
        match self {
            BuiltModel::Standard(_) => None,
            BuiltModel::Kick(m) => Some(&m.system),
            BuiltModel::Billiard(m) => Some(&m.system),
            BuiltModel::SepMap(m) => Some(&m.system),
        }
    }

    pub fn random_code<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Result<Code, ModelError> {
        match self {
            BuiltModel::Standard(_) => {
                Err(ModelError::Invalid("standard map codes are integer sequences".into()))
            }
            BuiltModel::Kick(m) => m.random_code(len, rng),
            BuiltModel::Billiard(m) => m.random_code(len, rng),
            BuiltModel::SepMap(m) => m.random_code(len, rng),
        }
    }
}
