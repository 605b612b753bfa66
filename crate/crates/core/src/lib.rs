//! Anti-integrable limit shadowing for discrete Lagrangian systems.

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dls;
pub mod symbolic;
pub mod standard_map;
pub mod hyperbolicity;
pub mod entropy;
pub mod models;
pub mod io;
pub mod cli;
