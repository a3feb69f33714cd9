//! Optimal linear contracts for a principal whose agents are linked by a
//! weighted directed network of peer effects.
//!
//! The crate covers instance handling ([`model`]), the agents' effort game
//! ([`equilibrium`]), the principal's optimal contract ([`contracts`]),
//! analytic comparative statics ([`statics`]), the heterogeneous-cost sweeps
//! and placement search ([`placement`]) and an independent verification layer
//! ([`oracle`]). The [`cli`] module backs the `netcontract` binary.

pub mod cli;
pub mod config;
pub mod contracts;
pub mod equilibrium;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod placement;
pub mod statics;

mod serde_util;

pub use config::{Tolerances, TOLERANCES};
pub use contracts::{solve, solve_with, ContractSolution, SolveOptions};
pub use error::{Condition, Error, Result, ValidationError};
pub use nalgebra::{DMatrix, DVector};
pub use model::{parse_model, serialize_model, EconParams, ModelInstance, Network};
