//! Traveling waves of a lattice SIR model with an endemic leftover state.
//!
//! * [`model`]: parameters, equilibrium, minimal speed and characteristic roots.
//! * [`sandwich`]: explicit upper/lower solutions and their inequality check.
//! * [`profile`]: truncated wave problem, monotone iteration, diagnostics.
//! * [`sim`]: RK4 integration of the lattice system and front tracking.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod numeric;
pub mod profile;
pub mod report;
pub mod sandwich;
pub mod sim;

pub use error::{Error, ErrorKind};
pub use model::{
    certify_nonexistence, dispersion, endemic_state, lambda_roots, minimal_speed, omega_roots, validate_params,
    Dispersion, EndemicState, LambdaRoots, MinimalSpeed, ModelError, ModelParams, NonexistenceCertificate,
};
