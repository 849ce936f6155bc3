//! Wave profiles on a truncated domain: the discretized problem, the coupled
//! monotone iteration that solves it, diagnostics and CSV export.

mod diagnostics;
mod grid;
mod io;
mod iterate;
mod problem;
mod solve;

use thiserror::Error;

use crate::error::ErrorKind;
use crate::model::ModelError;
use crate::sandwich::SandwichError;

pub use diagnostics::{
    endpoint_diagnostics, harnack_bound, ode_residual, tail_diagnostics, EndpointDiagnostics, HarnackBound,
    TailDiagnostics,
};
pub use grid::{Grid, Profile};
pub use io::{read_profile_csv, write_profile_csv, PROFILE_HEADER};
pub use iterate::{monotone_iterate, MonotoneIteration, SolveReport, Sweep, DEFAULT_MAX_ITER, DEFAULT_TOL, ORDERING_SLACK};
pub use problem::{alpha_floor, apply_f, apply_h, build_problem, TruncatedProblem};
pub use solve::{
    shift_to_level, solve_minimal_wave, solve_wave, MinimalWave, SolveOptions, WaveProfile, DEFAULT_DELTAS,
};

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sandwich(#[from] SandwichError),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("truncation too small: l = {l} must exceed {min}")]
    TruncationTooSmall { l: f64, min: f64 },
    #[error("alpha margin must exceed 1 (got {0})")]
    BadAlphaMargin(f64),
    #[error("tolerance must be positive (got {0})")]
    BadTolerance(f64),
    #[error("bad delta sequence: {0}")]
    BadDeltaSequence(String),
    #[error("operator output leaves the sandwich at xi = {xi} (phi = {phi}, psi = {psi})")]
    SandwichViolation { xi: f64, phi: f64, psi: f64 },
    #[error("monotone iteration did not converge in {iterations} iterations (gap {gap})")]
    MaxIterExceeded { iterations: usize, gap: f64 },
    #[error("iterate ordering broken at iteration {iteration} by {violation}")]
    MonotonicityBroken { iteration: usize, violation: f64 },
    #[error("shifted profiles do not settle: successive distances {distances:?}")]
    SequenceNotCauchy { distances: Vec<f64> },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
}

impl ProfileError {
    pub fn kind(&self) -> ErrorKind {
        use ProfileError::*;
        match self {
            Model(e) => e.kind(),
            Sandwich(e) => e.kind(),
            BadGrid(_) | TruncationTooSmall { .. } | BadAlphaMargin(_) | BadTolerance(_) | BadDeltaSequence(_) => {
                ErrorKind::Validation
            }
            SandwichViolation { .. } | MaxIterExceeded { .. } | MonotonicityBroken { .. } | SequenceNotCauchy { .. } => {
                ErrorKind::Numerical
            }
            Io { .. } | Parse { .. } => ErrorKind::Io,
        }
    }
}
