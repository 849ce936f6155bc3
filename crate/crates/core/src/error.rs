use thiserror::Error;

use crate::model::ModelError;
use crate::profile::ProfileError;
use crate::sandwich::SandwichError;
use crate::sim::SimError;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: parameters, grids, preconditions.
    Validation,
    /// The numerics ran but failed (non-convergence, lost positivity, ...).
    Numerical,
    /// Reading or writing files.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sandwich(#[from] SandwichError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Model(e) => e.kind(),
            Error::Sandwich(e) => e.kind(),
            Error::Profile(e) => e.kind(),
            Error::Sim(e) => e.kind(),
        }
    }
}
