// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod output;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;
use latwave_core::{Error, ErrorKind};

use crate::args::Cli;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            msg: msg.into(),
        }
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NUMERICAL,
            msg: msg.into(),
        }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            msg: msg.into(),
        }
    }

    /// Failure inside a named pipeline stage.
    pub fn staged<E: Into<Error>>(stage: &'static str) -> impl Fn(E) -> CliError {
        move |e| {
            let e: Error = e.into();
            let mut err = CliError::from(e);
            err.msg = format!("stage {stage}: {}", err.msg);
            err
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

fn code_of(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Validation => EXIT_VALIDATION,
        ErrorKind::Numerical => EXIT_NUMERICAL,
        ErrorKind::Io => EXIT_IO,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: code_of(e.kind()),
            msg: e.to_string(),
        }
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::from(Error::from(e))
            }
        })*
    };
}

from_core!(
    latwave_core::model::ModelError,
    latwave_core::sandwich::SandwichError,
    latwave_core::profile::ProfileError,
    latwave_core::sim::SimError
);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
