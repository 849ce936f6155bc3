use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "latwave", version, about = "Traveling waves of a lattice SIR endemic model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Endemic state, minimal speed and (with --speed) the decay exponents.
    Dispersion(Opts),
    /// Build the upper/lower solution pair and check its inequalities.
    Sandwich(Opts),
    /// Solve for a wave profile at --speed, or approach the minimal wave with --minimal.
    Solve(Opts),
    /// Integrate the lattice system and measure the front speed.
    Simulate(Opts),
    /// Characteristic-root certificate that no wave exists at the given speed(s).
    Certify(Opts),
    /// Dispersion (and optionally simulation) over a parameter grid.
    Sweep(Opts),
}

impl Command {
    pub fn opts(&self) -> &Opts {
        match self {
            Command::Dispersion(o)
            | Command::Sandwich(o)
            | Command::Solve(o)
            | Command::Simulate(o)
            | Command::Certify(o)
            | Command::Sweep(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

/// Comma-separated reals; an empty string is an empty list.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

pub fn parse_list(s: &str) -> Result<List, String> {
    if s.trim().is_empty() {
        return Ok(List(Vec::new()));
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(List)
}

/// Every flag is optional so that config-file values can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Natural birth/death rate (comma list in sweep).
    #[arg(long, value_parser = parse_list)]
    pub mu: Option<List>,
    /// Transmission rate (comma list in sweep).
    #[arg(long, value_parser = parse_list)]
    pub beta: Option<List>,
    /// Removal rate (comma list in sweep).
    #[arg(long, value_parser = parse_list)]
    pub gamma: Option<List>,
    /// Infective migration coefficient (comma list in sweep).
    #[arg(long, value_parser = parse_list)]
    pub d: Option<List>,
    /// Wave speed; a comma list for certify and sweep.
    #[arg(long, value_parser = parse_list)]
    pub speed: Option<List>,
    /// Solve the minimal-speed wave through a decreasing speed sequence.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub minimal: Option<bool>,
    /// Truncation half-width.
    #[arg(long)]
    pub l: Option<f64>,
    /// Grid subdivisions per unit length.
    #[arg(long)]
    pub m: Option<usize>,
    /// Convergence tolerance of the monotone iteration.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Safety factor applied to strict inequalities in the sandwich selection.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Lattice half-width (sites -N..=N).
    #[arg(long = "N")]
    pub n_half: Option<usize>,
    /// RK4 time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulation horizon.
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// Front detection level (default e*/2).
    #[arg(long)]
    pub level: Option<f64>,
    /// Initialize the lattice from a profile CSV written by `solve`.
    #[arg(long = "from-profile")]
    pub from_profile: Option<PathBuf>,
    /// Track how well the lattice solution keeps the profile's shape.
    #[arg(long = "check-shape", num_args = 0..=1, default_missing_value = "true")]
    pub check_shape: Option<bool>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Decreasing δ values for --minimal, speeds c*(1+δ).
    #[arg(long = "delta-sequence", value_parser = parse_list)]
    pub delta_sequence: Option<List>,
    /// Iteration cap for the monotone iteration.
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Add a lattice simulation per sweep point.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub simulate: Option<bool>,
    /// Time between trajectory snapshots written to trajectory.csv.
    #[arg(long = "trajectory-every")]
    pub trajectory_every: Option<f64>,
    /// Also integrate the recovered compartment and add an `r` column.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub recovered: Option<bool>,
}
