//! Flat `key=value` config files. Keys are the long flag names; a config
//! value is parsed exactly as the same flag on the command line would be.

use std::fs;
use std::path::Path;

use clap::{Args, Command as ClapCommand};

use crate::args::Opts;
use crate::CliError;

/// Long flag names accepted as config keys (everything except `config`).
pub fn known_keys() -> Vec<String> {
    Opts::augment_args(ClapCommand::new("config"))
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|k| k != "config")
        .collect()
}

pub fn load(path: &Path) -> Result<Opts, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|msg| CliError::validation(format!("{}: {msg}", path.display())))
}

pub fn parse(text: &str) -> Result<Opts, String> {
    let keys = known_keys();
    let mut argv = vec!["config".to_string()];
    let mut seen = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", k + 1))?;
        let key = key.trim().trim_start_matches('-');
        let value = value.trim();
        let canonical = keys
            .iter()
            .find(|known| *known == key || known.replace('-', "_") == key || known.replace('-', "") == key)
            .ok_or_else(|| format!("line {}: unknown key `{key}`", k + 1))?;
        if seen.contains(canonical) {
            return Err(format!("line {}: duplicate key `{key}`", k + 1));
        }
        seen.push(canonical.clone());
        argv.push(format!("--{canonical}={value}"));
    }
    let cmd = Opts::augment_args(ClapCommand::new("config"));
    let matches = cmd.try_get_matches_from(argv).map_err(|e| e.to_string().trim().to_string())?;
    <Opts as clap::FromArgMatches>::from_arg_matches(&matches).map_err(|e| e.to_string())
}

macro_rules! merge_fields {
    ($cli:ident, $file:ident; $($f:ident),* $(,)?) => {
        Opts { $($f: $cli.$f.or($file.$f)),* }
    };
}

/// Command-line values win; the config file fills whatever is left.
pub fn merge(cli: Opts, file: Opts) -> Opts {
    merge_fields!(cli, file;
        mu, beta, gamma, d, speed, minimal, l, m, tol, margin, n_half, dt, t_end, level,
        from_profile, check_shape, out, config, format, delta_sequence, max_iter, simulate,
        trajectory_every, recovered,
    )
}
