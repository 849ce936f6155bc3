use rayon::prelude::*;
use serde::Serialize;

use super::diagnostics::{endpoint_diagnostics, tail_diagnostics, EndpointDiagnostics, TailDiagnostics};
use super::grid::Profile;
use super::iterate::{monotone_iterate, SolveReport, DEFAULT_MAX_ITER, DEFAULT_TOL};
use super::problem::build_problem;
use super::ProfileError;
use crate::model::{endemic_state, minimal_speed, ModelParams, DEFAULT_CSTAR_TOL};
use crate::sandwich::{select_parameters, SandwichParams, DEFAULT_MARGIN};

pub const DEFAULT_DELTAS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub l: f64,
    pub m: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub margin: f64,
    pub alpha_margin: f64,
    /// Length of the trailing window used by the endpoint diagnostics.
    pub endpoint_window: f64,
    /// Half-width of the window on which shifted profiles are compared.
    pub compare_half_width: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            l: 40.0,
            m: 20,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            margin: DEFAULT_MARGIN,
            alpha_margin: 1.01,
            endpoint_window: 10.0,
            compare_half_width: 20.0,
        }
    }
}

/// A converged solve with everything measured about it.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    pub params: ModelParams,
    pub c: f64,
    pub sandwich: SandwichParams,
    pub alpha: f64,
    pub profile: Profile,
    pub report: SolveReport,
    pub tail: TailDiagnostics,
    pub endpoint: EndpointDiagnostics,
}

pub fn solve_wave(p: &ModelParams, c: f64, opts: &SolveOptions) -> Result<WaveProfile, ProfileError> {
    let sp = select_parameters(p, c, opts.margin)?;
    let problem = build_problem(p, c, &sp, opts.l, opts.m, opts.alpha_margin)?;
    let (profile, report) = monotone_iterate(&problem, opts.tol, opts.max_iter)?;
    let tail = tail_diagnostics(p, c, &sp, &profile);
    let window = opts.endpoint_window.min(0.5 * opts.l);
    let endpoint = endpoint_diagnostics(p, &profile, window, opts.tol);
    Ok(WaveProfile {
        params: *p,
        c,
        sandwich: sp,
        alpha: problem.alpha,
        profile,
        report,
        tail,
        endpoint,
    })
}

/// Position where `ψ` first climbs to `level`, by linear interpolation
/// between nodes; `None` if it never gets there.
pub fn shift_to_level(prof: &Profile, level: f64) -> Option<f64> {
    let j = prof.psi.iter().position(|&v| v >= level)?;
    let g = prof.grid;
    if j == 0 {
        return Some(g.node(0));
    }
    let (a, b) = (prof.psi[j - 1], prof.psi[j]);
    let (xa, xb) = (g.node(j as isize - 1), g.node(j as isize));
    Some(xa + (level - a) / (b - a) * (xb - xa))
}

/// The decreasing-speed sequence approaching the minimal wave.
#[derive(Debug, Clone)]
pub struct MinimalWave {
    pub c_star: f64,
    pub deltas: Vec<f64>,
    pub speeds: Vec<f64>,
    /// Common normalization level: `ψ(0) = epsilon_hat` after shifting.
    pub epsilon_hat: f64,
    /// Shift applied to each profile.
    pub shifts: Vec<f64>,
    /// Sup distances between successive shifted profiles on the comparison window.
    pub distances: Vec<f64>,
    pub compare_half_width: f64,
    pub reports: Vec<SolveReport>,
    /// Unshifted solve at the smallest δ.
    pub last: WaveProfile,
}

impl MinimalWave {
    /// Final profile translated so that `ψ(0) = epsilon_hat`, sampled on the
    /// comparison window.
    pub fn last_shifted(&self) -> Vec<(f64, f64, f64)> {
        shifted_samples(&self.last.profile, *self.shifts.last().unwrap(), self.compare_half_width)
    }
}

fn shifted_samples(prof: &Profile, shift: f64, half_width: f64) -> Vec<(f64, f64, f64)> {
    let m = prof.grid.m;
    let count = (2.0 * half_width * m as f64).round() as usize;
    (0..=count)
        .map(|k| {
            let x = -half_width + k as f64 / m as f64;
            let (a, b) = prof.sample(x + shift);
            (x, a, b)
        })
        .collect()
}

/// Solves at `c_k = c*(1 + δ_k)` for a decreasing sequence `δ_k`, normalizes
/// each profile by translation and records how far successive profiles are
/// apart. The individual solves run concurrently.
pub fn solve_minimal_wave(p: &ModelParams, opts: &SolveOptions, deltas: &[f64]) -> Result<MinimalWave, ProfileError> {
    if deltas.is_empty() {
        return Err(ProfileError::BadDeltaSequence("empty".into()));
    }
    if deltas.iter().any(|&d| !(d > 0.0) || !d.is_finite()) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ProfileError::BadDeltaSequence(format!(
            "must be positive and strictly decreasing, got {deltas:?}"
        )));
    }
    let c_star = minimal_speed(p, DEFAULT_CSTAR_TOL)?.c_star;
    let speeds: Vec<f64> = deltas.iter().map(|d| c_star * (1.0 + d)).collect();
    let waves: Vec<WaveProfile> = speeds
        .par_iter()
        .map(|&c| solve_wave(p, c, opts))
        .collect::<Result<_, _>>()?;

    let e_star = endemic_state(p).e_star;
    let epsilon_hat = waves
        .iter()
        .map(|w| 0.5 * w.profile.psi.iter().cloned().fold(0.0, f64::max))
        .fold(0.5 * e_star, f64::min);
    let shifts: Vec<f64> = waves
        .iter()
        .map(|w| shift_to_level(&w.profile, epsilon_hat).expect("epsilon_hat is below every profile's sup"))
        .collect();
    let samples: Vec<Vec<(f64, f64, f64)>> = waves
        .iter()
        .zip(&shifts)
        .map(|(w, &s)| shifted_samples(&w.profile, s, opts.compare_half_width))
        .collect();
    let distances: Vec<f64> = samples
        .windows(2)
        .map(|pair| {
            pair[0]
                .iter()
                .zip(&pair[1])
                .map(|(a, b)| (a.1 - b.1).abs().max((a.2 - b.2).abs()))
                .fold(0.0, f64::max)
        })
        .collect();
    if distances.windows(2).any(|w| w[1] > w[0] + 10.0 * opts.tol) {
        return Err(ProfileError::SequenceNotCauchy { distances });
    }
    let reports = waves.iter().map(|w| w.report.clone()).collect();
    let last = waves.into_iter().last().unwrap();
    Ok(MinimalWave {
        c_star,
        deltas: deltas.to_vec(),
        speeds,
        epsilon_hat,
        shifts,
        distances,
        compare_half_width: opts.compare_half_width,
        reports,
        last,
    })
}
