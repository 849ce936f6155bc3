//! Time integration of the lattice system on `n = -N..=N` with reflecting
//! ends, front tracking and a traveling-wave transport check.

use serde::Serialize;
use thiserror::Error;

use crate::error::ErrorKind;
use crate::model::{endemic_state, ModelParams};
use crate::numeric::{golden_section_min, linear_fit};
use crate::profile::Profile;

/// Integration slack for the positivity and boundedness monitor.
pub const POSITIVITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("bad width {width}: need 1 <= width < N = {n_half}")]
    BadWidth { width: usize, n_half: usize },
    #[error("bad lattice: {0}")]
    BadLattice(String),
    #[error("bad simulation config: {0}")]
    BadConfig(String),
    #[error("time step {dt} exceeds the stability bound {max}")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("positivity lost at t = {t}, site {n} (s = {s}, i = {i})")]
    PositivityLost { t: f64, n: i64, s: f64, i: f64 },
    #[error("need at least 10 recordings, got {0}")]
    TooFewRecordings(usize),
    #[error("front not found: no site reaches level {level} in the fit window")]
    FrontNotFound { level: f64 },
    #[error("front hit the lattice boundary at t = {t} (position {position}, N = {n_half})")]
    FrontHitBoundary { t: f64, position: i64, n_half: usize },
}

impl SimError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            SimError::PositivityLost { .. } | SimError::FrontNotFound { .. } | SimError::FrontHitBoundary { .. } => {
                ErrorKind::Numerical
            }
            _ => ErrorKind::Validation,
        }
    }
}

/// Densities at one instant; index `k` holds site `n = k - N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub t: f64,
    pub n_half: usize,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Option<Vec<f64>>,
}

impl LatticeState {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn site(&self, k: usize) -> i64 {
        k as i64 - self.n_half as i64
    }

    /// Spatially constant state.
    pub fn constant(n_half: usize, s: f64, i: f64, track_recovered: bool) -> Self {
        let len = 2 * n_half + 1;
        LatticeState {
            t: 0.0,
            n_half,
            s: vec![s; len],
            i: vec![i; len],
            r: track_recovered.then(|| vec![0.0; len]),
        }
    }
}

#[derive(Debug, Clone)]
pub enum InitialData<'a> {
    /// `i = i0` on the leftmost `width` sites (`n <= -N + width`), `s = 1`.
    LeftBlock { i0: f64, width: usize },
    /// `i = i0` for `|n| < width`, `s = 1`.
    Bump { i0: f64, width: usize },
    /// `(s, i)_n = (φ, ψ)(n)` from a solved profile.
    FromProfile(&'a Profile),
}

pub fn init_state(n_half: usize, kind: &InitialData, track_recovered: bool) -> Result<LatticeState, SimError> {
    if n_half < 10 {
        return Err(SimError::BadLattice(format!("N must be at least 10 (got {n_half})")));
    }
    let mut st = LatticeState::constant(n_half, 1.0, 0.0, track_recovered);
    match *kind {
        InitialData::LeftBlock { i0, width } | InitialData::Bump { i0, width } => {
            if width == 0 || width >= n_half {
                return Err(SimError::BadWidth { width, n_half });
            }
            if !(i0 > 0.0) || !i0.is_finite() {
                return Err(SimError::BadLattice(format!("initial amplitude must be positive (got {i0})")));
            }
            let left = matches!(kind, InitialData::LeftBlock { .. });
            for k in 0..st.len() {
                let n = st.site(k);
                let inside = if left {
                    n <= -(n_half as i64) + width as i64
                } else {
                    n.unsigned_abs() < width as u64
                };
                if inside {
                    st.i[k] = i0;
                }
            }
        }
        InitialData::FromProfile(prof) => {
            for k in 0..st.len() {
                let (a, b) = prof.sample(st.site(k) as f64);
                st.s[k] = a;
                st.i[k] = b;
            }
        }
    }
    Ok(st)
}

/// Right-hand side of the lattice system with reflecting ghosts.
pub fn rhs(p: &ModelParams, state: &LatticeState) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let len = state.len();
    let mut ds = vec![0.0; len];
    let mut di = vec![0.0; len];
    let mut dr = state.r.as_ref().map(|_| vec![0.0; len]);
    rhs_into(p, &state.s, &state.i, state.r.as_deref(), &mut ds, &mut di, dr.as_deref_mut());
    (ds, di, dr)
}

fn rhs_into(
    p: &ModelParams,
    s: &[f64],
    i: &[f64],
    r: Option<&[f64]>,
    ds: &mut [f64],
    di: &mut [f64],
    dr: Option<&mut [f64]>,
) {
    let (mu, beta, gamma, d) = (p.mu(), p.beta(), p.gamma(), p.d());
    let len = s.len();
    let last = len - 1;
    for k in 0..len {
        let (sl, sr) = (s[k.saturating_sub(1)], s[(k + 1).min(last)]);
        let (il, ir) = (i[k.saturating_sub(1)], i[(k + 1).min(last)]);
        let (sk, ik) = (s[k], i[k]);
        let inf = beta * sk * ik;
        ds[k] = (sr + sl - 2.0 * sk) + mu - mu * sk - inf;
        di[k] = d * (ir + il - 2.0 * ik) - (mu + gamma) * ik + inf;
    }
    if let (Some(r), Some(dr)) = (r, dr) {
        for k in 0..len {
            dr[k] = gamma * i[k] - mu * r[k];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between recorded snapshots.
    pub record_stride: usize,
    /// Front detection threshold.
    pub level: f64,
    /// Trailing fraction of recordings used for the speed fit.
    pub fit_window_fraction: f64,
}

impl SimConfig {
    /// Defaults for a parameter set: `dt = 0.01`, `T = 300`, one recording per
    /// unit time, level `e*/2`, fit over the last half.
    pub fn defaults(p: &ModelParams) -> Self {
        SimConfig {
            dt: 0.01,
            t_end: 300.0,
            record_stride: 100,
            level: 0.5 * endemic_state(p).e_star,
            fit_window_fraction: 0.5,
        }
    }

    pub fn max_dt(p: &ModelParams) -> f64 {
        0.2 / (2.0 + 2.0 * p.d() + p.beta())
    }

    pub fn validate(&self, p: &ModelParams) -> Result<(), SimError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SimError::BadConfig(format!("dt must be positive (got {})", self.dt)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(SimError::BadConfig(format!("T must be positive (got {})", self.t_end)));
        }
        if self.record_stride == 0 {
            return Err(SimError::BadConfig("record stride must be at least 1".into()));
        }
        if !(self.fit_window_fraction > 0.0 && self.fit_window_fraction <= 1.0) {
            return Err(SimError::BadConfig(format!(
                "fit window fraction must lie in (0, 1] (got {})",
                self.fit_window_fraction
            )));
        }
        let max = Self::max_dt(p);
        if self.dt > max {
            return Err(SimError::StepTooLarge { dt: self.dt, max });
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

fn check_positivity(st: &LatticeState) -> Result<(), SimError> {
    for k in 0..st.len() {
        let (s, i) = (st.s[k], st.i[k]);
        let bad = !((-POSITIVITY_SLACK..=1.0 + POSITIVITY_SLACK).contains(&s) && i >= -POSITIVITY_SLACK);
        if bad {
            return Err(SimError::PositivityLost {
                t: st.t,
                n: st.site(k),
                s,
                i,
            });
        }
    }
    Ok(())
}

/// Classical fixed-step RK4. Returns snapshots at `t = 0` and every
/// `record_stride` steps (the final state is always included).
pub fn integrate(p: &ModelParams, state: &LatticeState, config: &SimConfig) -> Result<Vec<LatticeState>, SimError> {
    config.validate(p)?;
    check_positivity(state)?;
    let len = state.len();
    let steps = config.steps();
    let dt = config.dt;
    let tracked = state.r.is_some();
    let t0 = state.t;

    let mut s = state.s.clone();
    let mut i = state.i.clone();
    let mut r = state.r.clone().unwrap_or_default();
    let z = || vec![0.0; len];
    let (mut ks, mut ki, mut kr) = ([z(), z(), z(), z()], [z(), z(), z(), z()], [z(), z(), z(), z()]);
    let (mut ts, mut ti, mut tr) = (z(), z(), z());

    let mut out = vec![state.clone()];
    for step in 1..=steps {
        for stage in 0..4 {
            let coef = match stage {
                0 => 0.0,
                3 => dt,
                _ => 0.5 * dt,
            };
            if stage == 0 {
                ts.copy_from_slice(&s);
                ti.copy_from_slice(&i);
                if tracked {
                    tr.copy_from_slice(&r);
                }
            } else {
                for k in 0..len {
                    ts[k] = s[k] + coef * ks[stage - 1][k];
                    ti[k] = i[k] + coef * ki[stage - 1][k];
                }
                if tracked {
                    for k in 0..len {
                        tr[k] = r[k] + coef * kr[stage - 1][k];
                    }
                }
            }
            rhs_into(
                p,
                &ts,
                &ti,
                tracked.then_some(&tr[..]),
                &mut ks[stage],
                &mut ki[stage],
                tracked.then_some(&mut kr[stage][..]),
            );
        }
        let w = dt / 6.0;
        for k in 0..len {
            s[k] += w * (ks[0][k] + 2.0 * ks[1][k] + 2.0 * ks[2][k] + ks[3][k]);
            i[k] += w * (ki[0][k] + 2.0 * ki[1][k] + 2.0 * ki[2][k] + ki[3][k]);
        }
        if tracked {
            for k in 0..len {
                r[k] += w * (kr[0][k] + 2.0 * kr[1][k] + 2.0 * kr[2][k] + kr[3][k]);
            }
        }
        let t = t0 + step as f64 * dt;
        for k in 0..len {
            let (sv, iv) = (s[k], i[k]);
            if !((-POSITIVITY_SLACK..=1.0 + POSITIVITY_SLACK).contains(&sv) && iv >= -POSITIVITY_SLACK) {
                return Err(SimError::PositivityLost {
                    t,
                    n: k as i64 - state.n_half as i64,
                    s: sv,
                    i: iv,
                });
            }
        }
        if step % config.record_stride == 0 || step == steps {
            out.push(LatticeState {
                t,
                n_half: state.n_half,
                s: s.clone(),
                i: i.clone(),
                r: tracked.then(|| r.clone()),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontTrace {
    pub times: Vec<f64>,
    /// Rightmost site with `i >= level`; `None` while no site qualifies.
    pub positions: Vec<Option<i64>>,
    pub level: f64,
    pub fitted_speed: f64,
    pub fit_stderr: f64,
    pub fit_start_time: f64,
    /// Whether positions never decrease inside the fit window (reported only).
    pub monotone_in_fit_window: bool,
}

/// Rightmost site at or above `level`.
pub fn front_position(st: &LatticeState, level: f64) -> Option<i64> {
    st.i.iter().rposition(|&v| v >= level).map(|k| st.site(k))
}

pub fn track_front(recordings: &[LatticeState], level: f64, fit_window_fraction: f64) -> Result<FrontTrace, SimError> {
    if recordings.len() < 10 {
        return Err(SimError::TooFewRecordings(recordings.len()));
    }
    let times: Vec<f64> = recordings.iter().map(|r| r.t).collect();
    let positions: Vec<Option<i64>> = recordings.iter().map(|r| front_position(r, level)).collect();
    trace_from_positions(times, positions, level, fit_window_fraction, recordings[0].n_half)
}

/// Fits the front speed to an already extracted position series.
pub fn trace_from_positions(
    times: Vec<f64>,
    positions: Vec<Option<i64>>,
    level: f64,
    fit_window_fraction: f64,
    n_half: usize,
) -> Result<FrontTrace, SimError> {
    let len = times.len();
    if len < 10 {
        return Err(SimError::TooFewRecordings(len));
    }
    let count = ((fit_window_fraction * len as f64).ceil() as usize).clamp(2, len);
    let start = len - count;
    let mut xs = Vec::with_capacity(count);
    let mut ys = Vec::with_capacity(count);
    let mut monotone = true;
    let mut prev: Option<i64> = None;
    for k in start..len {
        if let Some(x) = positions[k] {
            if x >= n_half as i64 - 2 {
                return Err(SimError::FrontHitBoundary {
                    t: times[k],
                    position: x,
                    n_half,
                });
            }
            if prev.is_some_and(|p| x < p) {
                monotone = false;
            }
            prev = Some(x);
            xs.push(times[k]);
            ys.push(x as f64);
        }
    }
    let fit = linear_fit(&xs, &ys).ok_or(SimError::FrontNotFound { level })?;
    Ok(FrontTrace {
        fit_start_time: times[start],
        times,
        positions,
        level,
        fitted_speed: fit.slope,
        fit_stderr: fit.slope_stderr,
        monotone_in_fit_window: monotone,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeCheck {
    pub c: f64,
    pub times: Vec<f64>,
    /// Best translation `σ(t)` of the profile against the lattice state.
    pub shifts: Vec<f64>,
    /// Sup distance at the best translation.
    pub distances: Vec<f64>,
    pub drift_rate: f64,
    pub drift_rel_error: f64,
    pub max_distance: f64,
    pub max_distance_over_e_star: f64,
    pub initial_distance: f64,
}

/// Sup over sites of `max(|s_n - φ(n+σ)|, |i_n - ψ(n+σ)|)`.
pub fn shape_distance(st: &LatticeState, prof: &Profile, sigma: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..st.len() {
        let (a, b) = prof.sample(st.site(k) as f64 + sigma);
        worst = worst.max((st.s[k] - a).abs()).max((st.i[k] - b).abs());
    }
    worst
}

fn best_shift(st: &LatticeState, prof: &Profile, center: f64, half_width: f64) -> (f64, f64) {
    let coarse = 0.05;
    let count = (2.0 * half_width / coarse).ceil() as usize;
    let mut best = (center, shape_distance(st, prof, center));
    for k in 0..=count {
        let x = center - half_width + k as f64 * coarse;
        let d = shape_distance(st, prof, x);
        if d < best.1 {
            best = (x, d);
        }
    }
    let (x, d) = golden_section_min(|x| shape_distance(st, prof, x), best.0 - coarse, best.0 + coarse, 1e-6);
    if d < best.1 {
        (x, d)
    } else {
        best
    }
}

/// Starts the lattice at the profile, integrates, and tracks how the best
/// matching translation of the profile moves.
pub fn wave_shape_check(
    p: &ModelParams,
    prof: &Profile,
    c: f64,
    n_half: usize,
    config: &SimConfig,
) -> Result<ShapeCheck, SimError> {
    let st = init_state(n_half, &InitialData::FromProfile(prof), false)?;
    let recs = integrate(p, &st, config)?;
    let mut times = vec![recs[0].t];
    let mut shifts = vec![0.0];
    let initial = shape_distance(&recs[0], prof, 0.0);
    let mut distances = vec![initial];
    for w in recs.windows(2) {
        let dt = w[1].t - w[0].t;
        let predicted = shifts.last().unwrap() + c * dt;
        let (x, d) = best_shift(&w[1], prof, predicted, (0.5 * c * dt).max(1.0));
        times.push(w[1].t);
        shifts.push(x);
        distances.push(d);
    }
    let drift = linear_fit(&times, &shifts).map(|f| f.slope).unwrap_or(f64::NAN);
    let e_star = endemic_state(p).e_star;
    let max_distance = distances.iter().cloned().fold(0.0, f64::max);
    Ok(ShapeCheck {
        c,
        drift_rate: drift,
        drift_rel_error: (drift - c).abs() / c,
        max_distance,
        max_distance_over_e_star: max_distance / e_star,
        initial_distance: initial,
        times,
        shifts,
        distances,
    })
}
