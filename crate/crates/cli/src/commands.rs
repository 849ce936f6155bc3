use std::path::Path;

use latwave_core::model::{
    certify_nonexistence, dispersion, endemic_state, lambda_roots, minimal_speed, ModelParams, NonexistenceCertificate,
    DEFAULT_CSTAR_TOL, DEFAULT_ROOT_TOL,
};
use latwave_core::profile::{
    build_problem, endpoint_diagnostics, monotone_iterate, read_profile_csv, solve_minimal_wave, tail_diagnostics,
    write_profile_csv, EndpointDiagnostics, SolveOptions, SolveReport, TailDiagnostics, DEFAULT_DELTAS,
};
use latwave_core::sandwich::{select_parameters, verify_inequalities, GridSpec, InequalityReport, SandwichParams, Sign};
use latwave_core::sim::{
    init_state, integrate, track_front, wave_shape_check, FrontTrace, InitialData, LatticeState, ShapeCheck, SimConfig,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Command, Format, List, Opts};
use crate::config;
use crate::output::{key_values, num, opt, text, Csv, Out};
use crate::CliError;

const DEFAULT_N: usize = 1500;
const DEFAULT_TRAJECTORY_EVERY: f64 = 10.0;
const SANDWICH_STEP: f64 = 0.01;
/// Initial infective block for spreading runs: `i = e*` on this many sites.
const BLOCK_WIDTH: usize = 10;
const FIT_WINDOW_FRACTION: f64 = 0.5;

pub fn run(cmd: Command) -> Result<(), CliError> {
    let cli = cmd.opts().clone();
    let o = match &cli.config {
        Some(path) => {
            let file = config::load(path)?;
            config::merge(cli, file)
        }
        None => cli,
    };
    let mut out = Out::new(
        o.out.as_deref().unwrap_or(Path::new("out")),
        o.format.unwrap_or(Format::Both),
    );
    match cmd {
        Command::Dispersion(_) => cmd_dispersion(&o, &mut out)?,
        Command::Sandwich(_) => cmd_sandwich(&o, &mut out)?,
        Command::Solve(_) => cmd_solve(&o, &mut out)?,
        Command::Simulate(_) => cmd_simulate(&o, &mut out)?,
        Command::Certify(_) => cmd_certify(&o, &mut out)?,
        Command::Sweep(_) => cmd_sweep(&o, &mut out)?,
    }
    out.print_written();
    Ok(())
}

fn single(v: &Option<List>, flag: &str) -> Result<Option<f64>, CliError> {
    match v {
        None => Ok(None),
        Some(List(xs)) if xs.len() == 1 => Ok(Some(xs[0])),
        Some(List(xs)) => Err(CliError::validation(format!(
            "--{flag} takes a single value here (got {})",
            xs.len()
        ))),
    }
}

fn params(o: &Opts) -> Result<ModelParams, CliError> {
    let std = ModelParams::standard();
    let mu = single(&o.mu, "mu")?.unwrap_or(std.mu());
    let beta = single(&o.beta, "beta")?.unwrap_or(std.beta());
    let gamma = single(&o.gamma, "gamma")?.unwrap_or(std.gamma());
    let d = single(&o.d, "d")?.unwrap_or(std.d());
    Ok(ModelParams::new(mu, beta, gamma, d)?)
}

fn require_speed(o: &Opts, cmd: &str) -> Result<f64, CliError> {
    single(&o.speed, "speed")?.ok_or_else(|| CliError::validation(format!("{cmd} needs --speed")))
}

fn solve_options(o: &Opts) -> SolveOptions {
    let d = SolveOptions::default();
    SolveOptions {
        l: o.l.unwrap_or(d.l),
        m: o.m.unwrap_or(d.m),
        tol: o.tol.unwrap_or(d.tol),
        max_iter: o.max_iter.unwrap_or(d.max_iter),
        margin: o.margin.unwrap_or(d.margin),
        ..d
    }
}

#[derive(Serialize)]
struct DispersionOut {
    mu: f64,
    beta: f64,
    gamma: f64,
    d: f64,
    sigma: f64,
    s_star: f64,
    e_star: f64,
    c_star: f64,
    lambda_star: f64,
    speed: Option<f64>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
}

fn cmd_dispersion(o: &Opts, out: &mut Out) -> Result<(), CliError> {
    let p = params(o)?;
    let speed = single(&o.speed, "speed")?;
    let disp = dispersion(&p, speed)?;
    let rep = DispersionOut {
        mu: p.mu(),
        beta: p.beta(),
        gamma: p.gamma(),
        d: p.d(),
        sigma: disp.sigma,
        s_star: disp.s_star,
        e_star: disp.e_star,
        c_star: disp.c_star,
        lambda_star: disp.lambda_star,
        speed,
        lambda1: disp.roots.map(|r| r.lambda1),
        lambda2: disp.roots.map(|r| r.lambda2),
    };
    println!("sigma   = {:.10}", rep.sigma);
    println!("s*, e*  = {:.10}, {:.10}", rep.s_star, rep.e_star);
    println!("c*      = {:.10}  (lambda* = {:.10})", rep.c_star, rep.lambda_star);
    if let (Some(c), Some(l1), Some(l2)) = (speed, rep.lambda1, rep.lambda2) {
        println!("c = {c}: lambda1 = {l1:.10}, lambda2 = {l2:.10}");
    }
    out.json("dispersion.json", &rep)?;
    out.report_csv("dispersion.csv", &key_values(&rep))
}

#[derive(Serialize)]
struct SandwichOut {
    #[serde(flatten)]
    report: InequalityReport,
    parameters: SandwichParams,
}

fn cmd_sandwich(o: &Opts, out: &mut Out) -> Result<(), CliError> {
    let p = params(o)?;
    let c = require_speed(o, "sandwich")?;
    let so = solve_options(o);
    let sp = select_parameters(&p, c, so.margin)?;
    let report = verify_inequalities(&p, &sp, &GridSpec::new(-so.l, so.l, SANDWICH_STEP))?;
    println!("xi2 = {:.6} < xi1 = {:.6} < 0", report.xi2, report.xi1);
    let mut table = Csv::new(&[
        "check",
        "required_sign",
        "worst_residual",
        "worst_location",
        "points_checked",
        "pass",
    ]);
    for ch in &report.checks {
        println!(
            "{:<10} worst {:+.3e} at xi = {:.2}  {}",
            ch.name,
            ch.worst_residual,
            ch.worst_location,
            if ch.pass { "pass" } else { "FAIL" }
        );
        table.row([
            ch.name.to_string(),
            match ch.required_sign {
                Sign::NonPositive => "non_positive",
                Sign::NonNegative => "non_negative",
            }
            .to_string(),
            num(ch.worst_residual),
            num(ch.worst_location),
            ch.points_checked.to_string(),
            ch.pass.to_string(),
        ]);
    }
    if report.wide_sandwich {
        println!("note: xi2 < -100, the truncation must be very long");
    }
    let all_pass = report.all_pass;
    let rep = SandwichOut { report, parameters: sp };
    out.json("sandwich.json", &rep)?;
    out.report_csv("sandwich.csv", &table)?;
    if !all_pass {
        out.print_written();
        return Err(CliError::numerical("sandwich inequalities fail on the verification grid"));
    }
    Ok(())
}

/// Solve report without wall-clock time, so reruns are byte-identical.
#[derive(Serialize)]
struct SolveSummary {
    c: f64,
    iterations: usize,
    final_gap: f64,
    fixed_point_residual: f64,
    ode_residual: f64,
    converged: bool,
    max_ordering_violation: f64,
}

impl SolveSummary {
    fn new(c: f64, r: &SolveReport) -> Self {
        SolveSummary {
            c,
            iterations: r.iterations,
            final_gap: r.final_gap,
            fixed_point_residual: r.fixed_point_residual,
            ode_residual: r.ode_residual,
            converged: r.converged,
            max_ordering_violation: r.max_ordering_violation,
        }
    }
}

#[derive(Serialize)]
struct DiagnosticsOut {
    c: f64,
    l: f64,
    m: usize,
    alpha: f64,
    sandwich: SandwichParams,
    tail: TailDiagnostics,
    endpoint: EndpointDiagnostics,
}

fn cmd_solve(o: &Opts, out: &mut Out) -> Result<(), CliError> {
    let speed = single(&o.speed, "speed")?;
    match (speed, o.minimal.unwrap_or(false)) {
        (Some(_), true) => Err(CliError::validation("--speed and --minimal are mutually exclusive")),
        (None, false) => Err(CliError::validation("solve needs --speed or --minimal")),
        (Some(c), false) => solve_at_speed(o, c, out),
        (None, true) => solve_minimal(o, out),
    }
}

fn solve_at_speed(o: &Opts, c: f64, out: &mut Out) -> Result<(), CliError> {
    let p = params(o)?;
    let so = solve_options(o);
    let sp = select_parameters(&p, c, so.margin).map_err(CliError::staged("select_parameters"))?;
    let problem =
        build_problem(&p, c, &sp, so.l, so.m, so.alpha_margin).map_err(CliError::staged("build_problem"))?;
    let (profile, report) = monotone_iterate(&problem, so.tol, so.max_iter).map_err(CliError::staged("monotone_iterate"))?;
    let tail = tail_diagnostics(&p, c, &sp, &profile);
    let endpoint = endpoint_diagnostics(&p, &profile, so.endpoint_window.min(0.5 * so.l), so.tol);

    println!(
        "converged in {} iterations ({:.2} s): gap {:.3e}, map residual {:.3e}, ode residual {:.3e}",
        report.iterations, report.wall_seconds, report.final_gap, report.fixed_point_residual, report.ode_residual
    );
    if let Some(e) = tail.left_decay_rel_error {
        println!("left decay exponent relative error {e:.3e}");
    }
    println!("endpoint relative error {:.3e}", endpoint.endpoint_rel_error);

    let path = out.path("profile.csv")?;
    write_profile_csv(&path, &profile)?;
    out.note(path);
    let summary = SolveSummary::new(c, &report);
    out.json("solve_report.json", &summary)?;
    out.report_csv("solve_report.csv", &key_values(&summary))?;
    let diag = DiagnosticsOut {
        c,
        l: so.l,
        m: so.m,
        alpha: problem.alpha,
        sandwich: sp,
        tail,
        endpoint,
    };
    out.json("diagnostics.json", &diag)?;
    out.report_csv("diagnostics.csv", &key_values(&diag))
}

#[derive(Serialize)]
struct MinimalOut {
    c_star: f64,
    deltas: Vec<f64>,
    speeds: Vec<f64>,
    epsilon_hat: f64,
    shifts: Vec<f64>,
    /// Sup distance between successive shifted profiles.
    distances: Vec<f64>,
    compare_half_width: f64,
    solves: Vec<SolveSummary>,
}

fn solve_minimal(o: &Opts, out: &mut Out) -> Result<(), CliError> {
    let p = params(o)?;
    let so = solve_options(o);
    let deltas = o.delta_sequence.clone().map(|l| l.0).unwrap_or_else(|| DEFAULT_DELTAS.to_vec());
    let mw = solve_minimal_wave(&p, &so, &deltas).map_err(CliError::staged("minimal_sequence"))?;
    let rep = MinimalOut {
        c_star: mw.c_star,
        deltas: mw.deltas.clone(),
        speeds: mw.speeds.clone(),
        epsilon_hat: mw.epsilon_hat,
        shifts: mw.shifts.clone(),
        distances: mw.distances.clone(),
        compare_half_width: mw.compare_half_width,
        solves: mw.speeds.iter().zip(&mw.reports).map(|(&c, r)| SolveSummary::new(c, r)).collect(),
    };
    println!("c* = {:.10}, normalization level {:.6e}", rep.c_star, rep.epsilon_hat);
    let mut table = Csv::new(&[
        "delta",
        "speed",
        "shift",
        "distance_to_previous",
        "iterations",
        "final_gap",
        "ode_residual",
    ]);
    for k in 0..rep.deltas.len() {
        let dist = (k > 0).then(|| rep.distances[k - 1]);
        let r = &rep.solves[k];
        println!(
            "delta {:<8} c = {:.6}  iterations {:>5}  distance to previous {}",
            rep.deltas[k],
            rep.speeds[k],
            r.iterations,
            dist.map_or("-".to_string(), |d| format!("{d:.3e}"))
        );
        table.row([
            num(rep.deltas[k]),
            num(rep.speeds[k]),
            num(rep.shifts[k]),
            opt(dist),
            r.iterations.to_string(),
            num(r.final_gap),
            num(r.ode_residual),
        ]);
    }
    let path = out.path("profile.csv")?;
    write_profile_csv(&path, &mw.last.profile)?;
    out.note(path);
    out.json("minimal_sequence.json", &rep)?;
    out.report_csv("minimal_sequence.csv", &table)
}

struct SimSettings {
    n_half: usize,
    dt: f64,
    t_end: f64,
    level: Option<f64>,
    recovered: bool,
}

impl SimSettings {
    fn from_opts(o: &Opts) -> Result<Self, CliError> {
        let level = o.level;
        if let Some(v) = level {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::validation(format!("--level must be positive (got {v})")));
            }
        }
        Ok(SimSettings {
            n_half: o.n_half.unwrap_or(DEFAULT_N),
            dt: o.dt.unwrap_or(0.01),
            t_end: o.t_end.unwrap_or(300.0),
            level,
            recovered: o.recovered.unwrap_or(false),
        })
    }

    /// One recording per unit time (or per step if `dt > 1`).
    fn config(&self, p: &ModelParams) -> Result<SimConfig, CliError> {
        let cfg = SimConfig {
            dt: self.dt,
            t_end: self.t_end,
            record_stride: ((1.0 / self.dt).round() as usize).max(1),
            level: self.level.unwrap_or(0.5 * endemic_state(p).e_star),
            fit_window_fraction: FIT_WINDOW_FRACTION,
        };
        cfg.validate(p)?;
        Ok(cfg)
    }

    /// Compactly supported infective data spreading into a susceptible lattice.
    fn spreading_run(&self, p: &ModelParams, cfg: &SimConfig) -> Result<Vec<LatticeState>, CliError> {
        let i0 = endemic_state(p).e_star;
        let st = init_state(
            self.n_half,
            &InitialData::LeftBlock {
                i0,
                width: BLOCK_WIDTH,
            },
            self.recovered,
        )?;
        Ok(integrate(p, &st, cfg)?)
    }
}

#[derive(Serialize)]
struct SimulationOut {
    fitted_speed: f64,
    fit_stderr: f64,
    c_star: f64,
    relative_error: f64,
    level: f64,
    fit_start_time: f64,
    monotone_in_fit_window: bool,
    n_half: usize,
    dt: f64,
    t_end: f64,
}

#[derive(Serialize)]
struct ShapeOut {
    profile: String,
    n_half: usize,
    dt: f64,
    t_end: f64,
    #[serde(flatten)]
    check: ShapeCheck,
}

fn cmd_simulate(o: &Opts, out: &mut Out) -> Result<(), CliError> {
    let p = params(o)?;
    let ss = SimSettings::from_opts(o)?;
    let check_shape = o.check_shape.unwrap_or(false);
    if check_shape && o.from_profile.is_none() {
        return Err(CliError::validation("--check-shape needs --from-profile"));
    }
    let every = o.trajectory_every.unwrap_or(DEFAULT_TRAJECTORY_EVERY);
    if !(every > 0.0) || !every.is_finite() {
        return Err(CliError::validation(format!("--trajectory-every must be positive (got {every})")));
    }
    let cfg = ss.config(&p)?;
    if let Some(path) = &o.from_profile {
        return shape_check(o, &p, &ss, &cfg, path, out);
    }
    let c_star = minimal_speed(&p, DEFAULT_CSTAR_TOL)?.c_star;
    let recs = ss.spreading_run(&p, &cfg)?;
    write_trajectory(&recs, every, cfg.dt * cfg.record_stride as f64, out)?;
    let trace = match track_front(&recs, cfg.level, cfg.fit_window_fraction) {
        Ok(t) => t,
        Err(e) => {
            out.print_written();
            return Err(e.into());
        }
    };
    write_front(&trace, out)?;
    let rep = SimulationOut {
        fitted_speed: trace.fitted_speed,
        fit_stderr: trace.fit_stderr,
        c_star,
        relative_error: (trace.fitted_speed - c_star).abs() / c_star,
        level: cfg.level,
        fit_start_time: trace.fit_start_time,
        monotone_in_fit_window: trace.monotone_in_fit_window,
        n_half: ss.n_half,
        dt: cfg.dt,
        t_end: cfg.t_end,
    };
    println!(
        "front speed {:.6} +- {:.1e} vs c* = {:.6} (relative error {:.3e})",
        rep.fitted_speed, rep.fit_stderr, rep.c_star, rep.relative_error
    );
    out.json("simulation.json", &rep)?;
    out.report_csv("simulation.csv", &key_values(&rep))
}

fn shape_check(
    o: &Opts,
    p: &ModelParams,
    ss: &SimSettings,
    cfg: &SimConfig,
    path: &Path,
    out: &mut Out,
) -> Result<(), CliError> {
    let prof = read_profile_csv(path)?;
    // Without --speed, the speed is the one whose smaller decay exponent the
    // profile's left tail carries.
    let c = single(&o.speed, "speed")?.unwrap_or_else(|| p.dispersion_quotient(prof.lambda1));
    let check = wave_shape_check(p, &prof, c, ss.n_half, cfg)?;
    println!(
        "c = {:.6}: drift {:.6} (relative error {:.3e}), max distance {:.3e} = {:.3e} e*, initial {:.3e}",
        c, check.drift_rate, check.drift_rel_error, check.max_distance, check.max_distance_over_e_star, check.initial_distance
    );
    let mut table = Csv::new(&["t", "shift", "distance"]);
    for k in 0..check.times.len() {
        table.row([num(check.times[k]), num(check.shifts[k]), num(check.distances[k])]);
    }
    out.data_csv("shape_check.csv", &table)?;
    let rep = ShapeOut {
        profile: path.display().to_string(),
        n_half: ss.n_half,
        dt: cfg.dt,
        t_end: cfg.t_end,
        check,
    };
    out.json("shape_check.json", &rep)
}

fn write_trajectory(recs: &[LatticeState], every: f64, interval: f64, out: &mut Out) -> Result<(), CliError> {
    let skip = ((every / interval).round() as usize).max(1);
    let tracked = recs[0].r.is_some();
    let header: &[&str] = if tracked { &["t", "n", "s", "i", "r"] } else { &["t", "n", "s", "i"] };
    let mut table = Csv::new(header);
    let last = recs.len() - 1;
    for (k, st) in recs.iter().enumerate() {
        if k % skip != 0 && k != last {
            continue;
        }
        for j in 0..st.len() {
            let mut row = vec![num(st.t), st.site(j).to_string(), num(st.s[j]), num(st.i[j])];
            if let Some(r) = &st.r {
                row.push(num(r[j]));
            }
            table.row(row);
        }
    }
    out.data_csv("trajectory.csv", &table)
}

fn write_front(trace: &FrontTrace, out: &mut Out) -> Result<(), CliError> {
    let mut table = Csv::new(&["t", "position"]);
    for (t, x) in trace.times.iter().zip(&trace.positions) {
        table.row([num(*t), x.map(|v| v.to_string()).unwrap_or_default()]);
    }
    out.data_csv("front.csv", &table)
}

#[derive(Serialize)]
struct CertifyOut {
    c_star: f64,
    /// Number of sign changes of `certified` along the speed list.
    flips: usize,
    certificates: Vec<NonexistenceCertificate>,
}

fn cmd_certify(o: &Opts, out: &mut Out) -> Result<(), CliError> {
    let p = params(o)?;
    let c_star = minimal_speed(&p, DEFAULT_CSTAR_TOL)?.c_star;
    let speeds: Vec<f64> = match &o.speed {
        Some(List(xs)) => xs.clone(),
        None => (0..=100).map(|k| c_star * (0.5 + 0.01 * k as f64)).collect(),
    };
    if let Some(c) = speeds.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
        return Err(CliError::validation(format!("speeds must be positive (got {c})")));
    }
    let certificates = speeds
        .iter()
        .map(|&c| certify_nonexistence(&p, c))
        .collect::<Result<Vec<_>, _>>()?;
    let flips = certificates.windows(2).filter(|w| w[0].certified != w[1].certified).count();
    let mut table = Csv::new(&["c", "c_star", "min_char_value", "argmin_lambda", "scan_cap", "certified"]);
    for cert in &certificates {
        table.row([
            num(cert.c),
            num(cert.c_star),
            num(cert.min_char_value),
            num(cert.argmin_lambda),
            num(cert.scan_cap),
            cert.certified.to_string(),
        ]);
    }
    if certificates.len() <= 10 {
        for cert in &certificates {
            println!(
                "c = {:.6}: min char {:+.6e} at lambda {:.6}  {}",
                cert.c,
                cert.min_char_value,
                cert.argmin_lambda,
                if cert.certified { "no wave (certified)" } else { "not certified" }
            );
        }
    }
    let certified = certificates.iter().filter(|c| c.certified).count();
    println!(
        "{certified} of {} speeds certified wave-free; c* = {c_star:.10}; {flips} flip(s)",
        certificates.len()
    );
    let rep = CertifyOut {
        c_star,
        flips,
        certificates,
    };
    out.json("certificate.json", &rep)?;
    out.report_csv("certificate.csv", &table)
}

#[derive(Debug, Clone, Default, Serialize)]
struct SweepRow {
    mu: f64,
    beta: f64,
    gamma: f64,
    d: f64,
    sigma: Option<f64>,
    s_star: Option<f64>,
    e_star: Option<f64>,
    c_star: Option<f64>,
    lambda_star: Option<f64>,
    speed: Option<f64>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    measured_speed: Option<f64>,
    relative_error: Option<f64>,
    error: Option<String>,
}

fn sweep_point(row: &mut SweepRow, sim: Option<&SimSettings>) -> Result<(), CliError> {
    let p = ModelParams::new(row.mu, row.beta, row.gamma, row.d)?;
    let disp = dispersion(&p, None)?;
    row.sigma = Some(disp.sigma);
    row.s_star = Some(disp.s_star);
    row.e_star = Some(disp.e_star);
    row.c_star = Some(disp.c_star);
    row.lambda_star = Some(disp.lambda_star);
    if let Some(c) = row.speed {
        let r = lambda_roots(&p, c, DEFAULT_ROOT_TOL)?;
        row.lambda1 = Some(r.lambda1);
        row.lambda2 = Some(r.lambda2);
    }
    if let Some(ss) = sim {
        let cfg = ss.config(&p)?;
        let recs = ss.spreading_run(&p, &cfg)?;
        let trace = track_front(&recs, cfg.level, cfg.fit_window_fraction)?;
        row.measured_speed = Some(trace.fitted_speed);
        row.relative_error = Some((trace.fitted_speed - disp.c_star).abs() / disp.c_star);
    }
    Ok(())
}

fn cmd_sweep(o: &Opts, out: &mut Out) -> Result<(), CliError> {
    let std = ModelParams::standard();
    let axis = |v: &Option<List>, default: f64| v.clone().map(|l| l.0).unwrap_or_else(|| vec![default]);
    let (mus, betas, gammas, ds) = (
        axis(&o.mu, std.mu()),
        axis(&o.beta, std.beta()),
        axis(&o.gamma, std.gamma()),
        axis(&o.d, std.d()),
    );
    let speeds: Vec<Option<f64>> = match &o.speed {
        Some(List(xs)) => xs.iter().map(|&c| Some(c)).collect(),
        None => vec![None],
    };
    let simulate = o.simulate.unwrap_or(false);
    let sim = if simulate { Some(SimSettings::from_opts(o)?) } else { None };

    let mut rows = Vec::new();
    for &mu in &mus {
        for &beta in &betas {
            for &gamma in &gammas {
                for &d in &ds {
                    for &speed in &speeds {
                        rows.push(SweepRow {
                            mu,
                            beta,
                            gamma,
                            d,
                            speed,
                            ..SweepRow::default()
                        });
                    }
                }
            }
        }
    }
    rows.par_iter_mut().for_each(|row| {
        if let Err(e) = sweep_point(row, sim.as_ref()) {
            row.error = Some(e.msg);
        }
    });

    let with_speed = o.speed.is_some();
    let mut header = vec!["mu", "beta", "gamma", "d", "sigma", "s_star", "e_star", "c_star", "lambda_star"];
    if with_speed {
        header.extend(["speed", "lambda1", "lambda2"]);
    }
    if simulate {
        header.extend(["measured_speed", "relative_error"]);
    }
    header.push("error");
    let mut table = Csv::new(&header);
    for r in &rows {
        let mut f = vec![
            num(r.mu),
            num(r.beta),
            num(r.gamma),
            num(r.d),
            opt(r.sigma),
            opt(r.s_star),
            opt(r.e_star),
            opt(r.c_star),
            opt(r.lambda_star),
        ];
        if with_speed {
            f.extend([opt(r.speed), opt(r.lambda1), opt(r.lambda2)]);
        }
        if simulate {
            f.extend([opt(r.measured_speed), opt(r.relative_error)]);
        }
        f.push(r.error.as_deref().map(text).unwrap_or_default());
        table.row(f);
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("{} points, {failed} with errors", rows.len());
    out.data_csv("sweep.csv", &table)?;
    out.json("sweep.json", &rows)
}
