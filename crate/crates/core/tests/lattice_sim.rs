use latwave_core::model::{endemic_state, minimal_speed, ModelParams, DEFAULT_CSTAR_TOL};
use latwave_core::profile::{solve_wave, SolveOptions};
use latwave_core::sim::*;

fn sup_diff(a: &LatticeState, b: &LatticeState) -> f64 {
    a.s.iter()
        .zip(&b.s)
        .chain(a.i.iter().zip(&b.i))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn equilibria_stay_put() {
    let p = ModelParams::standard();
    let eq = endemic_state(&p);
    let cfg = SimConfig {
        t_end: 100.0,
        record_stride: 1000,
        ..SimConfig::defaults(&p)
    };
    for (s, i) in [(1.0, 0.0), (eq.s_star, eq.e_star)] {
        let st = LatticeState::constant(50, s, i, true);
        let recs = integrate(&p, &st, &cfg).unwrap();
        let last = recs.last().unwrap();
        assert!((last.t - 100.0).abs() < 1e-9);
        assert!(sup_diff(&st, last) <= 1e-12);
    }
}

#[test]
fn rk4_is_fourth_order() {
    let p = ModelParams::standard();
    let st = init_state(30, &InitialData::Bump { i0: 0.2, width: 3 }, false).unwrap();
    let run = |dt: f64| {
        let cfg = SimConfig {
            dt,
            t_end: 2.0,
            record_stride: 100_000,
            ..SimConfig::defaults(&p)
        };
        integrate(&p, &st, &cfg).unwrap().pop().unwrap()
    };
    let (a, b, c) = (run(0.02), run(0.01), run(0.005));
    let ratio = sup_diff(&a, &b) / sup_diff(&b, &c);
    assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
}

#[test]
fn recovered_compartment_follows_its_equation() {
    let p = ModelParams::standard();
    let st = init_state(20, &InitialData::Bump { i0: 0.2, width: 2 }, true).unwrap();
    let cfg = SimConfig {
        t_end: 1.0,
        record_stride: 10,
        ..SimConfig::defaults(&p)
    };
    let recs = integrate(&p, &st, &cfg).unwrap();
    let last = recs.last().unwrap();
    let r = last.r.as_ref().unwrap();
    assert!(r[20] > 0.0);
    assert!(r.iter().all(|&v| v >= 0.0));
}

#[test]
fn left_block_spreads_near_minimal_speed() {
    let p = ModelParams::standard();
    let c_star = minimal_speed(&p, DEFAULT_CSTAR_TOL).unwrap().c_star;
    let cfg = SimConfig::defaults(&p);
    let e_star = endemic_state(&p).e_star;
    let st = init_state(1500, &InitialData::LeftBlock { i0: e_star, width: 10 }, false).unwrap();
    let recs = integrate(&p, &st, &cfg).unwrap();
    let tr = track_front(&recs, cfg.level, cfg.fit_window_fraction).unwrap();
    assert!((tr.fitted_speed - c_star).abs() <= 0.05 * c_star, "{}", tr.fitted_speed);
    let tr_half = track_front(&recs, 0.5 * cfg.level, cfg.fit_window_fraction).unwrap();
    assert!((tr_half.fitted_speed - tr.fitted_speed).abs() < 0.01 * tr.fitted_speed);

    // Behind the front the infectives sit near e*.
    let last = recs.last().unwrap();
    let x = tr.positions.last().unwrap().unwrap();
    let k = (x - 200 + 1500) as usize;
    assert!((last.i[k] - e_star).abs() < 0.1 * e_star, "i behind front {}", last.i[k]);
}

#[test]
fn small_lattice_hits_boundary() {
    let p = ModelParams::standard();
    let cfg = SimConfig::defaults(&p);
    let st = init_state(50, &InitialData::LeftBlock { i0: 0.3, width: 10 }, false).unwrap();
    let recs = integrate(&p, &st, &cfg).unwrap();
    assert!(matches!(
        track_front(&recs, cfg.level, cfg.fit_window_fraction),
        Err(SimError::FrontHitBoundary { .. })
    ));
}

#[test]
fn profile_is_transported_at_its_speed() {
    let p = ModelParams::standard();
    let wp = solve_wave(&p, 3.5, &SolveOptions::default()).unwrap();
    let cfg = SimConfig {
        t_end: 20.0,
        ..SimConfig::defaults(&p)
    };
    let sc = wave_shape_check(&p, &wp.profile, 3.5, 400, &cfg).unwrap();
    assert_eq!(sc.initial_distance, 0.0);
    assert_eq!(sc.shifts[0], 0.0);
    assert!(sc.drift_rel_error < 0.05);
    assert!(sc.max_distance_over_e_star < 0.05);
    // No shape-preserving drift well below the minimal speed shows up.
    let c_star = minimal_speed(&p, DEFAULT_CSTAR_TOL).unwrap().c_star;
    assert!(sc.drift_rate >= 0.95 * c_star);
}
