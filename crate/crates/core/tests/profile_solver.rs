use latwave_core::model::ModelParams;
use latwave_core::profile::*;
use latwave_core::sandwich::{eval_lower, select_parameters, DEFAULT_MARGIN};

fn standard_problem(m: usize) -> TruncatedProblem {
    let p = ModelParams::standard();
    let sp = select_parameters(&p, 3.5, DEFAULT_MARGIN).unwrap();
    build_problem(&p, 3.5, &sp, 40.0, m, 1.01).unwrap()
}

#[test]
fn first_sweep_moves_bounds_inward() {
    let pr = standard_problem(20);
    let mut it = MonotoneIteration::new(&pr);
    let (pu0, pl0) = (it.phi_upper.clone(), it.phi_lower.clone());
    it.step();
    for j in 0..pu0.len() {
        assert!(it.phi_upper[j] <= pu0[j]);
        assert!(it.phi_lower[j] >= pl0[j]);
    }
}

#[test]
fn iterates_stay_ordered_and_inside_sandwich() {
    let pr = standard_problem(10);
    let mut it = MonotoneIteration::new(&pr);
    let xs = pr.grid.nodes();
    let mut prev_gap = f64::INFINITY;
    for _ in 0..200 {
        let sweep = it.step();
        assert!(sweep.ordering_violation <= ORDERING_SLACK);
        assert!(sweep.gap <= prev_gap + ORDERING_SLACK);
        prev_gap = sweep.gap;
        let up = it.bound(true);
        let lo = it.bound(false);
        for (j, &x) in xs.iter().enumerate() {
            let (pl, ql) = eval_lower(&pr.sp, x);
            let qu = (pr.sp.lambda1 * x).exp();
            assert!(lo.phi[j] >= pl - 1e-15 && up.phi[j] <= 1.0 + 1e-15);
            assert!(lo.psi[j] >= ql * (1.0 - 1e-14) && up.psi[j] <= qu * (1.0 + 1e-14));
        }
    }
}

#[test]
fn identical_bounds_are_stationary() {
    // Starting both bounds at a converged profile leaves them there.
    let pr = standard_problem(10);
    let (prof, _) = monotone_iterate(&pr, 1e-10, 5000).unwrap();
    let mut it = MonotoneIteration::new(&pr);
    let w: Vec<f64> = prof
        .psi
        .iter()
        .zip(pr.grid.nodes())
        .map(|(v, x)| v / (pr.sp.lambda1 * x).exp())
        .collect();
    it.phi_upper = prof.phi.clone();
    it.phi_lower = prof.phi.clone();
    it.w_upper = w.clone();
    it.w_lower = w;
    let sweep = it.step();
    assert!(sweep.gap < 1e-9);
}

#[test]
fn standard_solve_properties() {
    let p = ModelParams::standard();
    let wp = solve_wave(&p, 3.5, &SolveOptions::default()).unwrap();
    let r = &wp.report;
    assert!(r.converged && r.iterations <= 5000);
    assert!(r.final_gap <= 1e-6 && r.fixed_point_residual <= 1e-6);
    let prof = &wp.profile;
    let n = prof.len();
    assert_eq!(prof.phi[0], 1.0);
    assert_eq!(prof.psi[0], (-wp.sandwich.lambda1 * 40.0).exp());
    for j in 1..n - 1 {
        assert!(prof.phi[j] > 0.0 && prof.phi[j] < 1.0, "phi at node {j}");
        assert!(prof.psi[j] > 0.0);
    }
    // Sup of ψ stays on the scale of e*.
    assert!(wp.endpoint.psi_sup_over_e_star < 10.0);
    assert!(wp.endpoint.phi_bracket_ok && wp.endpoint.psi_bracket_ok);
    assert!(wp.endpoint.endpoint_rel_error < 0.02);
    assert!(wp.endpoint.small_psi_increasing_level > 0.0);
    assert!(wp.tail.harnack_ok);
    assert!(wp.tail.left_decay_rel_error.unwrap() < 0.02);
}

#[test]
fn fixed_point_of_integral_operator() {
    let p = ModelParams::standard();
    let wp = solve_wave(&p, 3.5, &SolveOptions::default()).unwrap();
    let pr = build_problem(&p, 3.5, &wp.sandwich, 40.0, 20, 1.01).unwrap();
    let img = apply_f(&pr, &wp.profile).unwrap();
    assert!(img.sup_distance(&wp.profile) <= 1e-6);
}

#[test]
fn integral_operator_maps_into_sandwich() {
    let pr = standard_problem(20);
    let up = pr.upper_profile();
    let lo = pr.lower_profile();
    let mixed = Profile::new(pr.grid, pr.sp.lambda1, up.phi, lo.psi).unwrap();
    let img = apply_f(&pr, &mixed).unwrap();
    for (j, x) in pr.grid.nodes().into_iter().enumerate() {
        let (pl, ql) = eval_lower(&pr.sp, x);
        assert!(img.phi[j] >= pl && img.phi[j] <= 1.0);
        assert!(img.psi[j] >= ql * (1.0 - 1e-12) && img.psi[j] <= (pr.sp.lambda1 * x).exp() * (1.0 + 1e-12));
    }
}

#[test]
fn residual_is_second_order() {
    let p = ModelParams::standard();
    let res: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&m| {
            let o = SolveOptions { m, ..Default::default() };
            solve_wave(&p, 3.5, &o).unwrap().report.ode_residual
        })
        .collect();
    assert!(res[1] <= 0.35 * res[0], "{res:?}");
    assert!(res[2] <= 0.35 * res[1], "{res:?}");
}

#[test]
fn minimal_sequence_normalization() {
    let p = ModelParams::standard();
    let mw = solve_minimal_wave(&p, &SolveOptions::default(), &DEFAULT_DELTAS).unwrap();
    assert!(mw.speeds.windows(2).all(|w| w[1] < w[0]));
    assert!(mw.speeds.iter().all(|&c| c > mw.c_star));
    let g = mw.last.profile.grid;
    let (_, psi0) = mw.last.profile.sample(*mw.shifts.last().unwrap());
    assert!((psi0 - mw.epsilon_hat).abs() < 1e-3 * mw.epsilon_hat.max(g.h()));
    assert!(mw.distances.windows(2).all(|w| w[1] < w[0]));
    let shifted = mw.last_shifted();
    let mid = shifted.iter().find(|r| r.0 == 0.0).unwrap();
    assert!((mid.2 - mw.epsilon_hat).abs() < 1e-3);
}

#[test]
fn bad_delta_sequences_rejected() {
    let p = ModelParams::standard();
    let o = SolveOptions::default();
    assert!(matches!(solve_minimal_wave(&p, &o, &[]), Err(ProfileError::BadDeltaSequence(_))));
    assert!(matches!(
        solve_minimal_wave(&p, &o, &[0.05, 0.1]),
        Err(ProfileError::BadDeltaSequence(_))
    ));
}

#[test]
fn max_iter_reported() {
    let pr = standard_problem(10);
    match monotone_iterate(&pr, 1e-6, 5) {
        Err(ProfileError::MaxIterExceeded { iterations, gap }) => {
            assert_eq!(iterations, 5);
            assert!(gap > 1e-6);
        }
        other => panic!("unexpected {other:?}"),
    }
}

mod props {
    use super::*;
    use latwave_core::model::{minimal_speed, DEFAULT_CSTAR_TOL};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn random_solves_converge_ordered(
            mu in 0.2f64..1.0, gamma in 0.2f64..1.0, d in 0.3f64..3.0, sigma in 1.5f64..4.0, f in 1.1f64..1.6,
        ) {
            let p = ModelParams::new(mu, sigma * (mu + gamma), gamma, d).unwrap();
            let c = f * minimal_speed(&p, DEFAULT_CSTAR_TOL).unwrap().c_star;
            let sp = select_parameters(&p, c, DEFAULT_MARGIN).unwrap();
            let l = (-sp.xi2).ceil() + 20.0;
            let o = SolveOptions { l, m: 10, max_iter: 20_000, ..Default::default() };
            let wp = solve_wave(&p, c, &o).unwrap();
            prop_assert!(wp.report.converged);
            prop_assert!(wp.report.max_ordering_violation <= ORDERING_SLACK);
            let n = wp.profile.len();
            for j in 1..n - 1 {
                prop_assert!(wp.profile.phi[j] > 0.0 && wp.profile.phi[j] < 1.0);
                prop_assert!(wp.profile.psi[j] > 0.0);
            }
        }
    }
}
