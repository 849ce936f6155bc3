use serde::Serialize;

use super::grid::Profile;
use crate::model::{endemic_state, ModelParams};
use crate::numeric::linear_fit;
use crate::sandwich::SandwichParams;

/// Sup norm of the wave equations at interior nodes, with centered
/// differences for the derivatives and exact unit shifts.
pub fn ode_residual(p: &ModelParams, c: f64, prof: &Profile) -> f64 {
    let n = prof.len();
    let m = prof.grid.m as isize;
    let h2 = 2.0 * prof.grid.h();
    let loss = p.mu() + p.gamma();
    let mut worst: f64 = 0.0;
    for j in 1..n - 1 {
        let k = j as isize;
        let (phi, psi) = (prof.phi[j], prof.psi[j]);
        let dphi = (prof.phi[j + 1] - prof.phi[j - 1]) / h2;
        let dpsi = (prof.psi[j + 1] - prof.psi[j - 1]) / h2;
        let r1 = -c * dphi + prof.phi_at(k + m) + prof.phi_at(k - m) - 2.0 * phi + p.mu() * (1.0 - phi)
            - p.beta() * phi * psi;
        let r2 = -c * dpsi + p.d() * (prof.psi_at(k + m) + prof.psi_at(k - m) - 2.0 * psi) - loss * psi
            + p.beta() * phi * psi;
        worst = worst.max(r1.abs()).max(r2.abs());
    }
    worst
}

/// Bound on `ψ(ξ+1)/ψ(ξ)` for positive solutions of
/// `ψ' ≥ (d/c) ψ(ξ+1) - ((2d + μ + γ)/c) ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarnackBound {
    pub m: f64,
    pub bound: f64,
}

pub fn harnack_bound(p: &ModelParams, c: f64) -> HarnackBound {
    let d = p.d();
    let m = (c / d).max((2.0 * d + p.mu() + p.gamma()) / c).max(d / c);
    let em = m.exp();
    HarnackBound {
        m,
        bound: em.max(2.0 * m * (2.0 * m * em - 1.0)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailDiagnostics {
    pub harnack_m: f64,
    pub harnack_bound: f64,
    pub max_harnack_ratio: f64,
    pub max_harnack_ratio_at: f64,
    pub harnack_ok: bool,
    pub lambda1: f64,
    /// Least-squares slope of `ln ψ` over `[-l, xi2 - 2]`; absent if that
    /// window holds fewer than two nodes.
    pub left_decay_exponent: Option<f64>,
    pub left_decay_rel_error: Option<f64>,
    pub fit_window: (f64, f64),
    /// Centered-difference `(ln ψ)'` at the second and second-to-last nodes.
    pub log_derivative_left: f64,
    pub log_derivative_right: f64,
}

pub fn tail_diagnostics(p: &ModelParams, c: f64, sp: &SandwichParams, prof: &Profile) -> TailDiagnostics {
    let hb = harnack_bound(p, c);
    let g = prof.grid;
    let m = g.m;
    let n = prof.len();
    let mut max_ratio: f64 = 0.0;
    let mut max_at = f64::NAN;
    for j in 0..n.saturating_sub(m) {
        if prof.psi[j] > 0.0 {
            let r = prof.psi[j + m] / prof.psi[j];
            if r > max_ratio {
                max_ratio = r;
                max_at = g.node(j as isize);
            }
        }
    }

    let hi = sp.xi2 - 2.0;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|j| (g.node(j as isize), prof.psi[j]))
        .filter(|&(x, v)| x <= hi && v > 0.0)
        .map(|(x, v)| (x, v.ln()))
        .unzip();
    let slope = linear_fit(&xs, &ys).map(|f| f.slope);

    let h2 = 2.0 * g.h();
    let logd = |j: usize| (prof.psi[j + 1].ln() - prof.psi[j - 1].ln()) / h2;
    TailDiagnostics {
        harnack_m: hb.m,
        harnack_bound: hb.bound,
        max_harnack_ratio: max_ratio,
        max_harnack_ratio_at: max_at,
        harnack_ok: max_ratio <= hb.bound,
        lambda1: sp.lambda1,
        left_decay_exponent: slope,
        left_decay_rel_error: slope.map(|s| (s - sp.lambda1).abs() / sp.lambda1),
        fit_window: (-g.l, hi),
        log_derivative_left: logd(1),
        log_derivative_right: logd(n - 2),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointDiagnostics {
    pub window: f64,
    pub s_star: f64,
    pub e_star: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub psi_min: f64,
    pub psi_max: f64,
    /// `min φ ≤ s* ≤ max φ` over the trailing window, with 5% slack.
    pub phi_bracket_ok: bool,
    pub psi_bracket_ok: bool,
    pub phi_end: f64,
    pub psi_end: f64,
    /// Trailing variation below `flat_tol` in both components.
    pub flat_tail: bool,
    /// `max(|φ(l) - s*|/s*, |ψ(l) - e*|/e*)`.
    pub endpoint_rel_error: f64,
    /// Largest sampled level below which ψ is strictly increasing.
    pub small_psi_increasing_level: f64,
    /// Largest ψ over the whole grid, in units of e*.
    pub psi_sup_over_e_star: f64,
}

const BRACKET_SLACK: f64 = 0.05;

pub fn endpoint_diagnostics(p: &ModelParams, prof: &Profile, window: f64, flat_tol: f64) -> EndpointDiagnostics {
    let eq = endemic_state(p);
    let g = prof.grid;
    let n = prof.len();
    let start = g.l - window;
    let idx: Vec<usize> = (0..n).filter(|&j| g.node(j as isize) >= start).collect();
    let mm = |v: &[f64]| {
        idx.iter()
            .map(|&j| v[j])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
    };
    let (phi_min, phi_max) = mm(&prof.phi);
    let (psi_min, psi_max) = mm(&prof.psi);
    let bracket = |lo: f64, hi: f64, target: f64| {
        lo <= target * (1.0 + BRACKET_SLACK) && hi >= target * (1.0 - BRACKET_SLACK)
    };
    let phi_end = prof.phi[n - 1];
    let psi_end = prof.psi[n - 1];

    // Largest ε such that ψ' > 0 wherever ψ ≤ ε: the smallest ψ value at a
    // node where ψ fails to increase.
    let h2 = 2.0 * g.h();
    let mut level = f64::INFINITY;
    for j in 1..n - 1 {
        let d = (prof.psi[j + 1] - prof.psi[j - 1]) / h2;
        if d <= 0.0 {
            level = level.min(prof.psi[j]);
        }
    }
    let psi_sup = prof.psi.iter().cloned().fold(0.0, f64::max);
    if !level.is_finite() {
        level = psi_sup;
    }

    EndpointDiagnostics {
        window,
        s_star: eq.s_star,
        e_star: eq.e_star,
        phi_min,
        phi_max,
        psi_min,
        psi_max,
        phi_bracket_ok: bracket(phi_min, phi_max, eq.s_star),
        psi_bracket_ok: bracket(psi_min, psi_max, eq.e_star),
        phi_end,
        psi_end,
        flat_tail: phi_max - phi_min < flat_tol && psi_max - psi_min < flat_tol,
        endpoint_rel_error: ((phi_end - eq.s_star).abs() / eq.s_star).max((psi_end - eq.e_star).abs() / eq.e_star),
        small_psi_increasing_level: level,
        psi_sup_over_e_star: psi_sup / eq.e_star,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::grid::Grid;

    #[test]
    fn harnack_ratio_of_pure_exponential() {
        let g = Grid::new(10.0, 4).unwrap();
        let l1 = 0.731;
        let prof = Profile::from_fn(g, l1, |_| 1.0, |x| (l1 * x).exp());
        let p = ModelParams::standard();
        let sp = crate::sandwich::select_parameters(&p, 3.5, 1.01).unwrap();
        let t = tail_diagnostics(&p, 3.5, &sp, &prof);
        assert!((t.max_harnack_ratio - l1.exp()).abs() < 1e-12);
    }

    #[test]
    fn harnack_constant_formula() {
        let p = ModelParams::standard();
        let hb = harnack_bound(&p, 3.5);
        assert_eq!(hb.m, 3.5);
        let em = 3.5f64.exp();
        assert_eq!(hb.bound, 7.0 * (7.0 * em - 1.0));
    }
}
