//! Explicit upper and lower solutions of the wave system and a pointwise
//! checker for the four differential inequalities they must satisfy.
//!
//! Upper pair: `φ̄ = 1`, `ψ̄ = e^{λ1 ξ}`.
//! Lower pair: `φ̲ = max(0, 1 - ρ e^{θξ})`, `ψ̲ = max(0, e^{λ1 ξ} - q e^{ηλ1 ξ})`.
//!
//! The constants are picked one after another (θ, then ρ, then η, then q), each
//! with a multiplicative safety margin where only a strict inequality is known.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::error::ErrorKind;
use crate::model::{lambda_roots, lattice_symbol, ModelError, ModelParams, DEFAULT_ROOT_TOL};
use crate::numeric::bisect;

/// Absolute slack granted to the sign tests to absorb rounding.
pub const SIGN_SLACK: f64 = 1e-12;
/// Left kink positions beyond this are flagged as a uselessly wide sandwich.
pub const WIDE_SANDWICH_XI2: f64 = -100.0;
pub const DEFAULT_MARGIN: f64 = 1.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SandwichError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("margin must exceed 1 (got {0})")]
    InvalidMargin(f64),
    #[error("sandwich parameter selection failed: {0}")]
    SelectionFailed(String),
    #[error("grid does not exclude kink neighborhoods: exclusion radius {radius} < step {step}")]
    KinkTooClose { radius: f64, step: f64 },
    #[error("invalid verification grid: {0}")]
    InvalidGrid(String),
}

impl SandwichError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            SandwichError::Model(e) => e.kind(),
            SandwichError::SelectionFailed(_) => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichParams {
    pub c: f64,
    pub theta: f64,
    pub rho: f64,
    pub eta: f64,
    pub q: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub margin: f64,
    /// Set when `xi2 < -100`; such a sandwich needs a very long truncation.
    pub wide: bool,
}

/// `e^θ + e^{-θ} - 2 - cθ - μ`, the quantity that must be negative at θ.
pub fn susceptible_char(p: &ModelParams, c: f64, theta: f64) -> f64 {
    lattice_symbol(theta) - c * theta - p.mu()
}

pub fn select_parameters(p: &ModelParams, c: f64, margin: f64) -> Result<SandwichParams, SandwichError> {
    if !(margin > 1.0) || !margin.is_finite() {
        return Err(SandwichError::InvalidMargin(margin));
    }
    let roots = lambda_roots(p, c, DEFAULT_ROOT_TOL)?;
    let (l1, l2) = (roots.lambda1, roots.lambda2);

    let g = |t: f64| susceptible_char(p, c, t);
    let mut hi = l1.max(1.0);
    while g(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(SandwichError::SelectionFailed("no positive root for theta bound".into()));
        }
    }
    let theta_hat = bisect(g, 0.0, hi, 0.0)
        .map(|(a, _)| a)
        .ok_or_else(|| SandwichError::SelectionFailed("theta bound not bracketed".into()))?;
    let theta = (0.5 * l1).min(0.5 * theta_hat);

    let g_theta = g(theta);
    let rho = margin * 1f64.max(p.beta() / -g_theta);
    let xi1 = -rho.ln() / theta;

    let eta = 1.0 + 0.5 * (theta / l1).min(l2 / l1 - 1.0);
    let char_eta = p.char_psi(c, eta * l1);
    let q = margin * ((1.0 - eta) * l1 * xi1).exp().max(p.beta() * rho / -char_eta);
    let xi2 = -q.ln() / ((eta - 1.0) * l1);

    let sp = SandwichParams {
        c,
        theta,
        rho,
        eta,
        q,
        xi1,
        xi2,
        lambda1: l1,
        lambda2: l2,
        margin,
        wide: xi2 < WIDE_SANDWICH_XI2,
    };
    check_selection(p, &sp)?;
    Ok(sp)
}

/// Re-checks the four selection conditions and the kink ordering by direct evaluation.
pub fn check_selection(p: &ModelParams, sp: &SandwichParams) -> Result<(), SandwichError> {
    let fail = |msg: String| Err(SandwichError::SelectionFailed(msg));
    let c = sp.c;
    let g = susceptible_char(p, c, sp.theta);
    if !(sp.theta > 0.0 && sp.theta < sp.lambda1 && g < 0.0) {
        return fail(format!("theta = {} violates its bounds (g = {g})", sp.theta));
    }
    if !(sp.rho > 1.0 && sp.rho > p.beta() / -g) {
        return fail(format!("rho = {} too small", sp.rho));
    }
    let char_eta = p.char_psi(c, sp.eta * sp.lambda1);
    let eta_cap = (1.0 + sp.theta / sp.lambda1).min(sp.lambda2 / sp.lambda1);
    if !(sp.eta > 1.0 && sp.eta < eta_cap && char_eta < 0.0) {
        return fail(format!("eta = {} violates its bounds", sp.eta));
    }
    let q_floor = ((1.0 - sp.eta) * sp.lambda1 * sp.xi1).exp().max(p.beta() * sp.rho / -char_eta);
    if !(sp.q > q_floor) {
        return fail(format!("q = {} not above {q_floor}", sp.q));
    }
    if !(sp.xi2 < sp.xi1 && sp.xi1 < 0.0) {
        return fail(format!("kinks out of order: xi2 = {}, xi1 = {}", sp.xi2, sp.xi1));
    }
    Ok(())
}

pub fn eval_upper(sp: &SandwichParams, xi: f64) -> (f64, f64) {
    (1.0, (sp.lambda1 * xi).exp())
}

/// `φ̲(ξ)`, zero from `ξ1` on.
pub fn lower_phi(sp: &SandwichParams, xi: f64) -> f64 {
    if xi >= sp.xi1 {
        0.0
    } else {
        (1.0 - sp.rho * (sp.theta * xi).exp()).max(0.0)
    }
}

/// `ψ̲(ξ) / ψ̄(ξ) = max(0, 1 - q e^{(η-1)λ1 ξ})`, zero from `ξ2` on.
pub fn lower_psi_ratio(sp: &SandwichParams, xi: f64) -> f64 {
    if xi >= sp.xi2 {
        0.0
    } else {
        (1.0 - sp.q * ((sp.eta - 1.0) * sp.lambda1 * xi).exp()).max(0.0)
    }
}

pub fn eval_lower(sp: &SandwichParams, xi: f64) -> (f64, f64) {
    (lower_phi(sp, xi), (sp.lambda1 * xi).exp() * lower_psi_ratio(sp, xi))
}

/// Residuals of the four inequalities at `ξ`, in the order
/// `[upper φ, lower φ, upper ψ, lower ψ]`. The ψ residuals are divided by
/// `e^{λ1 ξ}` (sign-preserving) so that they stay O(1) over long ranges.
///
/// Required signs: `≤ 0, ≥ 0, ≤ 0, ≥ 0`.
pub fn residuals(p: &ModelParams, sp: &SandwichParams, xi: f64) -> [f64; 4] {
    let c = sp.c;
    let (mu, beta, loss, d) = (p.mu(), p.beta(), p.mu() + p.gamma(), p.d());
    let l1 = sp.lambda1;
    let psi_bar = (l1 * xi).exp();
    let phi_lo = |x: f64| lower_phi(sp, x);
    let r = |x: f64| lower_psi_ratio(sp, x);

    // Upper φ = 1: derivative and difference vanish.
    let i1 = -beta * psi_bar * r(xi);

    let dphi_lo = if xi < sp.xi1 {
        -sp.rho * sp.theta * (sp.theta * xi).exp()
    } else {
        0.0
    };
    let pl = phi_lo(xi);
    let i2 = -c * dphi_lo + (phi_lo(xi + 1.0) + phi_lo(xi - 1.0) - 2.0 * pl) + mu * (1.0 - pl)
        - beta * pl * psi_bar;

    let (ep, em) = (l1.exp(), (-l1).exp());
    let i3 = -c * l1 + d * (ep + em - 2.0) - loss + beta;

    let k = (sp.eta - 1.0) * l1;
    // (ψ̲)'/ψ̄ at ξ.
    let dpsi_lo = if xi < sp.xi2 {
        l1 - sp.q * sp.eta * l1 * (k * xi).exp()
    } else {
        0.0
    };
    let rc = r(xi);
    let i4 = -c * dpsi_lo + d * (ep * r(xi + 1.0) + em * r(xi - 1.0) - 2.0 * rc) - loss * rc
        + beta * pl * rc;

    [i1, i2, i3, i4]
}

/// Which sign a residual must have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    NonPositive,
    NonNegative,
}

pub const INEQUALITY_SIGNS: [Sign; 4] = [
    Sign::NonPositive,
    Sign::NonNegative,
    Sign::NonPositive,
    Sign::NonNegative,
];

/// Uniform verification grid with kink exclusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    /// Points closer than this to either kink are skipped.
    pub exclusion_radius: f64,
}

impl GridSpec {
    /// `[lo, hi]` with the given step and an exclusion radius of one step.
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        GridSpec {
            lo,
            hi,
            step,
            exclusion_radius: step,
        }
    }

    fn count(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub required_sign: Sign,
    /// Largest residual for `NonPositive`, smallest for `NonNegative`.
    pub worst_residual: f64,
    pub worst_location: f64,
    pub points_checked: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub c: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub wide_sandwich: bool,
    pub grid: GridSpec,
    pub checks: Vec<InequalityCheck>,
    /// Largest `|residual|` of the upper-ψ identity (should be rounding-level).
    pub upper_psi_identity_max_abs: f64,
    pub excluded_points: Vec<f64>,
    pub all_pass: bool,
}

const NAMES: [&str; 4] = ["upper_phi", "lower_phi", "upper_psi", "lower_psi"];

#[derive(Clone, Copy)]
struct Worst {
    value: [f64; 4],
    at: [f64; 4],
    max_abs_i3: f64,
}

impl Worst {
    fn identity() -> Self {
        Worst {
            value: [f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY],
            at: [f64::NAN; 4],
            max_abs_i3: 0.0,
        }
    }

    fn absorb(mut self, res: [f64; 4], xi: f64) -> Self {
        for k in 0..4 {
            let worse = match INEQUALITY_SIGNS[k] {
                Sign::NonPositive => res[k] > self.value[k],
                Sign::NonNegative => res[k] < self.value[k],
            };
            if worse || res[k].is_nan() {
                self.value[k] = res[k];
                self.at[k] = xi;
            }
        }
        self.max_abs_i3 = self.max_abs_i3.max(res[2].abs());
        self
    }

    fn merge(self, other: Worst) -> Self {
        let mut out = self;
        for (k, sign) in INEQUALITY_SIGNS.iter().enumerate() {
            let worse = match sign {
                Sign::NonPositive => other.value[k] > out.value[k],
                Sign::NonNegative => other.value[k] < out.value[k],
            };
            // Ties keep the left-most location so the report is deterministic.
            if worse || (other.value[k] == out.value[k] && other.at[k] < out.at[k]) {
                out.value[k] = other.value[k];
                out.at[k] = other.at[k];
            }
        }
        out.max_abs_i3 = out.max_abs_i3.max(other.max_abs_i3);
        out
    }
}

pub fn verify_inequalities(
    p: &ModelParams,
    sp: &SandwichParams,
    grid: &GridSpec,
) -> Result<InequalityReport, SandwichError> {
    if !(grid.step > 0.0) || !(grid.hi > grid.lo) || !grid.lo.is_finite() || !grid.hi.is_finite() {
        return Err(SandwichError::InvalidGrid(format!(
            "need lo < hi and step > 0 (lo = {}, hi = {}, step = {})",
            grid.lo, grid.hi, grid.step
        )));
    }
    if !(grid.exclusion_radius >= grid.step) {
        return Err(SandwichError::KinkTooClose {
            radius: grid.exclusion_radius,
            step: grid.step,
        });
    }
    let n = grid.count();
    let near_kink =
        |x: f64| (x - sp.xi1).abs() < grid.exclusion_radius || (x - sp.xi2).abs() < grid.exclusion_radius;
    let node = |j: usize| grid.lo + j as f64 * grid.step;

    let worst = (0..n)
        .into_par_iter()
        .filter_map(|j| {
            let x = node(j);
            (!near_kink(x)).then(|| (x, residuals(p, sp, x)))
        })
        .fold(Worst::identity, |w, (x, r)| w.absorb(r, x))
        .reduce(Worst::identity, Worst::merge);
    let excluded_points: Vec<f64> = (0..n).map(node).filter(|&x| near_kink(x)).collect();
    let checked = n - excluded_points.len();

    let checks: Vec<InequalityCheck> = (0..4)
        .map(|k| {
            let v = worst.value[k];
            let pass = match INEQUALITY_SIGNS[k] {
                Sign::NonPositive => v <= SIGN_SLACK,
                Sign::NonNegative => v >= -SIGN_SLACK,
            };
            InequalityCheck {
                name: NAMES[k],
                required_sign: INEQUALITY_SIGNS[k],
                worst_residual: v,
                worst_location: worst.at[k],
                points_checked: checked,
                pass: pass && checked > 0,
            }
        })
        .collect();
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(InequalityReport {
        c: sp.c,
        xi1: sp.xi1,
        xi2: sp.xi2,
        wide_sandwich: sp.wide,
        grid: *grid,
        checks,
        upper_psi_identity_max_abs: worst.max_abs_i3,
        excluded_points,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> (ModelParams, SandwichParams) {
        let p = ModelParams::standard();
        let sp = select_parameters(&p, 3.5, DEFAULT_MARGIN).unwrap();
        (p, sp)
    }

    #[test]
    fn selection_rechecks_and_orders_kinks() {
        let (p, sp) = standard();
        check_selection(&p, &sp).unwrap();
        assert!(sp.xi2 < sp.xi1 && sp.xi1 < 0.0);
        assert!(!sp.wide);
    }

    #[test]
    fn theta_condition_holds_near_zero() {
        let p = ModelParams::standard();
        let g0 = susceptible_char(&p, 3.5, 1e-12);
        assert!((g0 + p.mu()).abs() < 1e-10);
    }

    #[test]
    fn margin_at_most_one_rejected() {
        let p = ModelParams::standard();
        assert!(matches!(
            select_parameters(&p, 3.5, 1.0),
            Err(SandwichError::InvalidMargin(_))
        ));
    }

    #[test]
    fn subcritical_speed_rejected() {
        let p = ModelParams::standard();
        let err = select_parameters(&p, 2.5, DEFAULT_MARGIN).unwrap_err();
        assert!(err.to_string().contains("speed not supercritical"));
    }

    #[test]
    fn upper_values() {
        let (_, sp) = standard();
        assert_eq!(eval_upper(&sp, 0.0), (1.0, 1.0));
        let (phi, psi) = eval_upper(&sp, -5.0);
        assert_eq!(phi, 1.0);
        assert_eq!(psi, (-5.0 * sp.lambda1).exp());
    }

    #[test]
    fn lower_vanishes_at_kinks() {
        let (_, sp) = standard();
        assert_eq!(eval_lower(&sp, sp.xi1).0, 0.0);
        assert_eq!(eval_lower(&sp, sp.xi2).1, 0.0);
        let left = 1.0 - sp.rho * (sp.theta * sp.xi1).exp();
        assert!(left.abs() < 1e-14);
        let left = (sp.lambda1 * sp.xi2).exp() - sp.q * (sp.eta * sp.lambda1 * sp.xi2).exp();
        assert!(left.abs() < 1e-14 * (sp.lambda1 * sp.xi2).exp().max(1e-300) + 1e-300);
    }

    #[test]
    fn lower_strictly_inside_far_left() {
        let (_, sp) = standard();
        let x = 2.0 * sp.xi2;
        let (pl, ql) = eval_lower(&sp, x);
        let (pu, qu) = eval_upper(&sp, x);
        assert!(pl > 0.0 && pl < pu);
        assert!(ql > 0.0 && ql < qu);
    }

    #[test]
    fn upper_phi_residual_vanishes_right_of_xi2() {
        let (p, sp) = standard();
        let r = residuals(&p, &sp, sp.xi2 + 0.5);
        assert_eq!(r[0], 0.0);
    }

    #[test]
    fn verify_standard_passes() {
        let (p, sp) = standard();
        let rep = verify_inequalities(&p, &sp, &GridSpec::new(-40.0, 40.0, 0.01)).unwrap();
        assert!(rep.all_pass, "{rep:?}");
        assert!(rep.upper_psi_identity_max_abs <= 1e-12);
        assert_eq!(rep.checks[0].points_checked + rep.excluded_points.len(), 8001);
    }

    #[test]
    fn kink_exclusion_enforced() {
        let (p, sp) = standard();
        let g = GridSpec {
            lo: -10.0,
            hi: 10.0,
            step: 0.1,
            exclusion_radius: 0.05,
        };
        assert!(matches!(
            verify_inequalities(&p, &sp, &g),
            Err(SandwichError::KinkTooClose { .. })
        ));
    }

    mod props {
        use super::*;
        use crate::model::{minimal_speed, DEFAULT_CSTAR_TOL};
        use proptest::prelude::*;

        fn case() -> impl Strategy<Value = (ModelParams, f64)> {
            (0.1f64..2.0, 0.1f64..2.0, 0.1f64..5.0, 1.1f64..5.0, 1.05f64..3.0).prop_map(|(mu, gamma, d, sigma, f)| {
                let p = ModelParams::new(mu, sigma * (mu + gamma), gamma, d).unwrap();
                let c = f * minimal_speed(&p, DEFAULT_CSTAR_TOL).unwrap().c_star;
                (p, c)
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn sign_suite((p, c) in case()) {
                let sp = select_parameters(&p, c, DEFAULT_MARGIN).unwrap();
                let rep = verify_inequalities(&p, &sp, &GridSpec::new(-50.0, 50.0, 0.01)).unwrap();
                prop_assert!(rep.all_pass, "{:?}", rep.checks);
                prop_assert!(rep.upper_psi_identity_max_abs <= 1e-12);
            }

            #[test]
            fn larger_margin_keeps_pass((p, c) in case(), extra in 1.0f64..2.0) {
                let grid = GridSpec::new(-30.0, 30.0, 0.05);
                let a = select_parameters(&p, c, DEFAULT_MARGIN).unwrap();
                let b = select_parameters(&p, c, DEFAULT_MARGIN * extra).unwrap();
                prop_assert!(b.rho >= a.rho && b.q >= a.q);
                let ra = verify_inequalities(&p, &a, &grid).unwrap();
                let rb = verify_inequalities(&p, &b, &grid).unwrap();
                prop_assert_eq!(ra.all_pass, rb.all_pass);
            }

            #[test]
            fn lower_below_upper_and_continuous((p, c) in case(), x in -60.0f64..60.0) {
                let sp = select_parameters(&p, c, DEFAULT_MARGIN).unwrap();
                let (pl, ql) = eval_lower(&sp, x);
                let (pu, qu) = eval_upper(&sp, x);
                prop_assert!(0.0 <= pl && pl <= pu);
                prop_assert!(0.0 <= ql && ql <= qu);
                let e = 1e-9;
                prop_assert!(lower_phi(&sp, sp.xi1 - e * sp.xi1.abs()).abs() < 1e-7);
                prop_assert!(lower_psi_ratio(&sp, sp.xi2 - e * sp.xi2.abs()).abs() < 1e-7);
            }
        }
    }
}
