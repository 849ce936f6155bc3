use serde::Serialize;

use super::grid::{Grid, Profile};
use super::ProfileError;
use crate::model::ModelParams;
use crate::sandwich::{eval_lower, SandwichParams};

/// The wave system posed on `[-l, l]` with the upper solution imposed on the
/// left and constant continuation on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedProblem {
    pub params: ModelParams,
    pub c: f64,
    pub sp: SandwichParams,
    pub grid: Grid,
    /// Weight constant of the integral operator, above
    /// `max{2 + μ + β e^{λ1 l}, 2d + μ + γ}`.
    pub alpha: f64,
}

pub fn alpha_floor(p: &ModelParams, lambda1: f64, l: f64) -> f64 {
    (2.0 + p.mu() + p.beta() * (lambda1 * l).exp()).max(2.0 * p.d() + p.mu() + p.gamma())
}

pub fn build_problem(
    p: &ModelParams,
    c: f64,
    sp: &SandwichParams,
    l: f64,
    m: usize,
    alpha_margin: f64,
) -> Result<TruncatedProblem, ProfileError> {
    if !(alpha_margin > 1.0) || !alpha_margin.is_finite() {
        return Err(ProfileError::BadAlphaMargin(alpha_margin));
    }
    if c != sp.c {
        return Err(ProfileError::BadGrid(format!(
            "sandwich was built for c = {}, problem asks for c = {c}",
            sp.c
        )));
    }
    if !(l > -sp.xi2) {
        return Err(ProfileError::TruncationTooSmall { l, min: -sp.xi2 });
    }
    let grid = Grid::new(l, m)?;
    let alpha = alpha_margin * alpha_floor(p, sp.lambda1, l);
    if !alpha.is_finite() {
        return Err(ProfileError::BadGrid(format!("weight constant overflows for l = {l}")));
    }
    Ok(TruncatedProblem {
        params: *p,
        c,
        sp: *sp,
        grid,
        alpha,
    })
}

impl TruncatedProblem {
    /// Lower solution restricted to the grid.
    pub fn lower_profile(&self) -> Profile {
        let sp = self.sp;
        Profile::from_fn(
            self.grid,
            sp.lambda1,
            |x| eval_lower(&sp, x).0,
            |x| eval_lower(&sp, x).1,
        )
    }

    /// Upper solution restricted to the grid.
    pub fn upper_profile(&self) -> Profile {
        let l1 = self.sp.lambda1;
        Profile::from_fn(self.grid, l1, |_| 1.0, |x| (l1 * x).exp())
    }
}

/// Weights of exact product integration of `c u' + a u = f` over one cell
/// with `f` linear: `u1 = E u0 + (h/c)(A f0 + B f1)`, `κ = a h / c`.
/// All three are positive for every `κ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CellWeights {
    pub e: f64,
    pub a: f64,
    pub b: f64,
}

impl CellWeights {
    pub fn new(kappa: f64) -> Self {
        if kappa < 0.5 {
            // Series avoids cancellation in 1 - (1 + κ)e^{-κ}.
            let (mut a, mut b, mut t) = (0.0, 0.0, 1.0);
            let mut n = 0.0;
            loop {
                a += t / (n + 2.0);
                b += t / ((n + 1.0) * (n + 2.0));
                n += 1.0;
                t *= -kappa / n;
                if t.abs() < 1e-18 {
                    break;
                }
            }
            return CellWeights {
                e: (-kappa).exp(),
                a,
                b,
            };
        }
        let e = (-kappa).exp();
        let k2 = kappa * kappa;
        CellWeights {
            e,
            a: (1.0 - (1.0 + kappa) * e) / k2,
            b: (kappa - 1.0 + e) / k2,
        }
    }
}

/// March `c u' + a u = f` from `u(ξ_0) = u0` across the grid. `kappa(j)` is the
/// coefficient of cell `[ξ_j, ξ_{j+1}]` scaled by `h/c`.
pub(crate) fn march(
    f: &[f64],
    u0: f64,
    h_over_c: f64,
    mut weights: impl FnMut(usize) -> CellWeights,
    out: &mut [f64],
) {
    out[0] = u0;
    for j in 0..f.len() - 1 {
        let w = weights(j);
        out[j + 1] = w.e * out[j] + h_over_c * (w.a * f[j] + w.b * f[j + 1]);
    }
}

/// `H1 = αφ + D[φ] + μ(1-φ) - βφψ`, `H2 = αψ + dD[ψ] - (μ+γ)ψ + βφψ` at every node.
pub fn apply_h(problem: &TruncatedProblem, prof: &Profile) -> (Vec<f64>, Vec<f64>) {
    let p = &problem.params;
    let alpha = problem.alpha;
    let m = problem.grid.m as isize;
    let n = prof.len();
    let mut h1 = Vec::with_capacity(n);
    let mut h2 = Vec::with_capacity(n);
    for j in 0..n {
        let k = j as isize;
        let (phi, psi) = (prof.phi[j], prof.psi[j]);
        let dphi = prof.phi_at(k + m) + prof.phi_at(k - m) - 2.0 * phi;
        let dpsi = prof.psi_at(k + m) + prof.psi_at(k - m) - 2.0 * psi;
        h1.push(alpha * phi + dphi + p.mu() * (1.0 - phi) - p.beta() * phi * psi);
        h2.push(alpha * psi + p.d() * dpsi - (p.mu() + p.gamma()) * psi + p.beta() * phi * psi);
    }
    (h1, h2)
}

/// The integral operator `F = (F1, F2)`:
/// `F_i(ξ) = e^{α(-l-ξ)/c} B_i + (1/c) ∫_{-l}^{ξ} e^{α(z-ξ)/c} H_i(z) dz`
/// with `B = (1, e^{-λ1 l})`. The integral is accumulated cell by cell with
/// the kernel integrated exactly against the piecewise-linear interpolant of
/// `H`, which stays consistent however large `αh/c` is.
///
/// Fails with `SandwichViolation` if the image leaves the sandwich by more
/// than `10 h²` relative to the local bound.
pub fn apply_f(problem: &TruncatedProblem, prof: &Profile) -> Result<Profile, ProfileError> {
    let (h1, h2) = apply_h(problem, prof);
    let g = problem.grid;
    let n = g.len();
    let c = problem.c;
    let h = g.h();
    let w = CellWeights::new(problem.alpha * h / c);
    let l1 = problem.sp.lambda1;
    let mut f1 = vec![0.0; n];
    let mut f2 = vec![0.0; n];
    march(&h1, 1.0, h / c, |_| w, &mut f1);
    march(&h2, (-l1 * g.l).exp(), h / c, |_| w, &mut f2);

    let tol = 10.0 * h * h;
    for j in 0..n {
        let x = g.node(j as isize);
        let (pl, ql) = eval_lower(&problem.sp, x);
        let qu = (l1 * x).exp();
        let phi_out = f1[j] > 1.0 + tol || f1[j] < pl - tol;
        let psi_out = f2[j] > qu * (1.0 + tol) || f2[j] < ql - tol * qu;
        if phi_out || psi_out || !f1[j].is_finite() || !f2[j].is_finite() {
            return Err(ProfileError::SandwichViolation {
                xi: x,
                phi: f1[j],
                psi: f2[j],
            });
        }
    }
    Profile::new(g, l1, f1, f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sandwich::{select_parameters, DEFAULT_MARGIN};

    fn problem(l: f64, m: usize) -> TruncatedProblem {
        let p = ModelParams::standard();
        let sp = select_parameters(&p, 3.5, DEFAULT_MARGIN).unwrap();
        build_problem(&p, 3.5, &sp, l, m, 1.01).unwrap()
    }

    #[test]
    fn alpha_exceeds_both_bounds() {
        let pr = problem(40.0, 20);
        let p = pr.params;
        assert!(pr.alpha > 2.0 * p.d() + p.mu() + p.gamma());
        assert!(pr.alpha > 2.0 + p.mu() + p.beta() * (pr.sp.lambda1 * 40.0).exp());
    }

    #[test]
    fn short_truncation_and_unit_margin_rejected() {
        let p = ModelParams::standard();
        let sp = select_parameters(&p, 3.5, DEFAULT_MARGIN).unwrap();
        let half = (-sp.xi2 / 2.0).round();
        assert!(matches!(
            build_problem(&p, 3.5, &sp, half, 20, 1.01),
            Err(ProfileError::TruncationTooSmall { .. })
        ));
        assert!(matches!(
            build_problem(&p, 3.5, &sp, 40.0, 20, 1.0),
            Err(ProfileError::BadAlphaMargin(_))
        ));
    }

    #[test]
    fn weights_match_closed_form_across_switch() {
        for k in [0.499_999, 0.5] {
            let s = CellWeights::new(k);
            let e = (-k).exp();
            let a = (1.0 - (1.0 + k) * e) / (k * k);
            let b = (k - 1.0 + e) / (k * k);
            assert!((s.a - a).abs() < 1e-12 && (s.b - b).abs() < 1e-12);
        }
        let z = CellWeights::new(0.0);
        assert_eq!((z.e, z.a, z.b), (1.0, 0.5, 0.5));
    }

    #[test]
    fn march_is_exact_for_constant_forcing() {
        // c u' + a u = a has solution u ≡ 1.
        let f = vec![2.5; 50];
        let mut out = vec![0.0; 50];
        let w = CellWeights::new(2.5 * 0.1 / 3.0);
        march(&f, 1.0, 0.1 / 3.0, |_| w, &mut out);
        assert!(out.iter().all(|u| (u - 1.0).abs() < 1e-14));
    }

    #[test]
    fn h_of_disease_free_state() {
        let pr = problem(20.0, 4);
        let prof = Profile::from_fn(pr.grid, pr.sp.lambda1, |_| 1.0, |_| 0.0);
        let (h1, h2) = apply_h(&pr, &prof);
        assert!(h1.iter().all(|&v| v == pr.alpha));
        // Reads left of -l see the upper solution, so only check away from it.
        assert!(h2[pr.grid.m..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn h_of_endemic_state() {
        let pr = problem(20.0, 4);
        let s = 1.0 / 3.0;
        let prof = Profile::from_fn(pr.grid, pr.sp.lambda1, |_| s, |_| s);
        let (h1, h2) = apply_h(&pr, &prof);
        let m = pr.grid.m;
        for j in m..h1.len() {
            assert!((h1[j] - pr.alpha * s).abs() <= 1e-15 * pr.alpha);
            assert!((h2[j] - pr.alpha * s).abs() <= 1e-15 * pr.alpha);
        }
    }

    #[test]
    fn h_monotone_in_psi() {
        let pr = problem(20.0, 4);
        let lo = pr.lower_profile();
        let mut hi = lo.clone();
        for v in hi.psi.iter_mut() {
            *v *= 1.5;
        }
        let (a1, a2) = apply_h(&pr, &lo);
        let (b1, b2) = apply_h(&pr, &hi);
        for j in 0..a1.len() {
            assert!(b1[j] <= a1[j]);
            assert!(b2[j] >= a2[j]);
        }
    }

    #[test]
    fn f_boundary_value_and_mapping() {
        let pr = problem(40.0, 20);
        let up = pr.upper_profile();
        let lo = pr.lower_profile();
        let mixed = Profile::new(pr.grid, pr.sp.lambda1, up.phi.clone(), lo.psi.clone()).unwrap();
        let out = apply_f(&pr, &mixed).unwrap();
        assert_eq!(out.phi[0], 1.0);
        assert_eq!(out.psi[0], (-pr.sp.lambda1 * 40.0).exp());
    }
}
