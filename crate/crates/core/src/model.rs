//! Model parameters, the endemic equilibrium and the linear dispersion analysis
//! at the disease-free state: minimal wave speed, decay exponents of the
//! infective tail and the characteristic-root certificate ruling out slower
//! waves.
//!
//! The lattice operator enters only through its symbol
//! `e^λ + e^{-λ} - 2 = 4 sinh²(λ/2)`, which is evaluated in the sinh form so
//! that small exponents do not lose digits to cancellation.

use serde::Serialize;
use thiserror::Error;

use crate::error::ErrorKind;
use crate::numeric::{bisect, golden_section_min};

/// Default tolerance for characteristic roots.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
/// Default tolerance for the minimal speed search.
pub const DEFAULT_CSTAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter {name} must be positive (got {value})")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("sigma <= 1: beta = {beta} does not exceed mu + gamma = {threshold} (sigma = {sigma})")]
    SubcriticalTransmission {
        beta: f64,
        threshold: f64,
        sigma: f64,
    },
    #[error("speed not supercritical: c = {c} must exceed c* = {c_star}")]
    SpeedNotSupercritical { c: f64, c_star: f64 },
    #[error("tolerance not reached in {what}: {detail}")]
    ToleranceNotReached { what: &'static str, detail: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl ModelError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            ModelError::ToleranceNotReached { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        }
    }
}

/// `e^x + e^{-x} - 2`, computed without cancellation near zero.
#[inline]
pub fn lattice_symbol(x: f64) -> f64 {
    let s = (0.5 * x).sinh();
    4.0 * s * s
}

/// Epidemic and migration constants of the lattice system. The susceptible
/// migration coefficient is fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    mu: f64,
    beta: f64,
    gamma: f64,
    d: f64,
}

/// Validates raw parameters; see [`ModelParams::new`].
pub fn validate_params(mu: f64, beta: f64, gamma: f64, d: f64) -> Result<ModelParams, ModelError> {
    ModelParams::new(mu, beta, gamma, d)
}

impl ModelParams {
    /// Rejects non-positive (or non-finite) values and `beta <= mu + gamma`.
    pub fn new(mu: f64, beta: f64, gamma: f64, d: f64) -> Result<Self, ModelError> {
        for (name, value) in [("mu", mu), ("beta", beta), ("gamma", gamma), ("d", d)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::NonPositiveParameter { name, value });
            }
        }
        if beta <= mu + gamma {
            return Err(ModelError::SubcriticalTransmission {
                beta,
                threshold: mu + gamma,
                sigma: beta / (mu + gamma),
            });
        }
        Ok(ModelParams { mu, beta, gamma, d })
    }

    /// The reference configuration `mu = gamma = 0.5, beta = 3, d = 1`.
    pub fn standard() -> Self {
        ModelParams {
            mu: 0.5,
            beta: 3.0,
            gamma: 0.5,
            d: 1.0,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Basic reproduction ratio `beta / (mu + gamma)`.
    pub fn sigma(&self) -> f64 {
        self.beta / (self.mu + self.gamma)
    }

    /// Net linear growth rate of infectives at the disease-free state.
    pub fn excess_growth(&self) -> f64 {
        self.beta - self.mu - self.gamma
    }

    /// All four constants multiplied by `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self, ModelError> {
        ModelParams::new(k * self.mu, k * self.beta, k * self.gamma, k * self.d)
    }

    /// Characteristic function of the infective tail,
    /// `d(e^λ + e^{-λ} - 2) - cλ + β - μ - γ`.
    pub fn char_psi(&self, c: f64, lambda: f64) -> f64 {
        self.d * lattice_symbol(lambda) - c * lambda + self.excess_growth()
    }

    /// Dispersion quotient `[d(e^λ + e^{-λ} - 2) + β - μ - γ] / λ` whose
    /// infimum over `λ > 0` is the minimal speed.
    pub fn dispersion_quotient(&self, lambda: f64) -> f64 {
        (self.d * lattice_symbol(lambda) + self.excess_growth()) / lambda
    }

    /// Reaction parts of the two lattice equations at `(s, i)`.
    pub fn reaction_terms(&self, s: f64, i: f64) -> (f64, f64) {
        (
            self.mu - self.mu * s - self.beta * s * i,
            -(self.mu + self.gamma) * i + self.beta * s * i,
        )
    }
}

/// The coexistence equilibrium `(s*, e*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndemicState {
    pub s_star: f64,
    pub e_star: f64,
}

pub fn endemic_state(p: &ModelParams) -> EndemicState {
    let sigma = p.sigma();
    EndemicState {
        s_star: 1.0 / sigma,
        e_star: p.mu / p.beta * (sigma - 1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalSpeed {
    pub c_star: f64,
    pub lambda_star: f64,
}

/// Minimal wave speed and its minimizing exponent.
///
/// The minimizer is bracketed on a geometric ladder `1e-6 * 2^k` until the
/// quotient turns upward, then refined by golden-section search to a relative
/// bracket width of `tol`.
pub fn minimal_speed(p: &ModelParams, tol: f64) -> Result<MinimalSpeed, ModelError> {
    if !(tol > 0.0) {
        return Err(ModelError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let q = |lambda: f64| p.dispersion_quotient(lambda);

    let mut lo = 1e-6;
    // The quotient blows up like (β-μ-γ)/λ at 0; make sure the ladder starts on
    // the descending branch.
    let mut shrink = 0;
    while q(lo) <= q(2.0 * lo) {
        lo *= 0.5;
        shrink += 1;
        if shrink > 200 {
            return Err(ModelError::ToleranceNotReached {
                what: "minimal_speed",
                detail: "quotient not decreasing near zero".into(),
            });
        }
    }
    let mut prev = lo;
    let mut cur = 2.0 * lo;
    let mut q_cur = q(cur);
    let mut found = None;
    for _ in 0..200 {
        let next = 2.0 * cur;
        let q_next = q(next);
        if !q_next.is_finite() {
            break;
        }
        if q_next > q_cur {
            found = Some((prev, next));
            break;
        }
        prev = cur;
        cur = next;
        q_cur = q_next;
    }
    let (a, b) = found.ok_or_else(|| ModelError::ToleranceNotReached {
        what: "minimal_speed",
        detail: "could not bracket the minimizer".into(),
    })?;

    let (lambda_star, c_star) = golden_section_min(q, a, b, tol * a.max(1e-300));
    if !(lambda_star > a && lambda_star < b) || !c_star.is_finite() || c_star <= 0.0 {
        return Err(ModelError::ToleranceNotReached {
            what: "minimal_speed",
            detail: format!("minimizer {lambda_star} escaped bracket [{a}, {b}]"),
        });
    }
    Ok(MinimalSpeed { c_star, lambda_star })
}

/// The two positive roots `λ1 < λ2` of the characteristic equation at speed `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaRoots {
    pub c: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Roots of the characteristic equation for `c > c*`.
///
/// Each root is returned as the bisection endpoint lying inside `(λ1, λ2)`, so
/// `char_psi` is non-positive there (it is used as the exponent of an upper
/// solution).
pub fn lambda_roots(p: &ModelParams, c: f64, tol: f64) -> Result<LambdaRoots, ModelError> {
    let ms = minimal_speed(p, DEFAULT_CSTAR_TOL)?;
    lambda_roots_with(p, c, tol, &ms)
}

/// As [`lambda_roots`], reusing an already computed minimal speed.
pub fn lambda_roots_with(
    p: &ModelParams,
    c: f64,
    tol: f64,
    ms: &MinimalSpeed,
) -> Result<LambdaRoots, ModelError> {
    if !(tol > 0.0) {
        return Err(ModelError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if !(c > ms.c_star + tol) {
        return Err(ModelError::SpeedNotSupercritical { c, c_star: ms.c_star });
    }
    let f = |lambda: f64| p.char_psi(c, lambda);
    let ls = ms.lambda_star;
    if f(ls) >= 0.0 {
        return Err(ModelError::SpeedNotSupercritical { c, c_star: ms.c_star });
    }

    let (_, lambda1) = bisect(f, 0.0, ls, 0.0).ok_or_else(|| ModelError::ToleranceNotReached {
        what: "lambda_roots",
        detail: "no sign change on (0, lambda*)".into(),
    })?;

    let mut upper = 2.0 * ls.max(1e-3);
    let mut grow = 0;
    while f(upper) <= 0.0 {
        upper *= 2.0;
        grow += 1;
        if grow > 100 {
            return Err(ModelError::ToleranceNotReached {
                what: "lambda_roots",
                detail: "upper bracket for lambda2 did not close".into(),
            });
        }
    }
    let (lambda2, _) = bisect(f, ls, upper, 0.0).ok_or_else(|| ModelError::ToleranceNotReached {
        what: "lambda_roots",
        detail: "no sign change above lambda*".into(),
    })?;

    let bound = tol * (1.0 + c.abs());
    for lambda in [lambda1, lambda2] {
        if f(lambda).abs() > bound {
            return Err(ModelError::ToleranceNotReached {
                what: "lambda_roots",
                detail: format!("residual {} at lambda = {lambda}", f(lambda)),
            });
        }
    }
    Ok(LambdaRoots { c, lambda1, lambda2 })
}

/// Roots `ω- < 0 < ω+` of `d(e^ω + e^{-ω} - 2) = cω + μ + γ`, the growth
/// exponents available to the infective component where susceptibles vanish.
pub fn omega_roots(p: &ModelParams, c: f64, tol: f64) -> Result<(f64, f64), ModelError> {
    if !(c > 0.0) {
        return Err(ModelError::InvalidArgument(format!("speed must be positive, got {c}")));
    }
    let loss = p.mu + p.gamma;
    let g = |w: f64| p.d * lattice_symbol(w) - c * w - loss;
    let mut hi = 1.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = -1.0;
    while g(lo) <= 0.0 {
        lo *= 2.0;
    }
    let root = |a: f64, b: f64| {
        bisect(g, a, b, 0.0)
            .map(|(x, y)| if g(x).abs() <= g(y).abs() { x } else { y })
            .ok_or_else(|| ModelError::ToleranceNotReached {
                what: "omega_roots",
                detail: "no sign change".into(),
            })
    };
    let minus = root(lo, 0.0)?;
    let plus = root(0.0, hi)?;
    for w in [minus, plus] {
        if g(w).abs() > tol * (1.0 + c + loss) {
            return Err(ModelError::ToleranceNotReached {
                what: "omega_roots",
                detail: format!("residual {} at omega = {w}", g(w)),
            });
        }
    }
    Ok((minus, plus))
}

/// Everything the dispersion analysis knows about a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dispersion {
    pub sigma: f64,
    pub s_star: f64,
    pub e_star: f64,
    pub c_star: f64,
    pub lambda_star: f64,
    /// Present when a supercritical speed was supplied.
    pub roots: Option<LambdaRoots>,
}

pub fn dispersion(p: &ModelParams, speed: Option<f64>) -> Result<Dispersion, ModelError> {
    let ms = minimal_speed(p, DEFAULT_CSTAR_TOL)?;
    let eq = endemic_state(p);
    let roots = match speed {
        Some(c) => Some(lambda_roots_with(p, c, DEFAULT_ROOT_TOL, &ms)?),
        None => None,
    };
    Ok(Dispersion {
        sigma: p.sigma(),
        s_star: eq.s_star,
        e_star: eq.e_star,
        c_star: ms.c_star,
        lambda_star: ms.lambda_star,
        roots,
    })
}

/// Outcome of the characteristic-root scan at speed `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonexistenceCertificate {
    pub c: f64,
    pub c_star: f64,
    /// Minimum of the characteristic function over `(0, Λ]`.
    pub min_char_value: f64,
    pub argmin_lambda: f64,
    pub scan_cap: f64,
    /// True when the characteristic function has no positive root and `c < c*`.
    pub certified: bool,
}

/// Scans the characteristic function on `(0, Λ]` with
/// `Λ = max(10, 3(c + β)/d)`; a strictly positive minimum means no positive
/// decay exponent exists at speed `c`, hence no wave.
pub fn certify_nonexistence(p: &ModelParams, c: f64) -> Result<NonexistenceCertificate, ModelError> {
    let ms = minimal_speed(p, DEFAULT_CSTAR_TOL)?;
    Ok(certify_with(p, c, &ms))
}

pub(crate) fn certify_with(p: &ModelParams, c: f64, ms: &MinimalSpeed) -> NonexistenceCertificate {
    let cap = 10f64.max(3.0 * (c + p.beta) / p.d);
    // The characteristic function is convex in λ.
    let f = |lambda: f64| p.char_psi(c, lambda);
    let (mut arg, mut min) = golden_section_min(f, 0.0, cap, 1e-12 * cap);
    let tiny = 1e-12 * cap;
    if f(tiny) < min {
        arg = tiny;
        min = f(tiny);
    }
    if f(cap) < min {
        arg = cap;
        min = f(cap);
    }
    NonexistenceCertificate {
        c,
        c_star: ms.c_star,
        min_char_value: min,
        argmin_lambda: arg,
        scan_cap: cap,
        certified: min > 0.0 && c < ms.c_star,
    }
}
