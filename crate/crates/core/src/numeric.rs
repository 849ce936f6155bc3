//! Scalar root finding, bracketed minimization and small fitting helpers.

/// Inverse golden ratio, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Bisection on `[lo, hi]` for a function with a sign change.
///
/// Iterates until the bracket can no longer be split in floating point or its
/// width drops below `xtol`. Returns the final bracket `(a, b)` with
/// `sign(f(a)) == sign(f(lo))` and `sign(f(b)) == sign(f(hi))`, or `None` if the
/// endpoints do not straddle a root.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64) -> Option<(f64, f64)> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some((a, a));
    }
    if fb == 0.0 {
        return Some((b, b));
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let a_positive = fa > 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if mid <= a.min(b) || mid >= a.max(b) || (b - a).abs() <= xtol {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some((mid, mid));
        }
        if (fm > 0.0) == a_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some((a, b))
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)` once the bracket is narrower than `xtol`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 0usize;
    while (b - a).abs() > xtol && evals < 10_000 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero when the fit is exact or has two points).
    pub slope_stderr: f64,
}

/// Least-squares fit; `None` with fewer than two points or degenerate abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let sse: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
    })
}
