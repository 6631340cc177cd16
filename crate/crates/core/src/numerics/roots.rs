//! Bracketed scalar root finding.

use crate::{Error, Result};

/// Scans `n_points` log-spaced points on `[lo, hi]` and returns the first
/// subinterval on which `f` changes sign.
pub fn scan_log_bracket<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    n_points: usize,
) -> Result<(f64, f64)> {
    if !(lo > 0.0 && hi > lo) || n_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "invalid log bracket [{lo}, {hi}] with {n_points} points"
        )));
    }
    let ratio = (hi / lo).ln();
    let at = |i: usize| {
        if i + 1 == n_points {
            hi
        } else {
            lo * (ratio * i as f64 / (n_points - 1) as f64).exp()
        }
    };
    let mut x0 = at(0);
    let mut f0 = f(x0);
    for i in 1..n_points {
        let x1 = at(i);
        let f1 = f(x1);
        if f0 == 0.0 {
            return Ok((x0, x0));
        }
        if f0.signum() != f1.signum() || f1 == 0.0 {
            return Ok((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    Err(Error::NoSignChange { lo, hi })
}

/// Finds a root of `f` in `[a, b]`, where `f(a)` and `f(b)` differ in sign.
///
/// Secant steps are taken while they land inside the current bracket and
/// shrink it by at least half every two steps; otherwise the interval is
/// bisected. Stops when the bracket is narrower than
/// `x_tol * max(1, |x|)` or an exact zero is hit.
pub fn bisect_secant<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    let mut last_width = hi - lo;
    for iter in 0..max_iter {
        let width = hi - lo;
        let mid = 0.5 * (lo + hi);
        if width <= x_tol * mid.abs().max(1.0) {
            return Ok(mid);
        }
        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let use_secant = secant.is_finite()
            && secant > lo
            && secant < hi
            && (iter % 2 == 0 || width <= 0.5 * last_width);
        let x = if use_secant { secant } else { mid };
        if iter % 2 == 1 {
            last_width = width;
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        if !(hi > lo) {
            return Ok(x);
        }
    }
    Err(Error::RootNotConverged {
        iterations: max_iter,
        last_x: 0.5 * (lo + hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let f = |x: f64| x * x - 2.0;
        let r = bisect_secant(&f, 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn tolerates_reversed_bracket_and_flat_functions() {
        let f = |x: f64| (x - 1.0).powi(3);
        let r = bisect_secant(&f, 3.0, -2.0, 1e-14, 500).unwrap();
        assert!((r - 1.0).abs() < 1e-4);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        let f = |x: f64| x * x + 1.0;
        assert!(matches!(
            bisect_secant(&f, -1.0, 1.0, 1e-12, 100),
            Err(Error::NoSignChange { .. })
        ));
        assert!(matches!(
            scan_log_bracket(&f, 0.1, 10.0, 32),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn scan_finds_first_crossing() {
        let f = |x: f64| x.ln() - 1.0;
        let (a, b) = scan_log_bracket(&f, 0.5, 100.0, 40).unwrap();
        assert!(a <= std::f64::consts::E && std::f64::consts::E <= b);
    }
}
