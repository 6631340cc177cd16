use num_complex::Complex64;
use rydwave::hydrogenic::RadialFunction;
use rydwave::numerics::quad::{integrate, sqrt_spaced_breakpoints, AdaptiveOptions};
use rydwave::squeezed::RadialSqueezedState;

pub fn quad(f: impl Fn(f64) -> f64, r_max: f64) -> f64 {
    let opts = AdaptiveOptions {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_panels: 50000,
    };
    integrate(f, &sqrt_spaced_breakpoints(r_max, 64), &opts)
        .unwrap()
        .value
}

/// `[norm, <r>, <r^2>, <1/r>, <1/r^2>, <p_r>, <p_r^2>]` straight from the
/// definition of psi, with `p_r psi = -i (psi' + psi / r)` and
/// `psi' = psi (alpha / r - g0 - i g1)`.
pub fn quadrature_moments(s: &RadialSqueezedState) -> [f64; 7] {
    let r_max = s.extent();
    let dens = |r: f64| s.value(r).norm_sqr() * r * r;
    let p_psi = |r: f64| {
        let psi = s.value(r);
        let dpsi = psi * Complex64::new(s.alpha / r - s.gamma0, -s.gamma1);
        Complex64::new(0.0, -1.0) * (dpsi + psi / r)
    };
    [
        quad(dens, r_max),
        quad(|r| dens(r) * r, r_max),
        quad(|r| dens(r) * r * r, r_max),
        quad(|r| dens(r) / r, r_max),
        quad(|r| dens(r) / (r * r), r_max),
        quad(|r| (s.value(r).conj() * p_psi(r)).re * r * r, r_max),
        quad(|r| p_psi(r).norm_sqr() * r * r, r_max),
    ]
}

/// Largest relative deviation of the closed-form moments from quadrature,
/// the quadrature uncertainty product and the quadrature norm.
pub fn moment_check(s: &RadialSqueezedState) -> (f64, f64, f64) {
    let m = s.moments().unwrap();
    let q = quadrature_moments(s);
    let pairs = [
        (1.0, q[0], 1.0),
        (m.r, q[1], m.r),
        (m.r2, q[2], m.r2),
        (m.inv_r, q[3], m.inv_r),
        (m.inv_r2, q[4], m.inv_r2),
        // <p_r> vanishes for real states; measure it against gamma0.
        (m.p, q[5], m.p.abs().max(s.gamma0)),
        (m.p2, q[6], m.p2),
    ];
    let worst = pairs
        .iter()
        .map(|(a, b, sc)| (a - b).abs() / sc)
        .fold(0.0, f64::max);
    let dr = (q[2] - q[1] * q[1]).sqrt();
    let dp = (q[6] - q[5] * q[5]).sqrt();
    (worst, dr * dp, q[0])
}
