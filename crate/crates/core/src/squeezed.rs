//! Radial squeezed states `psi(r) = N r^alpha exp(-gamma0 r) exp(-i gamma1 r)`.
//!
//! `N^2 = (2 gamma0)^(2 alpha + 3) / Gamma(2 alpha + 3)` normalises
//! `integral |psi|^2 r^2 dr` to one. The radial momentum is the symmetric
//! operator `p_r = -i (d/dr + 1/r)`. Every moment is a ratio of Gamma
//! functions:
//!
//! | moment      | closed form                                  |
//! |-------------|----------------------------------------------|
//! | `<r>`       | `(2a+3) / (2 g0)`                            |
//! | `<r^2>`     | `(2a+4)(2a+3) / (2 g0)^2`                    |
//! | `<1/r>`     | `2 g0 / (2a+2)`                              |
//! | `<1/r^2>`   | `(2 g0)^2 / ((2a+2)(2a+1))`                  |
//! | `<p_r>`     | `-g1`                                        |
//! | `<p_r^2>`   | `g1^2 + g0^2 / (2a+1)`                       |
//!
//! so `dr dp_r = (1/2) sqrt((2a+3)/(2a+1))` regardless of `g1`.
//!
//! Time zero is the packet's pass through the outer apsidal point.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::format::float;
use crate::hydrogenic::{
    overlap, QuadratureRule, RadialEigenstate, RadialFunction, TabulatedBasis,
};
use crate::numerics::ln_gamma;
use crate::numerics::phase::unit_phasor;
use crate::numerics::roots::{bisect_secant, scan_log_bracket};
use crate::spectrum::EnergyModel;
use crate::units::{au_to_ns, TimeAu};
use crate::{Error, Result};

/// Angular momentum of the radial packets.
pub const RADIAL_L: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSqueezedState {
    pub alpha: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    log_norm_sq: f64,
}

/// Expectation values of a squeezed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub r: f64,
    pub r2: f64,
    pub inv_r: f64,
    pub inv_r2: f64,
    pub p: f64,
    pub p2: f64,
}

impl Moments {
    pub fn delta_r(&self) -> f64 {
        (self.r2 - self.r * self.r).max(0.0).sqrt()
    }

    pub fn delta_p(&self) -> f64 {
        (self.p2 - self.p * self.p).max(0.0).sqrt()
    }

    pub fn uncertainty_product(&self) -> f64 {
        self.delta_r() * self.delta_p()
    }

    /// `<H> = <p_r^2>/2 + l(l+1)/2 <1/r^2> - <1/r>`.
    pub fn energy(&self, l: u32) -> f64 {
        let ll = f64::from(l * (l + 1));
        0.5 * self.p2 + 0.5 * ll * self.inv_r2 - self.inv_r
    }
}

impl RadialSqueezedState {
    pub fn new(alpha: f64, gamma0: f64, gamma1: f64) -> Result<RadialSqueezedState> {
        if !(alpha.is_finite() && alpha > -0.5) {
            return Err(Error::InvalidParameter(format!(
                "alpha must exceed -1/2, got {alpha}"
            )));
        }
        if !(gamma0.is_finite() && gamma0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma0 must be positive, got {gamma0}"
            )));
        }
        if !gamma1.is_finite() {
            return Err(Error::InvalidParameter("gamma1 must be finite".into()));
        }
        let k = 2.0 * alpha + 3.0;
        Ok(RadialSqueezedState {
            alpha,
            gamma0,
            gamma1,
            log_norm_sq: k * (2.0 * gamma0).ln() - ln_gamma(k),
        })
    }

    /// `ln N^2`; `N^2` itself underflows for the large `alpha` of Rydberg
    /// packets.
    pub fn log_norm_squared(&self) -> f64 {
        self.log_norm_sq
    }

    pub fn norm_squared(&self) -> f64 {
        self.log_norm_sq.exp()
    }

    pub fn value(&self, r: f64) -> Complex64 {
        if r <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let modulus = (0.5 * self.log_norm_sq + self.alpha * r.ln() - self.gamma0 * r).exp();
        Complex64::from_polar(modulus, -self.gamma1 * r)
    }

    /// Closed-form moments. `<p_r^2>` is only accepted for `alpha > 1/2`.
    pub fn moments(&self) -> Result<Moments> {
        if self.alpha <= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "<p_r^2> requires alpha > 1/2, got {}",
                self.alpha
            )));
        }
        let a = self.alpha;
        let g2 = 2.0 * self.gamma0;
        Ok(Moments {
            r: (2.0 * a + 3.0) / g2,
            r2: (2.0 * a + 4.0) * (2.0 * a + 3.0) / (g2 * g2),
            inv_r: g2 / (2.0 * a + 2.0),
            inv_r2: g2 * g2 / ((2.0 * a + 2.0) * (2.0 * a + 1.0)),
            p: -self.gamma1,
            p2: self.gamma1 * self.gamma1 + self.gamma0 * self.gamma0 / (2.0 * a + 1.0),
        })
    }

    /// `(1/2) sqrt((2 alpha + 3) / (2 alpha + 1))`.
    pub fn uncertainty_product(&self) -> f64 {
        0.5 * ((2.0 * self.alpha + 3.0) / (2.0 * self.alpha + 1.0)).sqrt()
    }
}

impl RadialFunction for RadialSqueezedState {
    fn value(&self, r: f64) -> Complex64 {
        RadialSqueezedState::value(self, r)
    }

    /// `|psi|^2 r^2` is a Gamma density with shape `k = 2 alpha + 3` and rate
    /// `2 gamma0`; its tail past `k + 12 sqrt(k) + 40` is negligible.
    fn extent(&self) -> f64 {
        let k = 2.0 * self.alpha + 3.0;
        (k + 12.0 * k.sqrt() + 40.0) / (2.0 * self.gamma0)
    }
}

/// Outer classical turning point of a Kepler orbit with principal quantum
/// number `n_bar` and angular momentum `l`.
pub fn outer_apsidal_radius(n_bar: f64, l: u32) -> Result<f64> {
    let ll = f64::from(l * (l + 1));
    let disc = 1.0 - ll / (n_bar * n_bar);
    if !(disc >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "no bound orbit with l = {l} at n = {n_bar}"
        )));
    }
    Ok(n_bar * n_bar * (1.0 + disc.sqrt()))
}

/// Targets for `<p_r> = 0`, `<r> = r_out`, `<H> = E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedFitConditions {
    pub n_bar: f64,
    pub l: u32,
    pub r_out: f64,
    pub e_target: f64,
}

impl SqueezedFitConditions {
    /// Conditions at the outer apsidal point of level `n_bar` (`l = 1`).
    pub fn for_level(n_bar: u32) -> Result<SqueezedFitConditions> {
        if n_bar < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_bar must be at least 2, got {n_bar}"
            )));
        }
        let nb = f64::from(n_bar);
        Ok(SqueezedFitConditions {
            n_bar: nb,
            l: RADIAL_L,
            r_out: outer_apsidal_radius(nb, RADIAL_L)?,
            e_target: -0.5 / (nb * nb),
        })
    }

    /// Arbitrary targets; `n_bar` is taken from the energy.
    pub fn with_targets(r_out: f64, e_target: f64) -> Result<SqueezedFitConditions> {
        if !(r_out > 0.0 && e_target < 0.0) {
            return Err(Error::InvalidParameter(
                "need r_out > 0 and a bound (negative) target energy".into(),
            ));
        }
        Ok(SqueezedFitConditions {
            n_bar: (-0.5 / e_target).sqrt(),
            l: RADIAL_L,
            r_out,
            e_target,
        })
    }
}

/// Residuals of the three fit conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResiduals {
    /// `|<p_r>|`
    pub momentum: f64,
    /// `|<r> - r_out| / r_out`
    pub radius: f64,
    /// `|<H> - E| / |E|`
    pub energy: f64,
}

impl FitResiduals {
    pub fn max(&self) -> f64 {
        self.momentum.max(self.radius).max(self.energy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedFit {
    pub state: RadialSqueezedState,
    pub residuals: FitResiduals,
    /// The sign-change bracket the root was polished in.
    pub bracket: (f64, f64),
}

pub const DEFAULT_FIT_TOL: f64 = 1e-10;

fn state_for_alpha(alpha: f64, r_out: f64) -> Result<RadialSqueezedState> {
    // <r> = (2a + 3) / (2 g0) = r_out
    RadialSqueezedState::new(alpha, (2.0 * alpha + 3.0) / (2.0 * r_out), 0.0)
}

pub fn residuals(
    state: &RadialSqueezedState,
    cond: &SqueezedFitConditions,
) -> Result<FitResiduals> {
    let m = state.moments()?;
    Ok(FitResiduals {
        momentum: m.p.abs(),
        radius: (m.r - cond.r_out).abs() / cond.r_out,
        energy: (m.energy(cond.l) - cond.e_target).abs() / cond.e_target.abs(),
    })
}

/// Solves for `(alpha, gamma0, gamma1)`.
///
/// `<p_r> = -gamma1` forces `gamma1 = 0` and `<r> = r_out` fixes `gamma0`
/// as a function of `alpha`; the energy condition is then a scalar equation
/// in `alpha`, bracketed by scanning `[0.6, 4 n_bar]` on a log grid.
pub fn solve_parameters(cond: &SqueezedFitConditions, tol: f64) -> Result<SqueezedFit> {
    if cond.l != RADIAL_L {
        return Err(Error::InvalidParameter(format!(
            "squeezed states are built for l = {RADIAL_L}, got {}",
            cond.l
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(
            "fit tolerance must be positive".into(),
        ));
    }
    let f = |alpha: f64| match state_for_alpha(alpha, cond.r_out).and_then(|s| s.moments()) {
        Ok(m) => m.energy(cond.l) - cond.e_target,
        Err(_) => f64::NAN,
    };
    let lo = 0.6;
    let hi = 4.0 * cond.n_bar.max(2.0);
    let bracket = scan_log_bracket(&f, lo, hi, 96)?;
    let alpha = if bracket.0 == bracket.1 {
        bracket.0
    } else {
        bisect_secant(&f, bracket.0, bracket.1, 1e-15, 400)?
    };
    let state = state_for_alpha(alpha, cond.r_out)?;
    let res = residuals(&state, cond)?;
    for (what, value) in [
        ("<p_r> = 0", res.momentum),
        ("<r> = r_out", res.radius),
        ("<H> = E", res.energy),
    ] {
        if !(value < tol) {
            return Err(Error::ResidualTooLarge {
                what,
                residual: value,
                tol,
            });
        }
    }
    Ok(SqueezedFit {
        state,
        residuals: res,
        bracket,
    })
}

/// Coefficients `c_n = <R_{n,1}|psi>` over a range of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub coefficients: Vec<(u32, Complex64)>,
    /// `sum |c_n|^2`.
    pub captured: f64,
}

impl Expansion {
    pub fn dominant_level(&self) -> Option<u32> {
        self.coefficients
            .iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|c| c.0)
    }
}

/// Default expansion range `n_bar +/- 12`.
pub fn default_levels(n_bar: u32) -> RangeInclusive<u32> {
    n_bar.saturating_sub(12).max(RADIAL_L + 1)..=n_bar + 12
}

pub fn expand_in_eigenbasis(
    state: &RadialSqueezedState,
    levels: RangeInclusive<u32>,
    rule: &QuadratureRule,
) -> Result<Expansion> {
    if levels.is_empty() || *levels.start() < RADIAL_L + 1 {
        return Err(Error::InvalidParameter(format!(
            "expansion levels must be non-empty and start at n >= {}",
            RADIAL_L + 1
        )));
    }
    let ns: Vec<u32> = levels.collect();
    let coefficients: Vec<(u32, Complex64)> = ns
        .par_iter()
        .map(|&n| Ok((n, overlap(state, n, RADIAL_L, rule)?)))
        .collect::<Result<_>>()?;
    let probs: Vec<f64> = coefficients.iter().map(|c| c.1.norm_sqr()).collect();
    Ok(Expansion {
        captured: crate::numerics::sum::pairwise_sum(&probs),
        coefficients,
    })
}

/// Observables of the evolved packet at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub t: TimeAu,
    /// `<psi(t)|psi(t)>`, constant in time.
    pub norm: f64,
    pub mean_r: f64,
    pub delta_r: f64,
    pub mean_p: f64,
    pub delta_p: f64,
}

impl Observables {
    pub fn uncertainty_product(&self) -> f64 {
        self.delta_r * self.delta_p
    }
}

/// `psi(r, t) = sum_n c_n R_{n,1}(r) exp(-i E_n t)`.
///
/// Matrix elements of `r`, `r^2`, `p_r` and `p_r^2` between the retained
/// eigenstates are tabulated once; observables at any time are then
/// quadratic forms in the phased coefficients, normalised by the norm of the
/// truncated expansion. The radial functions are hydrogenic even when the
/// model carries a quantum defect.
#[derive(Debug, Clone)]
pub struct EvolvedState {
    pub levels: Vec<u32>,
    pub coefficients: Vec<Complex64>,
    pub energies: Vec<f64>,
    states: Vec<RadialEigenstate>,
    overlap: Vec<Vec<f64>>,
    r1: Vec<Vec<f64>>,
    r2: Vec<Vec<f64>>,
    dmat: Vec<Vec<f64>>,
    p2: Vec<Vec<f64>>,
}

pub fn evolve(expansion: &Expansion, model: &EnergyModel) -> Result<EvolvedState> {
    let levels: Vec<u32> = expansion.coefficients.iter().map(|c| c.0).collect();
    let coefficients: Vec<Complex64> = expansion.coefficients.iter().map(|c| c.1).collect();
    let energies = levels
        .iter()
        .map(|&n| model.energy(n))
        .collect::<Result<Vec<_>>>()?;
    let states = levels
        .iter()
        .map(|&n| RadialEigenstate::new(n, RADIAL_L))
        .collect::<Result<Vec<_>>>()?;
    let basis = TabulatedBasis::new(&levels, RADIAL_L, None)?;
    Ok(EvolvedState {
        overlap: basis.position_matrix(|_| 1.0),
        r1: basis.position_matrix(|r| r),
        r2: basis.position_matrix(|r| r * r),
        dmat: basis.derivative_matrix(),
        p2: basis.momentum_squared_matrix(),
        levels,
        coefficients,
        energies,
        states,
    })
}

impl EvolvedState {
    fn phased(&self, t: f64) -> Vec<Complex64> {
        self.coefficients
            .iter()
            .zip(&self.energies)
            .map(|(c, &e)| c * unit_phasor(e, t))
            .collect()
    }

    fn quadratic(a: &[Complex64], m: &[Vec<f64>]) -> Complex64 {
        let terms: Vec<Complex64> = a
            .iter()
            .enumerate()
            .flat_map(|(i, ai)| {
                a.iter()
                    .enumerate()
                    .map(move |(k, ak)| ai.conj() * ak * m[i][k])
            })
            .collect();
        crate::numerics::sum::pairwise_sum(&terms)
    }

    pub fn value(&self, r: f64, t: TimeAu) -> Complex64 {
        let a = self.phased(t.0);
        let terms: Vec<Complex64> = a
            .iter()
            .zip(&self.states)
            .map(|(a, s)| a * s.value(r))
            .collect();
        crate::numerics::sum::pairwise_sum(&terms)
    }

    pub fn observables(&self, t: TimeAu) -> Observables {
        let a = self.phased(t.0);
        let norm = Self::quadratic(&a, &self.overlap).re;
        let mean_r = Self::quadratic(&a, &self.r1).re / norm;
        let mean_r2 = Self::quadratic(&a, &self.r2).re / norm;
        // <p_r> = -i sum conj(a_m) D_mk a_k
        let mean_p = (Complex64::new(0.0, -1.0) * Self::quadratic(&a, &self.dmat)).re / norm;
        let mean_p2 = Self::quadratic(&a, &self.p2).re / norm;
        Observables {
            t,
            norm,
            mean_r,
            delta_r: (mean_r2 - mean_r * mean_r).max(0.0).sqrt(),
            mean_p,
            delta_p: (mean_p2 - mean_p * mean_p).max(0.0).sqrt(),
        }
    }

    /// `integral |psi(r, t)|^2 r^2 dr` by adaptive quadrature, independent
    /// of the tabulated matrices.
    pub fn norm_by_quadrature(&self, t: TimeAu, rule: &QuadratureRule) -> Result<f64> {
        let n_top = self.levels.iter().copied().max().unwrap_or(RADIAL_L + 1);
        let a = self.phased(t.0);
        rule.integrate_real(
            |r| {
                let terms: Vec<Complex64> = a
                    .iter()
                    .zip(&self.states)
                    .map(|(a, s)| a * s.value(r))
                    .collect();
                crate::numerics::sum::pairwise_sum(&terms).norm_sqr() * r * r
            },
            rule.r_max(n_top),
        )
    }

    /// Observables on `samples` equally spaced times from 0 to `t_end`.
    pub fn track(&self, t_end: TimeAu, samples: usize) -> Vec<Observables> {
        let samples = samples.max(2);
        (0..samples)
            .into_par_iter()
            .map(|i| self.observables(TimeAu(t_end.0 * i as f64 / (samples - 1) as f64)))
            .collect()
    }
}

pub const UNCERTAINTY_CSV_HEADER: &str = "t_ns,mean_r,delta_r,delta_p,uncertainty_product";

/// CSV of `(t_ns, <r>, dr, dp_r, dr dp_r)` with the trace formatting rules.
pub fn uncertainty_csv(rows: &[Observables]) -> String {
    let mut out = String::from(UNCERTAINTY_CSV_HEADER);
    out.push('\n');
    for o in rows {
        let fields = [
            au_to_ns(o.t).0,
            o.mean_r,
            o.delta_r,
            o.delta_p,
            o.uncertainty_product(),
        ];
        let line: Vec<String> = fields.iter().map(|&x| float(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
