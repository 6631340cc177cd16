//! Hydrogen radial eigenfunctions at large `n` and projections onto them.
//!
//! `R_{n,l}(r) = N rho^l exp(-rho/2) L_{n-l-1}^{2l+1}(rho)`, `rho = 2r/n`,
//! with `N^2 = (2/n)^3 (n-l-1)! / (2n (n+l)!)`. The factorials overflow
//! doubles long before `n = 50`, so `N` is carried as a logarithm and the
//! Laguerre polynomial comes from the upward three-term recurrence in its
//! degree, rescaled whenever it grows large.

use num_complex::Complex64;

use crate::numerics::ln_gamma;
use crate::numerics::quad::{integrate, sqrt_spaced_breakpoints, AdaptiveOptions, CompositeRule};
use crate::{Error, Result};

const RESCALE_ABOVE: f64 = 1e200;

/// `L_m^a(x)` and `L_{m-1}^a(x)`, both divided by `exp(log_scale)`.
#[derive(Debug, Clone, Copy)]
struct ScaledLaguerre {
    value: f64,
    previous: f64,
    log_scale: f64,
}

fn laguerre_pair(m: u32, a: f64, x: f64) -> ScaledLaguerre {
    let mut prev = 0.0; // L_{-1}
    let mut cur = 1.0; // L_0
    let mut log_scale = 0.0;
    for k in 0..m {
        let k = f64::from(k);
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            prev /= RESCALE_ABOVE;
            cur /= RESCALE_ABOVE;
            log_scale += RESCALE_ABOVE.ln();
        }
    }
    ScaledLaguerre {
        value: cur,
        previous: prev,
        log_scale,
    }
}

/// Generalised Laguerre polynomial `L_m^a(x)`.
pub fn laguerre(m: u32, a: f64, x: f64) -> f64 {
    let p = laguerre_pair(m, a, x);
    p.value * p.log_scale.exp()
}

/// A normalised bound state `R_{n,l}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialEigenstate {
    pub n: u32,
    pub l: u32,
    log_norm: f64,
}

impl RadialEigenstate {
    pub fn new(n: u32, l: u32) -> Result<RadialEigenstate> {
        if n < l + 1 {
            return Err(Error::InvalidParameter(format!(
                "radial eigenstate needs n >= l + 1, got n = {n}, l = {l}"
            )));
        }
        let nf = f64::from(n);
        let log_norm = 0.5
            * (3.0 * (2.0 / nf).ln() + ln_gamma(f64::from(n - l))
                - (2.0 * nf).ln()
                - ln_gamma(f64::from(n + l + 1)));
        Ok(RadialEigenstate { n, l, log_norm })
    }

    fn degree(&self) -> u32 {
        self.n - self.l - 1
    }

    fn alpha(&self) -> f64 {
        f64::from(2 * self.l + 1)
    }

    pub fn value(&self, r: f64) -> f64 {
        let rho = 2.0 * r / f64::from(self.n);
        let lag = laguerre_pair(self.degree(), self.alpha(), rho);
        if rho <= 0.0 {
            return if self.l == 0 {
                self.log_norm.exp() * lag.value * lag.log_scale.exp()
            } else {
                0.0
            };
        }
        let log_pref = self.log_norm + f64::from(self.l) * rho.ln() - 0.5 * rho + lag.log_scale;
        log_pref.exp() * lag.value
    }

    /// `dR/dr`, using `x L_m^a'(x) = m L_m^a(x) - (m + a) L_{m-1}^a(x)`.
    pub fn derivative(&self, r: f64) -> f64 {
        let nf = f64::from(self.n);
        let rho = 2.0 * r / nf;
        let m = self.degree();
        let a = self.alpha();
        let lag = laguerre_pair(m, a, rho);
        if rho <= 0.0 {
            let l0 = lag.value * lag.log_scale.exp();
            return match self.l {
                0 => {
                    // L_m^a'(0) = -L_{m-1}^{a+1}(0) = -C(m + a, m - 1)
                    let dl0 = if m == 0 {
                        0.0
                    } else {
                        -laguerre(m - 1, a + 1.0, 0.0)
                    };
                    (2.0 / nf) * self.log_norm.exp() * (dl0 - 0.5 * l0)
                }
                1 => (2.0 / nf) * self.log_norm.exp() * l0,
                _ => 0.0,
            };
        }
        let mf = f64::from(m);
        let dl = (mf * lag.value - (mf + a) * lag.previous) / rho;
        let bracket = (f64::from(self.l) / rho - 0.5) * lag.value + dl;
        let log_pref = self.log_norm + f64::from(self.l) * rho.ln() - 0.5 * rho + lag.log_scale;
        (2.0 / nf) * log_pref.exp() * bracket
    }

    pub fn energy(&self) -> f64 {
        let nf = f64::from(self.n);
        -0.5 / (nf * nf)
    }
}

/// `R_{n,l}(r)` for `r > 0`.
pub fn radial_eigenfunction(n: u32, l: u32, r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "radius must be >= 0, got {r}"
        )));
    }
    Ok(RadialEigenstate::new(n, l)?.value(r))
}

/// Radius beyond which `R_{n,l}^2 r^2` carries negligible probability.
///
/// The classically allowed region ends below `2 n^2`; past it the density
/// decays like `exp(-2 r / n)`, and the `30 n + 30` margin covers that decay
/// for small `n`.
pub fn eigenstate_extent(n: u32) -> f64 {
    let nf = f64::from(n);
    2.0 * nf * nf + 30.0 * nf + 30.0
}

/// Something with a radial profile that can be projected onto eigenstates.
pub trait RadialFunction: Sync {
    fn value(&self, r: f64) -> Complex64;

    /// Radius past which `|f|^2 r^2` is negligible.
    fn extent(&self) -> f64;
}

impl RadialFunction for RadialEigenstate {
    fn value(&self, r: f64) -> Complex64 {
        Complex64::new(RadialEigenstate::value(self, r), 0.0)
    }

    fn extent(&self) -> f64 {
        eigenstate_extent(self.n)
    }
}

/// Adaptive Gauss-Kronrod panels on `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// `r_max` is at least this multiple of `n^2`.
    pub r_max_factor: f64,
    /// Initial panels, equally spaced in `sqrt(r)`.
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            r_max_factor: 3.0,
            initial_panels: 48,
            max_panels: 20_000,
        }
    }
}

impl QuadratureRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if !(self.r_max_factor >= 3.0) {
            return Err(Error::InvalidParameter(
                "r_max must cover at least 3 n^2".into(),
            ));
        }
        if self.initial_panels == 0 || self.max_panels < self.initial_panels {
            return Err(Error::InvalidParameter("invalid panel counts".into()));
        }
        Ok(())
    }

    pub fn r_max(&self, n: u32) -> f64 {
        let nf = f64::from(n);
        (self.r_max_factor * nf * nf).max(eigenstate_extent(n))
    }

    fn options(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_panels: self.max_panels,
        }
    }

    /// `integral_0^r_max g(r) dr` with this rule's panels and tolerances.
    pub fn integrate_real<G: Fn(f64) -> f64>(&self, g: G, r_max: f64) -> Result<f64> {
        self.validate()?;
        let bp = sqrt_spaced_breakpoints(r_max, self.initial_panels);
        Ok(integrate(g, &bp, &self.options())?.value)
    }

    pub fn integrate_complex<G: Fn(f64) -> Complex64>(
        &self,
        g: G,
        r_max: f64,
    ) -> Result<Complex64> {
        self.validate()?;
        let bp = sqrt_spaced_breakpoints(r_max, self.initial_panels);
        Ok(integrate(g, &bp, &self.options())?.value)
    }
}

/// `<R_{n,l}|f> = integral R_{n,l}(r) f(r) r^2 dr`.
pub fn overlap<F: RadialFunction + ?Sized>(
    f: &F,
    n: u32,
    l: u32,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    let state = RadialEigenstate::new(n, l)?;
    let r_max = rule.r_max(n).max(f.extent());
    rule.integrate_complex(|r| f.value(r) * (state.value(r) * r * r), r_max)
}

/// Eigenstates `u_n(r) = r R_{n,l}(r)` and `u_n'(r)` tabulated on a fixed
/// composite Gauss-Legendre grid, for matrix elements between many states.
#[derive(Debug, Clone)]
pub struct TabulatedBasis {
    pub l: u32,
    pub levels: Vec<u32>,
    pub rule: CompositeRule,
    /// `u[i][j] = r_j R_{levels[i]}(r_j)`
    pub u: Vec<Vec<f64>>,
    /// `du[i][j] = d/dr (r R)(r_j)`
    pub du: Vec<Vec<f64>>,
}

impl TabulatedBasis {
    /// Tabulates on `[0, r_max]` with panels equally spaced in `sqrt(r)`;
    /// `r_max` defaults to cover the largest level.
    pub fn new(levels: &[u32], l: u32, r_max: Option<f64>) -> Result<TabulatedBasis> {
        let states: Vec<RadialEigenstate> = levels
            .iter()
            .map(|&n| RadialEigenstate::new(n, l))
            .collect::<Result<_>>()?;
        let n_top = levels.iter().copied().max().ok_or_else(|| {
            Error::InvalidParameter("tabulated basis needs at least one level".into())
        })?;
        let r_max = r_max.unwrap_or_else(|| QuadratureRule::default().r_max(n_top));
        // About a quarter of an oscillation per panel for the top level.
        let panels = 4 * n_top as usize + 40;
        let rule = CompositeRule::new(&sqrt_spaced_breakpoints(r_max, panels), 16);
        let u = states
            .iter()
            .map(|s| rule.nodes.iter().map(|&r| r * s.value(r)).collect())
            .collect();
        let du = states
            .iter()
            .map(|s| {
                rule.nodes
                    .iter()
                    .map(|&r| s.value(r) + r * s.derivative(r))
                    .collect()
            })
            .collect();
        Ok(TabulatedBasis {
            l,
            levels: levels.to_vec(),
            rule,
            u,
            du,
        })
    }

    /// `M[i][k] = sum_j w_j a_i(r_j) b_k(r_j) g(r_j)` with pairwise reduction.
    fn matrix(&self, a: &[Vec<f64>], b: &[Vec<f64>], g: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
        let w = &self.rule.weights;
        let r = &self.rule.nodes;
        let gw: Vec<f64> = r.iter().zip(w).map(|(&r, &w)| w * g(r)).collect();
        a.iter()
            .map(|ai| {
                b.iter()
                    .map(|bk| {
                        crate::numerics::sum::pairwise_sum_by(gw.len(), &|j| gw[j] * ai[j] * bk[j])
                    })
                    .collect()
            })
            .collect()
    }

    /// `<m| f(r) |n>`.
    pub fn position_matrix(&self, f: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
        self.matrix(&self.u, &self.u, f)
    }

    /// `integral u_m u_n' dr`; `<m|p_r|n>` is `-i` times this.
    pub fn derivative_matrix(&self) -> Vec<Vec<f64>> {
        self.matrix(&self.u, &self.du, |_| 1.0)
    }

    /// `<m|p_r^2|n> = integral u_m' u_n' dr`.
    pub fn momentum_squared_matrix(&self) -> Vec<Vec<f64>> {
        self.matrix(&self.du, &self.du, |_| 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_closed_form() {
        // R_10 = 2 exp(-r)
        let v = radial_eigenfunction(1, 0, 1.0).unwrap();
        assert!((v - 2.0 / std::f64::consts::E).abs() < 1e-15);
        assert!((v - 0.735_759).abs() < 1e-6);
        let s = RadialEigenstate::new(1, 0).unwrap();
        assert!((s.value(0.0) - 2.0).abs() < 1e-15);
        assert!((s.derivative(0.0) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_p_closed_form() {
        // R_21 = r exp(-r/2) / (2 sqrt 6); at r = 2: exp(-1) / sqrt 6
        let v = radial_eigenfunction(2, 1, 2.0).unwrap();
        let exact = (-1.0f64).exp() / 6f64.sqrt();
        assert!((v - exact).abs() < 1e-15);
        assert!((v - 0.150_186).abs() < 1e-6);
        let s = RadialEigenstate::new(2, 1).unwrap();
        // d/dr: (1 - r/2) exp(-r/2) / (2 sqrt 6)
        for r in [0.0, 0.5, 2.0, 7.0] {
            let d = (1.0 - r / 2.0) * (-r / 2.0f64).exp() / (2.0 * 6f64.sqrt());
            assert!((s.derivative(r) - d).abs() < 1e-15, "r = {r}");
        }
    }

    #[test]
    fn rejects_n_below_l_plus_one() {
        assert!(RadialEigenstate::new(1, 1).is_err());
        assert!(radial_eigenfunction(3, 3, 1.0).is_err());
        assert!(radial_eigenfunction(3, 1, -1.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference_at_large_n() {
        let s = RadialEigenstate::new(48, 1).unwrap();
        for r in [3.0, 150.0, 1200.0, 4000.0, 5000.0] {
            let h = 1e-3;
            let fd = (s.value(r + h) - s.value(r - h)) / (2.0 * h);
            let scale = s.derivative(r).abs().max(1e-12);
            assert!((s.derivative(r) - fd).abs() / scale < 1e-5, "r = {r}");
        }
    }

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7;
        assert_eq!(laguerre(0, 3.0, x), 1.0);
        assert!((laguerre(1, 3.0, x) - (4.0 - x)).abs() < 1e-15);
        let l2 = 0.5 * (x * x - 2.0 * 5.0 * x + 5.0 * 4.0);
        assert!((laguerre(2, 3.0, x) - l2).abs() < 1e-14);
    }

    #[test]
    fn normalisation_small_and_large_n() {
        let rule = QuadratureRule::default();
        for (n, l) in [(1, 0), (2, 1), (5, 2), (20, 1), (48, 1), (60, 1)] {
            let s = RadialEigenstate::new(n, l).unwrap();
            let norm = rule
                .integrate_real(|r| (s.value(r) * r).powi(2), rule.r_max(n))
                .unwrap();
            assert!((norm - 1.0).abs() < 1e-8, "n = {n}, l = {l}: {norm}");
        }
    }

    #[test]
    fn overlaps_of_neighbouring_levels() {
        let rule = QuadratureRule::default();
        let s48 = RadialEigenstate::new(48, 1).unwrap();
        let same = overlap(&s48, 48, 1, &rule).unwrap();
        assert!((same.re - 1.0).abs() < 1e-8 && same.im.abs() < 1e-15);
        let other = overlap(&s48, 49, 1, &rule).unwrap();
        assert!(other.norm() < 1e-7);
    }

    #[test]
    fn tabulated_basis_is_orthonormal() {
        let levels: Vec<u32> = (44..=52).collect();
        let basis = TabulatedBasis::new(&levels, 1, None).unwrap();
        let s = basis.position_matrix(|_| 1.0);
        for (i, row) in s.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-9, "({i},{k}) = {v}");
            }
        }
    }

    #[test]
    fn momentum_matrix_obeys_commutator_identity() {
        // [H, r] = -i p_r, so <m|p_r|n> = i (E_m - E_n) <m|r|n>; with
        // <m|p_r|n> = -i D_mn this is D_mn = -(E_m - E_n) r_mn.
        let levels: Vec<u32> = (45..=51).collect();
        let basis = TabulatedBasis::new(&levels, 1, None).unwrap();
        let d = basis.derivative_matrix();
        let r = basis.position_matrix(|r| r);
        let e = |i: usize| -0.5 / f64::from(levels[i]).powi(2);
        let predicted = |i: usize, k: usize| -(e(i) - e(k)) * r[i][k];
        let scale = (0..levels.len())
            .flat_map(|i| (0..levels.len()).map(move |k| (i, k)))
            .map(|(i, k)| predicted(i, k).abs())
            .fold(0.0, f64::max);
        for (i, row) in d.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                let p = predicted(i, k);
                assert!((v - p).abs() < 1e-8 * scale, "({i},{k}): {v} vs {p}");
            }
        }
    }

    #[test]
    fn momentum_squared_diagonal_matches_virial() {
        // For hydrogen <p_r^2> = 2(E - <V_eff>) with V_eff = l(l+1)/(2r^2) - 1/r.
        let levels = [30u32, 48];
        let basis = TabulatedBasis::new(&levels, 1, None).unwrap();
        let p2 = basis.momentum_squared_matrix();
        let inv_r = basis.position_matrix(|r| 1.0 / r);
        let inv_r2 = basis.position_matrix(|r| 1.0 / (r * r));
        for (i, &n) in levels.iter().enumerate() {
            let e = -0.5 / f64::from(n).powi(2);
            let expect = 2.0 * (e - inv_r2[i][i] + inv_r[i][i]);
            assert!(((p2[i][i] - expect) / expect).abs() < 1e-9);
        }
    }
}
