//! Energy models and the time scales defined by their Taylor expansion about
//! the excitation center.
//!
//! The expansion center is a real number `nu`, not an integer. An integer
//! center is an on-resonance excitation; a noninteger center expresses laser
//! detuning, and a quantum-defect model shifts the effective center to
//! `nu - delta`. All three time scales are stored as positive durations.

use std::f64::consts::TAU;

use crate::units::TimeAu;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Hydrogen,
    QuantumDefect,
}

/// A Rydberg spectrum `E_n = -1 / (2 (n - delta)^2) + global_shift` in
/// atomic units. For [`ModelKind::Hydrogen`] the defect is ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    pub kind: ModelKind,
    pub delta: f64,
    pub global_shift: f64,
}

impl EnergyModel {
    pub fn hydrogen() -> EnergyModel {
        EnergyModel {
            kind: ModelKind::Hydrogen,
            delta: 0.0,
            global_shift: 0.0,
        }
    }

    pub fn quantum_defect(delta: f64) -> Result<EnergyModel> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quantum defect must be finite and non-negative, got {delta}"
            )));
        }
        Ok(EnergyModel {
            kind: ModelKind::QuantumDefect,
            delta,
            global_shift: 0.0,
        })
    }

    /// The same model with every level moved by `shift` hartree.
    pub fn with_global_shift(self, shift: f64) -> EnergyModel {
        EnergyModel {
            global_shift: shift,
            ..self
        }
    }

    /// The defect actually applied to level energies.
    pub fn effective_defect(&self) -> f64 {
        match self.kind {
            ModelKind::Hydrogen => 0.0,
            ModelKind::QuantumDefect => self.delta,
        }
    }

    /// `nu - delta`, rejected unless strictly positive.
    pub fn effective_n(&self, nu: f64) -> Result<f64> {
        let delta = self.effective_defect();
        let n_star = nu - delta;
        if !(n_star > 0.0 && n_star.is_finite()) {
            return Err(Error::DefectTooLarge { n: nu, delta });
        }
        Ok(n_star)
    }

    /// Energy of level `n` (integer principal quantum number, `n >= 1`).
    pub fn energy(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "principal quantum number must be at least 1".into(),
            ));
        }
        self.energy_at(f64::from(n))
    }

    /// The energy formula continued to a real argument.
    pub fn energy_at(&self, nu: f64) -> Result<f64> {
        let n_star = self.effective_n(nu)?;
        Ok(-0.5 / (n_star * n_star) + self.global_shift)
    }

    /// `[E', E'', ...]` up to `order` (1..=3) at the real center `nu`.
    pub fn energy_derivatives(&self, nu: f64, order: usize) -> Result<Vec<f64>> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidParameter(format!(
                "derivative order must be 1, 2 or 3, got {order}"
            )));
        }
        let x = self.effective_n(nu)?;
        let all = [x.powi(-3), -3.0 * x.powi(-4), 12.0 * x.powi(-5)];
        Ok(all[..order].to_vec())
    }

    /// Classical, revival and superrevival periods at center `nu`.
    pub fn time_scales(&self, nu: f64) -> Result<TimeScales> {
        let d = self.energy_derivatives(nu, 3)?;
        Ok(TimeScales {
            t_cl: TimeAu(TAU / d[0]),
            t_rev: TimeAu(-TAU / (0.5 * d[1])),
            t_sr: TimeAu(TAU / (d[2] / 6.0)),
        })
    }

    /// Converts an energy offset into the equivalent shift of the expansion
    /// center, to first order: `delta_nu = delta_e / E'(nu)`.
    pub fn center_shift_for_energy(&self, nu: f64, delta_e: f64) -> Result<f64> {
        let d = self.energy_derivatives(nu, 1)?;
        Ok(delta_e / d[0])
    }

    /// Inverse of [`EnergyModel::center_shift_for_energy`].
    pub fn energy_for_center_shift(&self, nu: f64, delta_nu: f64) -> Result<f64> {
        let d = self.energy_derivatives(nu, 1)?;
        Ok(delta_nu * d[0])
    }
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel::hydrogen()
    }
}

/// The three time scales of the third-order expansion.
///
/// For hydrogen at center `nu`: `t_cl = 2 pi nu^3`, `t_rev = (2 nu / 3) t_cl`
/// and `t_sr = (3 nu / 4) t_rev`. The ordering `t_cl < t_rev < t_sr` holds
/// once the effective center exceeds 3/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeScales {
    pub t_cl: TimeAu,
    pub t_rev: TimeAu,
    pub t_sr: TimeAu,
}

/// Time scales of the hydrogen spectrum at `nu`.
pub fn time_scales(model: &EnergyModel, nu: f64) -> Result<TimeScales> {
    model.time_scales(nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::au_to_ns;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn hydrogen_energies() {
        let h = EnergyModel::hydrogen();
        assert_eq!(h.energy(1).unwrap(), -0.5);
        assert!(rel(h.energy(48).unwrap(), -1.0 / 4608.0) < 1e-15);
        assert!(h.energy(0).is_err());
    }

    #[test]
    fn defect_energy() {
        let m = EnergyModel::quantum_defect(0.5).unwrap();
        // -1 / (2 * 47.5^2) = -1 / 4512.5
        assert!(rel(m.energy(48).unwrap(), -1.0 / 4512.5) < 1e-15);
        assert!(rel(m.energy(48).unwrap(), -2.21607e-4) < 1e-5);
    }

    #[test]
    fn defect_too_large_is_rejected() {
        let m = EnergyModel::quantum_defect(2.0).unwrap();
        assert!(matches!(m.energy(2), Err(Error::DefectTooLarge { .. })));
        assert!(m.energy(3).is_ok());
        assert!(EnergyModel::quantum_defect(-0.1).is_err());
        assert!(matches!(
            m.energy_derivatives(1.5, 1),
            Err(Error::DefectTooLarge { .. })
        ));
    }

    #[test]
    fn derivative_examples() {
        let h = EnergyModel::hydrogen();
        assert_eq!(h.energy_derivatives(1.0, 1).unwrap(), vec![1.0]);
        let d2 = h.energy_derivatives(48.0, 2).unwrap()[1];
        assert!(rel(d2, -3.0 / 48f64.powi(4)) < 1e-15);
        assert!(rel(d2, -5.651_40e-7) < 1e-5);
        let m = EnergyModel::quantum_defect(0.5).unwrap();
        let d1 = m.energy_derivatives(48.5, 1).unwrap()[0];
        assert!(rel(d1, 1.0 / 48f64.powi(3)) < 1e-15);
        assert!(h.energy_derivatives(48.0, 0).is_err());
        assert!(h.energy_derivatives(48.0, 4).is_err());
    }

    #[test]
    fn time_scale_anchors_at_n48() {
        let s = time_scales(&EnergyModel::hydrogen(), 48.0).unwrap();
        let ns = |t: TimeAu| au_to_ns(t).0;
        assert!((ns(s.t_rev) - 0.538).abs() < 5e-4);
        assert!((ns(TimeAu(s.t_sr.0 / 6.0)) - 3.23).abs() < 5e-3);
        assert!((ns(TimeAu(s.t_sr.0 / 12.0)) - 1.61).abs() < 5e-3);
    }

    #[test]
    fn closed_forms_for_hydrogen() {
        for nu in [1.0, 2.5, 48.0, 100.0] {
            let s = time_scales(&EnergyModel::hydrogen(), nu).unwrap();
            let t_cl = TAU * nu.powi(3);
            assert!(rel(s.t_cl.0, t_cl) < 1e-14);
            assert!(rel(s.t_rev.0, 2.0 * nu / 3.0 * t_cl) < 1e-14);
            assert!(rel(s.t_sr.0, 0.75 * nu * s.t_rev.0) < 1e-14);
        }
        let s = time_scales(&EnergyModel::hydrogen(), 1.0).unwrap();
        assert!(rel(s.t_rev.0 / s.t_cl.0, 2.0 / 3.0) < 1e-15);
    }

    // Central differences of the real-argument energy, independent of the
    // closed-form derivatives.
    fn fd_derivatives(m: &EnergyModel, nu: f64, h: f64) -> [f64; 3] {
        let e = |x: f64| m.energy_at(x).unwrap();
        let d1 = (e(nu + h) - e(nu - h)) / (2.0 * h);
        let d2 = (e(nu + h) - 2.0 * e(nu) + e(nu - h)) / (h * h);
        let d3 = (e(nu + 2.0 * h) - 2.0 * e(nu + h) + 2.0 * e(nu - h) - e(nu - 2.0 * h))
            / (2.0 * h * h * h);
        [d1, d2, d3]
    }

    #[test]
    fn derivatives_match_finite_differences_at_n48() {
        let m = EnergyModel::hydrogen();
        let d = m.energy_derivatives(48.0, 2).unwrap();
        let fd = fd_derivatives(&m, 48.0, 1e-3);
        assert!(rel(d[0], fd[0]) < 1e-6);
        assert!(rel(d[1], fd[1]) < 1e-6);
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(nu in 5.0f64..100.0, delta in 0.0f64..0.9) {
            let m = EnergyModel::quantum_defect(delta).unwrap();
            let d = m.energy_derivatives(nu, 3).unwrap();
            // Second and third differences of a value near 1e-4 lose digits
            // to cancellation; scale the step with the center.
            let fd1 = fd_derivatives(&m, nu, 1e-3);
            prop_assert!(rel(d[0], fd1[0]) < 1e-6);
            let h = 1e-3 * nu;
            let fd = fd_derivatives(&m, nu, h);
            prop_assert!(rel(d[1], fd[1]) < 1e-5);
            prop_assert!(rel(d[2], fd[2]) < 1e-4);
        }

        #[test]
        fn hydrogen_ratios(nu in 1.6f64..200.0) {
            let s = time_scales(&EnergyModel::hydrogen(), nu).unwrap();
            prop_assert!(rel(s.t_rev.0 / s.t_cl.0, 2.0 * nu / 3.0) < 1e-12);
            prop_assert!(rel(s.t_sr.0 / s.t_rev.0, 0.75 * nu) < 1e-12);
            prop_assert!(0.0 < s.t_cl.0 && s.t_cl.0 < s.t_rev.0 && s.t_rev.0 < s.t_sr.0);
        }

        #[test]
        fn global_shift_leaves_scales_unchanged(nu in 2.0f64..100.0, shift in -1e-3f64..1e-3) {
            let m = EnergyModel::quantum_defect(0.3).unwrap();
            let a = m.time_scales(nu).unwrap();
            let b = m.with_global_shift(shift).time_scales(nu).unwrap();
            prop_assert!(rel(a.t_cl.0, b.t_cl.0) <= 1e-15);
            prop_assert!(rel(a.t_rev.0, b.t_rev.0) <= 1e-15);
            prop_assert!(rel(a.t_sr.0, b.t_sr.0) <= 1e-15);
            let da = m.energy_derivatives(nu, 3).unwrap();
            let db = m.with_global_shift(shift).energy_derivatives(nu, 3).unwrap();
            prop_assert_eq!(da, db);
        }
    }

    #[test]
    fn energy_detuning_conversion_round_trips() {
        let m = EnergyModel::hydrogen();
        let de = m.energy_for_center_shift(48.0, 0.25).unwrap();
        assert!(rel(de, 0.25 / 48f64.powi(3)) < 1e-15);
        let back = m.center_shift_for_energy(48.0, de).unwrap();
        assert!(rel(back, 0.25) < 1e-15);
    }
}
