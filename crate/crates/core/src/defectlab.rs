//! Quantum defects versus laser detuning.
//!
//! Both move the noninteger center `N*` of the expansion, so a hydrogen
//! packet centered at `n - delta` and a defect packet centered at `n` share
//! `t_cl`, `t_rev` and `t_sr`. Their spectra still differ: a detuning leaves
//! the hydrogen levels in place, while a defect shifts each level by a
//! different amount. The comparison below runs both packets through the
//! revival pipeline and measures how far the detected structure moves.
//!
//! The difference metric is a convention of this crate: the largest shift
//! of a commonly matched revival peak in units of `T_cl`, plus the number of
//! revival labels matched in only one of the two reports.

use std::ops::RangeInclusive;

use crate::format::float;
use crate::packet::{autocorr_exact, default_window, PacketSpec, TimeGrid};
use crate::revival::{classify, ClassifyConfig, RevivalKind, RevivalReport};
use crate::spectrum::{EnergyModel, TimeScales};
use crate::units::au_to_ns;
use crate::{Error, Result};

/// Relative tolerance below which two sets of time scales count as equal.
pub const SCALE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonConfig {
    pub n_center: u32,
    pub delta: f64,
    /// Offset of the hydrogen packet center, in units of `n`.
    pub detuning: f64,
    pub sigma: f64,
    /// Defaults to `ceil(5 sigma)`.
    pub window: Option<u32>,
    /// Defaults to `0 .. 1.25 t_sr/6` in steps of `T_cl / 80`.
    pub grid: Option<TimeGrid>,
    pub classify: ClassifyConfig,
}

impl ComparisonConfig {
    /// The matched configuration: detuning `-delta`.
    pub fn matched(n_center: u32, delta: f64, sigma: f64) -> ComparisonConfig {
        ComparisonConfig {
            n_center,
            delta,
            detuning: -delta,
            sigma,
            window: None,
            grid: None,
            classify: ClassifyConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_defect(self.n_center, self.delta)?;
        check_detuning(self.n_center, self.detuning)?;
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    fn window(&self) -> u32 {
        self.window.unwrap_or_else(|| default_window(self.sigma))
    }
}

fn check_defect(n_center: u32, delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quantum defect must be non-negative, got {delta}"
        )));
    }
    if !(f64::from(n_center) - delta > 1.5) {
        return Err(Error::DefectTooLarge {
            n: f64::from(n_center),
            delta,
        });
    }
    Ok(())
}

fn check_detuning(n_center: u32, detuning: f64) -> Result<()> {
    if !(detuning.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "detuning must satisfy |d| < 1, got {detuning}"
        )));
    }
    if !(f64::from(n_center) + detuning > 1.5) {
        return Err(Error::InvalidParameter(format!(
            "detuned center {} must exceed 3/2",
            f64::from(n_center) + detuning
        )));
    }
    Ok(())
}

/// Defect model expanded on resonance at `n_center`.
pub fn scales_with_defect(n_center: u32, delta: f64) -> Result<TimeScales> {
    check_defect(n_center, delta)?;
    EnergyModel::quantum_defect(delta)?.time_scales(f64::from(n_center))
}

/// Hydrogen expanded at `n_center + detuning`.
pub fn scales_with_detuning(n_center: u32, detuning: f64) -> Result<TimeScales> {
    check_detuning(n_center, detuning)?;
    EnergyModel::hydrogen().time_scales(f64::from(n_center) + detuning)
}

/// Largest relative difference between corresponding time scales.
pub fn scales_relative_difference(a: &TimeScales, b: &TimeScales) -> f64 {
    [(a.t_cl, b.t_cl), (a.t_rev, b.t_rev), (a.t_sr, b.t_sr)]
        .iter()
        .map(|(x, y)| (x.0 - y.0).abs() / x.0.abs().max(y.0.abs()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelShift {
    pub n: u32,
    pub e_hydrogen: f64,
    pub e_defect: f64,
    /// `E_defect(n) - E_hydrogen(n)`.
    pub d_n: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelShiftProfile {
    pub rows: Vec<LevelShift>,
    /// `max d_n - min d_n`.
    pub spread: f64,
}

pub const LEVEL_SHIFT_CSV_HEADER: &str = "n,e_hydrogen,e_defect,d_n";

impl LevelShiftProfile {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{LEVEL_SHIFT_CSV_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.n,
                float(r.e_hydrogen),
                float(r.e_defect),
                float(r.d_n)
            ));
        }
        out
    }
}

/// Per-level difference between a defect spectrum, optionally moved by a
/// rigid `global_shift`, and hydrogen.
///
/// The defect part and the rigid part of `d_n` are summed separately so a
/// pure shift gives exactly the same `d_n` at every level.
pub fn level_shift_profile(
    levels: RangeInclusive<u32>,
    delta: f64,
    global_shift: f64,
) -> Result<LevelShiftProfile> {
    if levels.is_empty() {
        return Err(Error::InvalidParameter("empty level range".into()));
    }
    if !global_shift.is_finite() {
        return Err(Error::InvalidParameter(
            "global shift must be finite".into(),
        ));
    }
    let hydrogen = EnergyModel::hydrogen();
    let defect = EnergyModel::quantum_defect(delta)?;
    let rows = levels
        .map(|n| {
            let e_h = hydrogen.energy(n)?;
            let e_d = defect.energy(n)?;
            Ok(LevelShift {
                n,
                e_hydrogen: e_h,
                e_defect: e_d + global_shift,
                d_n: (e_d - e_h) + global_shift,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max = rows.iter().map(|r| r.d_n).fold(f64::MIN, f64::max);
    let min = rows.iter().map(|r| r.d_n).fold(f64::MAX, f64::min);
    Ok(LevelShiftProfile {
        rows,
        spread: max - min,
    })
}

/// Spacings `E(n+1) - E(n)` of hydrogen and of the defect model, and their
/// difference, for each `n` in `levels`.
pub fn spacing_differences(
    levels: RangeInclusive<u32>,
    delta: f64,
) -> Result<Vec<(u32, f64, f64, f64)>> {
    let hydrogen = EnergyModel::hydrogen();
    let defect = EnergyModel::quantum_defect(delta)?;
    levels
        .map(|n| {
            let s_h = hydrogen.energy(n + 1)? - hydrogen.energy(n)?;
            let s_d = defect.energy(n + 1)? - defect.energy(n)?;
            Ok((n, s_h, s_d, s_d - s_h))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    IdenticalSpectra,
    ScalesEqualSpectraDiffer,
    ScalesDiffer,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::IdenticalSpectra => "identical spectra",
            Verdict::ScalesEqualSpectraDiffer => "time scales equal, spectra differ",
            Verdict::ScalesDiffer => "time scales differ",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportDifference {
    /// Largest `|t_detuned - t_defect| / T_cl` over labels matched in both.
    pub max_time_shift: f64,
    /// Largest height difference over labels matched in both.
    pub max_height_change: f64,
    /// Labels matched in exactly one report.
    pub unmatched: usize,
}

impl ReportDifference {
    pub fn metric(&self) -> f64 {
        self.max_time_shift + self.unmatched as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub config: ComparisonConfig,
    pub grid: TimeGrid,
    pub detuned_scales: TimeScales,
    pub defect_scales: TimeScales,
    /// Hydrogen packet at `n_center + detuning`.
    pub detuned: RevivalReport,
    /// Defect packet at `n_center`.
    pub defect: RevivalReport,
    pub difference: ReportDifference,
    /// Largest `|E(n+1) - E(n)|` difference between the two spectra across
    /// the packet window.
    pub max_spacing_difference: f64,
    pub verdict: Verdict,
}

pub fn report_difference(a: &RevivalReport, b: &RevivalReport, t_cl_ns: f64) -> ReportDifference {
    let kinds_a = a.matched_kinds();
    let kinds_b = b.matched_kinds();
    let mut max_time_shift: f64 = 0.0;
    let mut max_height_change: f64 = 0.0;
    let mut unmatched = 0;
    for k in &kinds_a {
        match (a.match_for(*k), b.match_for(*k)) {
            (Some((_, pa)), Some((_, pb))) => {
                max_time_shift = max_time_shift.max((pa.t_ns - pb.t_ns).abs() / t_cl_ns);
                max_height_change = max_height_change.max((pa.height - pb.height).abs());
            }
            _ => unmatched += 1,
        }
    }
    unmatched += kinds_b.iter().filter(|k| !kinds_a.contains(k)).count();
    ReportDifference {
        max_time_shift,
        max_height_change,
        unmatched,
    }
}

/// Runs the exact autocorrelation and classification for the detuned
/// hydrogen packet and the on-resonance defect packet.
pub fn compare_revival_structure(cfg: &ComparisonConfig) -> Result<Comparison> {
    cfg.validate()?;
    let n = f64::from(cfg.n_center);
    let detuned_scales = scales_with_detuning(cfg.n_center, cfg.detuning)?;
    let defect_scales = scales_with_defect(cfg.n_center, cfg.delta)?;
    let grid = match cfg.grid {
        Some(g) => g,
        None => {
            let t_end = detuned_scales.t_sr.0.max(defect_scales.t_sr.0) / 6.0 * 1.25;
            let t_cl = detuned_scales.t_cl.0.min(defect_scales.t_cl.0);
            TimeGrid::new(
                0.0,
                au_to_ns(crate::units::TimeAu(t_end)).0,
                au_to_ns(crate::units::TimeAu(t_cl / 80.0)).0,
            )?
        }
    };
    let window = cfg.window();
    let detuned_spec = PacketSpec::new(n + cfg.detuning, cfg.sigma, EnergyModel::hydrogen())?
        .with_window(window)?;
    let defect_spec = PacketSpec::new(n, cfg.sigma, EnergyModel::quantum_defect(cfg.delta)?)?
        .with_window(window)?;

    let (detuned, defect) = rayon::join(
        || {
            autocorr_exact(&detuned_spec, &grid)
                .and_then(|t| classify(&t, &detuned_scales, &cfg.classify))
        },
        || {
            autocorr_exact(&defect_spec, &grid)
                .and_then(|t| classify(&t, &defect_scales, &cfg.classify))
        },
    );
    let (detuned, defect) = (detuned?, defect?);

    let difference = report_difference(&detuned, &defect, au_to_ns(detuned_scales.t_cl).0);
    let base = detuned_spec.base_level().min(defect_spec.base_level());
    let lo = (base - i64::from(window)).max(1) as u32;
    let hi = (base + i64::from(window)) as u32;
    let max_spacing_difference = max_spacing_mismatch(&detuned_spec, &defect_spec, lo..=hi)?;

    let verdict = if scales_relative_difference(&detuned_scales, &defect_scales) > SCALE_REL_TOL {
        Verdict::ScalesDiffer
    } else if max_spacing_difference > 0.0 {
        Verdict::ScalesEqualSpectraDiffer
    } else {
        Verdict::IdenticalSpectra
    };
    Ok(Comparison {
        config: *cfg,
        grid,
        detuned_scales,
        defect_scales,
        detuned,
        defect,
        difference,
        max_spacing_difference,
        verdict,
    })
}

fn max_spacing_mismatch(
    a: &PacketSpec,
    b: &PacketSpec,
    levels: RangeInclusive<u32>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in levels {
        let s_a = a.model.energy(n + 1)? - a.model.energy(n)?;
        let s_b = b.model.energy(n + 1)? - b.model.energy(n)?;
        worst = worst.max((s_a - s_b).abs());
    }
    Ok(worst)
}

impl Comparison {
    /// Structured text: a header of `key=value` lines followed by the two
    /// revival reports in record form.
    pub fn to_report(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        out.push_str(&format!(
            "config n={} delta={} detuning={} sigma={} window={}\n",
            c.n_center,
            float(c.delta),
            float(c.detuning),
            float(c.sigma),
            c.window()
        ));
        for (name, s) in [
            ("detuned", &self.detuned_scales),
            ("defect", &self.defect_scales),
        ] {
            out.push_str(&format!(
                "scales model={} t_cl_ns={} t_rev_ns={} t_sr_ns={}\n",
                name,
                float(au_to_ns(s.t_cl).0),
                float(au_to_ns(s.t_rev).0),
                float(au_to_ns(s.t_sr).0)
            ));
        }
        out.push_str(&format!("verdict: {}\n", self.verdict));
        out.push_str(&format!(
            "difference max_time_shift_tcl={} max_height_change={} unmatched={} metric={} max_spacing_difference={}\n",
            float(self.difference.max_time_shift),
            float(self.difference.max_height_change),
            self.difference.unmatched,
            float(self.difference.metric()),
            float(self.max_spacing_difference)
        ));
        for kind in [RevivalKind::Revival, RevivalKind::Superrevival] {
            let a = self.detuned.match_for(kind).map(|m| m.1.t_ns);
            let b = self.defect.match_for(kind).map(|m| m.1.t_ns);
            out.push_str(&format!(
                "peak label={} detuned_t_ns={} defect_t_ns={}\n",
                kind.token(),
                a.map_or("none".into(), float),
                b.map_or("none".into(), float)
            ));
        }
        out.push_str("[detuned]\n");
        out.push_str(&self.detuned.to_records());
        out.push_str("[defect]\n");
        out.push_str(&self.defect.to_records());
        out
    }
}
