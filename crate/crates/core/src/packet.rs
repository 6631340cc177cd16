//! Gaussian-weighted eigenstate superpositions and their autocorrelation.
//!
//! With orthonormal eigenstates the autocorrelation `A(t) = <Psi(0)|Psi(t)>`
//! collapses to a weighted sum of unit phasors, `sum_n |c_n|^2 exp(-i E_n t)`.
//! The weights are real and positive.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::format::float;
use crate::numerics::phase::unit_phasor;
use crate::spectrum::EnergyModel;
use crate::units::{ns_to_au, TimeNs};
use crate::{Error, Result};

/// Description of the laser-excited superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    /// Center of the Gaussian distribution of `n`; noninteger for detuned
    /// excitation.
    pub center: f64,
    /// Width of the distribution of `|c_n|^2`, in units of `n`.
    pub sigma: f64,
    /// Levels `n = round(center) + k` with `|k| <= window` are kept.
    pub window: u32,
    pub model: EnergyModel,
}

/// One retained level with its probability `|c_n|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    /// Offset from `round(center)`.
    pub k: i64,
    pub n: u32,
    pub probability: f64,
}

impl PacketSpec {
    /// A packet with the default window `ceil(5 sigma)`.
    pub fn new(center: f64, sigma: f64, model: EnergyModel) -> Result<PacketSpec> {
        let spec = PacketSpec {
            center,
            sigma,
            window: default_window(sigma),
            model,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_window(self, window: u32) -> Result<PacketSpec> {
        let spec = PacketSpec { window, ..self };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center.is_finite() && self.center > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "packet center must be positive, got {}",
                self.center
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "packet width sigma must be positive, got {}",
                self.sigma
            )));
        }
        let base = self.base_level();
        let lowest = base - i64::from(self.window);
        if lowest < 1 {
            return Err(Error::InvalidParameter(format!(
                "window {} around n = {base} reaches n = {lowest} < 1",
                self.window
            )));
        }
        if lowest > i64::from(u32::MAX) - 2 * i64::from(self.window) {
            return Err(Error::InvalidParameter("packet center too large".into()));
        }
        self.model.effective_n(lowest as f64)?;
        Ok(())
    }

    /// `round(center)`, the level that `k = 0` refers to.
    pub fn base_level(&self) -> i64 {
        self.center.round() as i64
    }
}

/// `ceil(5 sigma)`: the Gaussian mass beyond it is below 1e-5.
pub fn default_window(sigma: f64) -> u32 {
    (5.0 * sigma).ceil().max(1.0) as u32
}

/// Normalised probabilities `|c_n|^2 ~ exp(-(n - center)^2 / (2 sigma^2))`
/// over the retained window, ordered by increasing `n`.
pub fn gaussian_weights(spec: &PacketSpec) -> Result<Vec<Component>> {
    spec.validate()?;
    let base = spec.base_level();
    let w = i64::from(spec.window);
    let two_var = 2.0 * spec.sigma * spec.sigma;
    let mut comps: Vec<Component> = (-w..=w)
        .map(|k| {
            let n = base + k;
            let x = n as f64 - spec.center;
            Component {
                k,
                n: n as u32,
                probability: (-x * x / two_var).exp(),
            }
        })
        .collect();
    let total: f64 = comps.iter().map(|c| c.probability).sum();
    for c in &mut comps {
        c.probability /= total;
    }
    Ok(comps)
}

/// A uniform grid of sample times in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start_ns: f64,
    pub end_ns: f64,
    pub step_ns: f64,
}

impl TimeGrid {
    pub fn new(start_ns: f64, end_ns: f64, step_ns: f64) -> Result<TimeGrid> {
        if !(start_ns.is_finite() && end_ns.is_finite() && step_ns.is_finite()) {
            return Err(Error::InvalidParameter("time grid must be finite".into()));
        }
        if !(step_ns > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid step must be positive, got {step_ns}"
            )));
        }
        if end_ns < start_ns {
            return Err(Error::InvalidParameter(format!(
                "grid end {end_ns} precedes start {start_ns}"
            )));
        }
        Ok(TimeGrid {
            start_ns,
            end_ns,
            step_ns,
        })
    }

    pub fn len(&self) -> usize {
        ((self.end_ns - self.start_ns) / self.step_ns + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The i-th sample time; computed from the index so no error accumulates.
    pub fn at(&self, i: usize) -> f64 {
        self.start_ns + i as f64 * self.step_ns
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.at(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t_ns: f64,
    pub amplitude: Complex64,
    pub abs2: f64,
}

/// Sampled autocorrelation over a time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AutocorrTrace {
    pub t_start_ns: f64,
    pub t_end_ns: f64,
    pub samples: Vec<TraceSample>,
}

impl AutocorrTrace {
    pub fn from_samples(samples: Vec<TraceSample>) -> AutocorrTrace {
        let t_start_ns = samples.first().map_or(0.0, |s| s.t_ns);
        let t_end_ns = samples.last().map_or(0.0, |s| s.t_ns);
        AutocorrTrace {
            t_start_ns,
            t_end_ns,
            samples,
        }
    }

    /// A trace holding only `|A|^2` values; the amplitude is set to the real
    /// square root so that `abs2` stays consistent.
    pub fn from_abs2(times_ns: &[f64], abs2: &[f64]) -> AutocorrTrace {
        let samples = times_ns
            .iter()
            .zip(abs2)
            .map(|(&t_ns, &a)| TraceSample {
                t_ns,
                amplitude: Complex64::new(a.max(0.0).sqrt(), 0.0),
                abs2: a,
            })
            .collect();
        AutocorrTrace::from_samples(samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t_ns).collect()
    }

    pub fn abs2(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.abs2).collect()
    }

    /// Mean spacing of the sample times, or `None` with fewer than two samples.
    pub fn step_ns(&self) -> Option<f64> {
        if self.samples.len() < 2 {
            return None;
        }
        Some((self.t_end_ns - self.t_start_ns) / (self.samples.len() - 1) as f64)
    }

    /// Largest `|A|^2` over samples with `t` in `[lo, hi]`, with its time.
    pub fn max_in(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        self.samples
            .iter()
            .filter(|s| s.t_ns >= lo && s.t_ns <= hi)
            .fold(None, |best: Option<(f64, f64)>, s| match best {
                Some((_, h)) if h >= s.abs2 => best,
                _ => Some((s.t_ns, s.abs2)),
            })
    }
}

fn evaluate<F>(grid: &TimeGrid, amplitude: F) -> AutocorrTrace
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let samples: Vec<TraceSample> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let t_ns = grid.at(i);
            let a = amplitude(t_ns);
            TraceSample {
                t_ns,
                amplitude: a,
                abs2: a.norm_sqr(),
            }
        })
        .collect();
    AutocorrTrace::from_samples(samples)
}

/// `A(t) = sum_n |c_n|^2 exp(-i E_n t)` with the model's exact energies.
pub fn autocorr_exact(spec: &PacketSpec, grid: &TimeGrid) -> Result<AutocorrTrace> {
    let comps = gaussian_weights(spec)?;
    let terms: Vec<(f64, f64)> = comps
        .iter()
        .map(|c| Ok((c.probability, spec.model.energy(c.n)?)))
        .collect::<Result<_>>()?;
    Ok(evaluate(grid, |t_ns| {
        let t_au = ns_to_au(TimeNs(t_ns)).0;
        terms.iter().fold(Complex64::new(0.0, 0.0), |acc, &(p, e)| {
            acc + unit_phasor(e, t_au) * p
        })
    }))
}

/// Autocorrelation with energies truncated after the cubic Taylor term:
/// `A3(t) = sum |c|^2 exp[-2 pi i (x t/T_cl - x^2 t/t_rev + x^3 t/t_sr)]`,
/// `x = n - center`. The constant phase is dropped since it cancels in
/// `|A|^2`.
pub fn autocorr_third_order(spec: &PacketSpec, grid: &TimeGrid) -> Result<AutocorrTrace> {
    let comps = gaussian_weights(spec)?;
    let scales = spec.model.time_scales(spec.center)?;
    let (t_cl, t_rev, t_sr) = (scales.t_cl.0, scales.t_rev.0, scales.t_sr.0);
    let terms: Vec<(f64, f64)> = comps
        .iter()
        .map(|c| (c.probability, f64::from(c.n) - spec.center))
        .collect();
    Ok(evaluate(grid, |t_ns| {
        let t = ns_to_au(TimeNs(t_ns)).0;
        terms.iter().fold(Complex64::new(0.0, 0.0), |acc, &(p, x)| {
            let cycles = x * t / t_cl - x * x * t / t_rev + x * x * x * t / t_sr;
            let theta = TAU * (cycles - cycles.round());
            let (s, c) = theta.sin_cos();
            acc + Complex64::new(c, -s) * p
        })
    }))
}

pub const TRACE_CSV_HEADER: &str = "t_ns,re_a,im_a,abs2";

/// CSV with header `t_ns,re_a,im_a,abs2`, one row per sample, LF endings and
/// shortest round-trip decimals.
pub fn trace_to_csv(trace: &AutocorrTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_CSV_HEADER);
    out.push('\n');
    for s in &trace.samples {
        out.push_str(&float(s.t_ns));
        out.push(',');
        out.push_str(&float(s.amplitude.re));
        out.push(',');
        out.push_str(&float(s.amplitude.im));
        out.push(',');
        out.push_str(&float(s.abs2));
        out.push('\n');
    }
    out
}

/// Parses [`trace_to_csv`] output. A two-column `t_ns,abs2` file is also
/// accepted for externally generated `|A|^2` data.
pub fn parse_trace_csv(text: &str) -> Result<AutocorrTrace> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = match lines.next() {
        Some(h) => h.trim(),
        None => return Ok(AutocorrTrace::default()),
    };
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let full = columns == ["t_ns", "re_a", "im_a", "abs2"];
    let short = columns == ["t_ns", "abs2"];
    if !full && !short {
        return Err(Error::Parse(format!(
            "unrecognised trace header '{header}'"
        )));
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: '{f}': {e}", i + 2)))
            })
            .collect::<Result<_>>()?;
        if fields.len() != columns.len() {
            return Err(Error::Parse(format!(
                "row {}: expected {} fields, found {}",
                i + 2,
                columns.len(),
                fields.len()
            )));
        }
        let sample = if full {
            TraceSample {
                t_ns: fields[0],
                amplitude: Complex64::new(fields[1], fields[2]),
                abs2: fields[3],
            }
        } else {
            TraceSample {
                t_ns: fields[0],
                amplitude: Complex64::new(fields[1].max(0.0).sqrt(), 0.0),
                abs2: fields[1],
            }
        };
        samples.push(sample);
    }
    Ok(AutocorrTrace::from_samples(samples))
}
