//! Peak analysis of autocorrelation traces: detection, local periodicity and
//! labelling of the full revival, fractional superrevivals (`t_sr / q`, `q` a
//! multiple of 3) and the superrevival at `t_sr / 6`.

use std::fmt;

use crate::format::float;
use crate::packet::AutocorrTrace;
use crate::spectrum::TimeScales;
use crate::units::{au_to_ns, TimeAu};
use crate::{Error, Result};

/// A local maximum of `|A|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t_ns: f64,
    pub height: f64,
    pub local_period_ns: Option<f64>,
}

/// Predicted fractional superrevival: time `t_sr / q` and period `(3/q) t_rev`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperrevivalPrediction {
    pub q: u32,
    pub t_frac: TimeAu,
    pub period: TimeAu,
}

/// Predictions for `q = 3, 6, 9, ... <= q_max`.
pub fn predict_superrevivals(
    scales: &TimeScales,
    q_max: u32,
) -> Result<Vec<SuperrevivalPrediction>> {
    if q_max < 3 {
        return Err(Error::InvalidParameter(format!(
            "q_max must be at least 3, got {q_max}"
        )));
    }
    Ok((1..=q_max / 3)
        .map(|i| {
            let q = 3 * i;
            let qf = f64::from(q);
            SuperrevivalPrediction {
                q,
                t_frac: TimeAu(scales.t_sr.0 / qf),
                period: TimeAu(3.0 / qf * scales.t_rev.0),
            }
        })
        .collect())
}

/// Three-point parabolic refinement of the maximum at sample `i`.
fn refine(t: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let h = 0.5 * (t[i + 1] - t[i - 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom >= 0.0 {
        return (t[i], y1);
    }
    let offset = (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5);
    let height = y1 - 0.25 * (y0 - y2) * offset;
    (t[i] + offset * h, height.min(1.0))
}

/// Rounding noise in `|A|^2`; differences below this do not make a peak.
const FLAT: f64 = 1e-12;

/// Interior local maxima of `y` with height at least `min_height`, refined
/// parabolically. A two-sample plateau counts once, at its first sample.
fn local_maxima(t: &[f64], y: &[f64], min_height: f64) -> Vec<(f64, f64)> {
    if y.len() < 3 {
        return Vec::new();
    }
    (1..y.len() - 1)
        .filter(|&i| {
            y[i] > y[i - 1]
                && y[i] >= y[i + 1]
                && y[i] - y[i - 1].min(y[i + 1]) > FLAT
                && y[i] >= min_height
        })
        .map(|i| refine(t, y, i))
        .collect()
}

/// Local maxima of `|A|^2` above `min_height`, thinned greedily from the
/// highest down so that no two survivors are closer than `min_separation_ns`.
/// Returned in time order.
pub fn detect_peaks(
    trace: &AutocorrTrace,
    min_height: f64,
    min_separation_ns: f64,
) -> Result<Vec<Peak>> {
    if !(min_height > 0.0 && min_height < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "min_height must lie in (0, 1), got {min_height}"
        )));
    }
    if let Some(step) = trace.step_ns() {
        if !(min_separation_ns > step) {
            return Err(Error::InvalidParameter(format!(
                "min_separation {min_separation_ns} ns must exceed the grid step {step} ns"
            )));
        }
    }
    let t = trace.times();
    let y = trace.abs2();
    let mut candidates = local_maxima(&t, &y, min_height);
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    // Accepted times kept sorted for the neighbour test.
    let mut accepted: Vec<(f64, f64)> = Vec::new();
    for (tc, hc) in candidates {
        let pos = accepted.partition_point(|p| p.0 < tc);
        let clear_left = pos == 0 || tc - accepted[pos - 1].0 >= min_separation_ns;
        let clear_right = pos == accepted.len() || accepted[pos].0 - tc >= min_separation_ns;
        if clear_left && clear_right {
            accepted.insert(pos, (tc, hc));
        }
    }
    Ok(accepted
        .into_iter()
        .map(|(t_ns, height)| Peak {
            t_ns,
            height,
            local_period_ns: None,
        })
        .collect())
}

/// Peaks at least this fraction of the window maximum count as the
/// repeating structure.
const MAJOR_FRACTION: f64 = 0.75;

/// Period of the repeating structure of `|A|^2` inside a window, or `None`
/// when fewer than three repetitions are found.
///
/// Near fractional superrevivals each repetition is a cluster of maxima one
/// classical period apart. The dominant maxima (within 75% of the window
/// maximum) are grouped into clusters by splitting at gaps longer than the
/// geometric mean of the shortest and longest gap. The result is the
/// median spacing of the height-weighted cluster centroids.
pub fn local_period(
    trace: &AutocorrTrace,
    window_center_ns: f64,
    window_width_ns: f64,
) -> Option<f64> {
    let lo = window_center_ns - 0.5 * window_width_ns;
    let hi = window_center_ns + 0.5 * window_width_ns;
    let (t, y): (Vec<f64>, Vec<f64>) = trace
        .samples
        .iter()
        .filter(|s| s.t_ns >= lo && s.t_ns <= hi)
        .map(|s| (s.t_ns, s.abs2))
        .unzip();
    if t.len() < 8 {
        return None;
    }
    let maxima = local_maxima(&t, &y, f64::MIN_POSITIVE);
    let top = maxima.iter().map(|m| m.1).fold(0.0, f64::max);
    if top <= 0.0 {
        return None;
    }
    let major: Vec<(f64, f64)> = maxima
        .into_iter()
        .filter(|m| m.1 >= MAJOR_FRACTION * top)
        .collect();
    if major.len() < 3 {
        return None;
    }
    let gaps: Vec<f64> = major.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let g_min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let g_max = gaps.iter().copied().fold(0.0, f64::max);
    let split_at = if g_max > 2.0 * g_min {
        (g_min * g_max).sqrt()
    } else {
        0.0
    };
    let mut centroids = Vec::new();
    let mut acc = (major[0].0 * major[0].1, major[0].1);
    for (i, gap) in gaps.iter().enumerate() {
        let next = major[i + 1];
        if *gap < split_at {
            acc.0 += next.0 * next.1;
            acc.1 += next.1;
        } else {
            centroids.push(acc.0 / acc.1);
            acc = (next.0 * next.1, next.1);
        }
    }
    centroids.push(acc.0 / acc.1);
    if centroids.len() < 3 {
        return None;
    }
    let mut spacings: Vec<f64> = centroids.windows(2).map(|w| w[1] - w[0]).collect();
    spacings.sort_by(f64::total_cmp);
    let m = spacings.len();
    Some(if m % 2 == 1 {
        spacings[m / 2]
    } else {
        0.5 * (spacings[m / 2 - 1] + spacings[m / 2])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevivalKind {
    Revival,
    FractionalSuperrevival { q: u32 },
    Superrevival,
}

impl RevivalKind {
    /// Single-token label for the structured output.
    pub fn token(&self) -> String {
        match self {
            RevivalKind::Revival => "revival".into(),
            RevivalKind::FractionalSuperrevival { q } => format!("fractional_superrevival_q{q}"),
            RevivalKind::Superrevival => "superrevival".into(),
        }
    }
}

impl fmt::Display for RevivalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RevivalKind::Revival => write!(f, "revival"),
            RevivalKind::FractionalSuperrevival { q } => {
                write!(f, "fractional superrevival (q={q})")
            }
            RevivalKind::Superrevival => write!(f, "superrevival"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub kind: RevivalKind,
    pub t_pred_ns: f64,
    pub period_pred_ns: f64,
}

/// A detected peak associated with a prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub prediction: usize,
    pub peak: usize,
    /// Peak time minus predicted time.
    pub residual_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RevivalReport {
    pub peaks: Vec<Peak>,
    pub predictions: Vec<Prediction>,
    pub matches: Vec<Match>,
    /// Whether the superrevival peak is higher than the revival peak, when
    /// both were found.
    pub superrevival_exceeds_revival: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyConfig {
    pub q_max: u32,
    pub min_height: f64,
    /// Defaults to `0.4 T_cl`, or two grid steps if that is larger.
    pub min_separation_ns: Option<f64>,
    /// Matching window as a fraction of the predicted time.
    pub match_tolerance: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            q_max: 12,
            min_height: 0.1,
            min_separation_ns: None,
            match_tolerance: 0.05,
        }
    }
}

/// Detects peaks and associates them with the predicted revival times.
///
/// Only predictions inside the sampled time span are reported. Each one is
/// matched to the highest detected peak within `match_tolerance * t_pred` of
/// it; the highest rather than the nearest because every revival is
/// surrounded by smaller maxima one classical period apart.
pub fn classify(
    trace: &AutocorrTrace,
    scales: &TimeScales,
    cfg: &ClassifyConfig,
) -> Result<RevivalReport> {
    if trace.is_empty() {
        return Ok(RevivalReport::default());
    }
    if !(cfg.match_tolerance > 0.0) {
        return Err(Error::InvalidParameter(
            "match tolerance must be positive".into(),
        ));
    }
    let t_cl_ns = au_to_ns(scales.t_cl).0;
    // The default must stay above the grid step for traces read from files
    // that are sampled more coarsely than the classical period.
    let min_sep = cfg
        .min_separation_ns
        .unwrap_or_else(|| (0.4 * t_cl_ns).max(2.0 * trace.step_ns().unwrap_or(0.0)));
    let mut peaks = detect_peaks(trace, cfg.min_height, min_sep)?;

    let mut predictions = vec![Prediction {
        kind: RevivalKind::Revival,
        t_pred_ns: au_to_ns(scales.t_rev).0,
        period_pred_ns: t_cl_ns,
    }];
    for p in predict_superrevivals(scales, cfg.q_max)? {
        let kind = if p.q == 6 {
            RevivalKind::Superrevival
        } else {
            RevivalKind::FractionalSuperrevival { q: p.q }
        };
        predictions.push(Prediction {
            kind,
            t_pred_ns: au_to_ns(p.t_frac).0,
            period_pred_ns: au_to_ns(p.period).0,
        });
    }
    predictions.retain(|p| p.t_pred_ns >= trace.t_start_ns && p.t_pred_ns <= trace.t_end_ns);
    predictions.sort_by(|a, b| a.t_pred_ns.total_cmp(&b.t_pred_ns));

    let mut matches = Vec::new();
    for (pi, pred) in predictions.iter().enumerate() {
        let tol = cfg.match_tolerance * pred.t_pred_ns;
        let best = peaks
            .iter()
            .enumerate()
            .filter(|(_, pk)| (pk.t_ns - pred.t_pred_ns).abs() <= tol)
            .max_by(|a, b| {
                a.1.height.total_cmp(&b.1.height).then_with(|| {
                    // Prefer the nearer peak on equal height.
                    let da = (a.1.t_ns - pred.t_pred_ns).abs();
                    let db = (b.1.t_ns - pred.t_pred_ns).abs();
                    db.total_cmp(&da)
                })
            });
        if let Some((ki, pk)) = best {
            matches.push(Match {
                prediction: pi,
                peak: ki,
                residual_ns: pk.t_ns - pred.t_pred_ns,
            });
        }
    }
    for m in &matches {
        let pred = predictions[m.prediction];
        peaks[m.peak].local_period_ns =
            local_period(trace, pred.t_pred_ns, 4.0 * pred.period_pred_ns);
    }

    let height_of = |kind: RevivalKind| {
        matches
            .iter()
            .find(|m| predictions[m.prediction].kind == kind)
            .map(|m| peaks[m.peak].height)
    };
    let superrevival_exceeds_revival = match (
        height_of(RevivalKind::Superrevival),
        height_of(RevivalKind::Revival),
    ) {
        (Some(sr), Some(rev)) => Some(sr > rev),
        _ => None,
    };
    Ok(RevivalReport {
        peaks,
        predictions,
        matches,
        superrevival_exceeds_revival,
    })
}

impl RevivalReport {
    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty() && self.predictions.is_empty()
    }

    pub fn match_for(&self, kind: RevivalKind) -> Option<(&Match, &Peak)> {
        self.matches
            .iter()
            .find(|m| self.predictions[m.prediction].kind == kind)
            .map(|m| (m, &self.peaks[m.peak]))
    }

    /// Labels of all matched predictions, in time order.
    pub fn matched_kinds(&self) -> Vec<RevivalKind> {
        self.matches
            .iter()
            .map(|m| self.predictions[m.prediction].kind)
            .collect()
    }

    /// Human-readable table of predictions and their matches.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        if self.peaks.is_empty() {
            out.push_str("no peaks detected\n");
        } else {
            out.push_str(&format!("{} peaks detected\n", self.peaks.len()));
        }
        if self.predictions.is_empty() {
            return out;
        }
        out.push_str(&format!(
            "{:<34} {:>10} {:>11} {:>10} {:>8} {:>10} {:>12}\n",
            "label", "t_pred_ns", "period_pred", "t_peak_ns", "height", "period_ns", "residual_ns"
        ));
        for (pi, pred) in self.predictions.iter().enumerate() {
            let m = self.matches.iter().find(|m| m.prediction == pi);
            let (t_peak, height, period, residual) = match m {
                Some(m) => {
                    let pk = &self.peaks[m.peak];
                    (
                        format!("{:.4}", pk.t_ns),
                        format!("{:.4}", pk.height),
                        pk.local_period_ns.map_or("-".into(), |p| format!("{p:.4}")),
                        format!("{:+.4}", m.residual_ns),
                    )
                }
                None => ("absent".into(), "-".into(), "-".into(), "-".into()),
            };
            out.push_str(&format!(
                "{:<34} {:>10.4} {:>11.4} {:>10} {:>8} {:>10} {:>12}\n",
                pred.kind.to_string(),
                pred.t_pred_ns,
                pred.period_pred_ns,
                t_peak,
                height,
                period,
                residual
            ));
        }
        if let Some(flag) = self.superrevival_exceeds_revival {
            out.push_str(&format!(
                "superrevival higher than revival: {}\n",
                if flag { "yes" } else { "no" }
            ));
        }
        out
    }

    /// Machine-readable records: one `prediction` line per prediction and
    /// one `peak` line per detected peak, as space-separated `key=value`
    /// pairs. Missing values are written as `none`.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for (pi, pred) in self.predictions.iter().enumerate() {
            let status = if self.matches.iter().any(|m| m.prediction == pi) {
                "matched"
            } else {
                "absent"
            };
            out.push_str(&format!(
                "prediction label={} t_pred_ns={} period_pred_ns={} status={}\n",
                pred.kind.token(),
                float(pred.t_pred_ns),
                float(pred.period_pred_ns),
                status
            ));
        }
        for (ki, pk) in self.peaks.iter().enumerate() {
            let m = self.matches.iter().find(|m| m.peak == ki);
            let label = m.map_or("none".into(), |m| {
                self.predictions[m.prediction].kind.token()
            });
            let residual = m.map_or("none".into(), |m| float(m.residual_ns));
            out.push_str(&format!(
                "peak t_ns={} height={} period_ns={} label={} residual_ns={}\n",
                float(pk.t_ns),
                float(pk.height),
                pk.local_period_ns.map_or("none".into(), float),
                label,
                residual
            ));
        }
        out
    }
}
