//! Command-line front end.
//!
//! Every numeric flag may also be given in a `key = value` file passed with
//! `--config`; keys are the long flag names without dashes. Flags on the
//! command line win over the file, and the file wins over built-in
//! defaults.
//!
//! Errors are reported on stderr as a single `ERROR <code>: message` line.
//! Code 1 is a usage or input problem, code 2 a numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::defectlab::{compare_revival_structure, level_shift_profile, ComparisonConfig};
use crate::format::{float, sig};
use crate::hydrogenic::QuadratureRule;
use crate::packet::{
    autocorr_exact, autocorr_third_order, default_window, parse_trace_csv, trace_to_csv,
    PacketSpec, TimeGrid,
};
use crate::revival::{classify, predict_superrevivals, ClassifyConfig};
use crate::spectrum::EnergyModel;
use crate::squeezed::{
    default_levels, evolve, expand_in_eigenbasis, solve_parameters, uncertainty_csv,
    SqueezedFitConditions, DEFAULT_FIT_TOL,
};
use crate::units::{au_to_ns, ns_to_au, TimeAu, TimeNs};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "rydwave",
    version,
    about = "Rydberg wave-packet revivals and radial squeezed states"
)]
struct Cli {
    /// key = value file with defaults for any numeric flag
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classical, revival and superrevival time scales
    Timescales(TimescalesArgs),
    /// |A(t)|^2 of a Gaussian packet as CSV
    Autocorr(AutocorrArgs),
    /// Detect and label revival peaks
    Revivals(RevivalsArgs),
    /// Fit a radial squeezed state and optionally evolve it
    Squeezed(SqueezedArgs),
    /// Compare a quantum defect with an equivalent laser detuning
    Defect(DefectArgs),
}

#[derive(Args, Debug)]
struct TimescalesArgs {
    /// Packet center (may be noninteger)
    #[arg(long)]
    nbar: Option<f64>,
    /// Quantum defect; 0 selects hydrogen
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    q_max: Option<u32>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TraceModel {
    Exact,
    ThirdOrder,
}

#[derive(Args, Debug)]
struct PacketArgs {
    #[arg(long)]
    nbar: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Half-width of the retained level window (default ceil(5 sigma))
    #[arg(long)]
    window: Option<u32>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    t_start_ns: Option<f64>,
    #[arg(long)]
    t_end_ns: Option<f64>,
    #[arg(long)]
    grid_step_ns: Option<f64>,
    #[arg(long, value_enum)]
    model: Option<TraceModel>,
}

#[derive(Args, Debug)]
struct AutocorrArgs {
    #[command(flatten)]
    packet: PacketArgs,
    /// Output CSV (stdout when absent)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RevivalsArgs {
    #[command(flatten)]
    packet: PacketArgs,
    /// Read the trace from a CSV instead of computing it
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    #[arg(long)]
    q_max: Option<u32>,
    #[arg(long)]
    min_height: Option<f64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SqueezedArgs {
    #[arg(long)]
    nbar: Option<u32>,
    /// Residual tolerance of the fit
    #[arg(long)]
    tol: Option<f64>,
    /// Evolve the fitted packet and tabulate its uncertainties
    #[arg(long)]
    evolve: bool,
    /// End of the evolution (default 2 T_cl)
    #[arg(long)]
    t_end_ns: Option<f64>,
    /// Sampling step of the evolution (default T_cl / 40)
    #[arg(long)]
    grid_step_ns: Option<f64>,
    /// Uncertainty CSV (stdout when absent)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DefectArgs {
    /// Integer resonance level
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    delta: Option<f64>,
    /// Center offset of the hydrogen packet (default -delta)
    #[arg(long, allow_hyphen_values = true)]
    detuning: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    window: Option<u32>,
    /// Rigid energy shift for the level-shift table, hartree
    #[arg(long, allow_hyphen_values = true)]
    global_shift: Option<f64>,
    #[arg(long)]
    t_end_ns: Option<f64>,
    #[arg(long)]
    grid_step_ns: Option<f64>,
    /// Level-shift CSV (appended to the report when absent)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

const CONFIG_KEYS: &[&str] = &[
    "nbar",
    "sigma",
    "window",
    "delta",
    "detuning",
    "global-shift",
    "n",
    "t-start-ns",
    "t-end-ns",
    "grid-step-ns",
    "model",
    "q-max",
    "min-height",
    "tol",
];

/// Values read from a `--config` file.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {}: expected key = value", i + 1))
            })?;
            let key = k.trim().replace('_', "-");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::Parse(format!(
                    "config line {}: unknown key '{}'",
                    i + 1,
                    k.trim()
                )));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ConfigFile::parse(&text)
    }

    /// `flag`, else the file's value for `key`, else `default`.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.pick_opt(flag, key)?.unwrap_or(default))
    }

    fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("config key '{key}': cannot parse '{v}'"))),
            None => Ok(None),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) => 1,
            CliError::Run(e) if e.is_numerical() => 2,
            CliError::Run(_) => 1,
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns what
/// it prints on stdout. Output files are written as a side effect.
pub fn run<I, T>(args: I) -> std::result::Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Usage)?;
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let out = match &cli.command {
        Command::Timescales(a) => cmd_timescales(a, &cfg)?,
        Command::Autocorr(a) => cmd_autocorr(a, &cfg)?,
        Command::Revivals(a) => cmd_revivals(a, &cfg)?,
        Command::Squeezed(a) => cmd_squeezed(a, &cfg)?,
        Command::Defect(a) => cmd_defect(a, &cfg)?,
    };
    Ok(out)
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run(args) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            let _ = stdout.flush();
            0
        }
        Err(err) => {
            let code = err.exit_code();
            match &err {
                CliError::Usage(e) if code == 0 => {
                    let _ = e.print();
                }
                CliError::Usage(e) => {
                    let rendered = e.kind().to_string();
                    let detail = e.to_string();
                    let first = detail
                        .lines()
                        .next()
                        .unwrap_or(&rendered)
                        .trim_start_matches("error: ")
                        .to_string();
                    eprintln!("ERROR {code}: {first}");
                    for line in detail.lines().skip(1).filter(|l| !l.trim().is_empty()) {
                        eprintln!("{line}");
                    }
                }
                CliError::Run(e) => eprintln!("ERROR {code}: {e}"),
            }
            code
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn model_for(delta: f64) -> Result<EnergyModel> {
    if delta == 0.0 {
        Ok(EnergyModel::hydrogen())
    } else {
        EnergyModel::quantum_defect(delta)
    }
}

fn cmd_timescales(a: &TimescalesArgs, cfg: &ConfigFile) -> Result<String> {
    let nbar = cfg.pick(a.nbar, "nbar", 48.0)?;
    let delta = cfg.pick(a.delta, "delta", 0.0)?;
    let q_max = cfg.pick(a.q_max, "q-max", 12)?;
    let model = model_for(delta)?;
    let s = model.time_scales(nbar)?;
    let ns = |t: TimeAu| au_to_ns(t).0;
    let mut out = String::new();
    out.push_str(&format!(
        "model = {}\ncenter = {}\neffective center = {}\n",
        if delta == 0.0 {
            "hydrogen"
        } else {
            "quantum-defect"
        },
        float(nbar),
        float(model.effective_n(nbar)?)
    ));
    for (name, t) in [("T_cl", s.t_cl), ("t_rev", s.t_rev), ("t_sr", s.t_sr)] {
        out.push_str(&format!(
            "{name} = {} a.u. = {} ns\n",
            float(t.0),
            float(ns(t))
        ));
    }
    out.push_str(&format!("t_rev/T_cl = {}\n", float(s.t_rev.0 / s.t_cl.0)));
    out.push_str(&format!("T_cl ≈ {} ns\n", sig(ns(s.t_cl), 3)));
    out.push_str(&format!("t_rev ≈ {} ns\n", sig(ns(s.t_rev), 3)));
    out.push_str(&format!("t_sr/12 ≈ {} ns\n", sig(ns(s.t_sr) / 12.0, 3)));
    out.push_str(&format!("t_sr/6 ≈ {} ns\n", sig(ns(s.t_sr) / 6.0, 3)));
    let preds = predict_superrevivals(&s, q_max)?;
    if !preds.is_empty() {
        out.push_str("q,t_sr_over_q_ns,period_ns\n");
        for p in preds {
            out.push_str(&format!(
                "{},{},{}\n",
                p.q,
                float(ns(p.t_frac)),
                float(ns(p.period))
            ));
        }
    }
    Ok(out)
}

struct ResolvedPacket {
    spec: PacketSpec,
    grid: TimeGrid,
    model: TraceModel,
}

fn resolve_packet(a: &PacketArgs, cfg: &ConfigFile) -> Result<ResolvedPacket> {
    let nbar = cfg.pick(a.nbar, "nbar", 48.0)?;
    let sigma = cfg.pick(a.sigma, "sigma", 1.5)?;
    let delta = cfg.pick(a.delta, "delta", 0.0)?;
    let window = cfg.pick(a.window, "window", default_window(sigma))?;
    let spec = PacketSpec::new(nbar, sigma, model_for(delta)?)?.with_window(window)?;
    let start = cfg.pick(a.t_start_ns, "t-start-ns", 0.0)?;
    let end = cfg.pick(a.t_end_ns, "t-end-ns", 4.0)?;
    let step = cfg.pick(a.grid_step_ns, "grid-step-ns", 2e-4)?;
    if !(start < end) {
        return Err(Error::InvalidParameter(format!(
            "grid start {start} must precede end {end}"
        )));
    }
    let model = match a.model {
        Some(m) => m,
        None => match cfg.values.get("model").map(String::as_str) {
            None | Some("exact") => TraceModel::Exact,
            Some("third-order") => TraceModel::ThirdOrder,
            Some(other) => {
                return Err(Error::Parse(format!(
                    "config key 'model': unknown model '{other}'"
                )))
            }
        },
    };
    Ok(ResolvedPacket {
        spec,
        grid: TimeGrid::new(start, end, step)?,
        model,
    })
}

fn compute_trace(p: &ResolvedPacket) -> Result<crate::packet::AutocorrTrace> {
    match p.model {
        TraceModel::Exact => autocorr_exact(&p.spec, &p.grid),
        TraceModel::ThirdOrder => autocorr_third_order(&p.spec, &p.grid),
    }
}

fn cmd_autocorr(a: &AutocorrArgs, cfg: &ConfigFile) -> Result<String> {
    let p = resolve_packet(&a.packet, cfg)?;
    let csv = trace_to_csv(&compute_trace(&p)?);
    match &a.out {
        Some(path) => {
            write_file(path, &csv)?;
            Ok(format!(
                "wrote {} samples to {}\n",
                p.grid.len(),
                path.display()
            ))
        }
        None => Ok(csv),
    }
}

fn cmd_revivals(a: &RevivalsArgs, cfg: &ConfigFile) -> Result<String> {
    let p = resolve_packet(&a.packet, cfg)?;
    let trace = match &a.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            parse_trace_csv(&text)?
        }
        None => compute_trace(&p)?,
    };
    let scales = p.spec.model.time_scales(p.spec.center)?;
    let ccfg = ClassifyConfig {
        q_max: cfg.pick(a.q_max, "q-max", 12)?,
        min_height: cfg.pick(a.min_height, "min-height", 0.1)?,
        ..ClassifyConfig::default()
    };
    let report = classify(&trace, &scales, &ccfg)?;
    let text = format!("{}\n{}", report.to_table(), report.to_records());
    if let Some(path) = &a.out {
        write_file(path, &text)?;
    }
    Ok(text)
}

fn cmd_squeezed(a: &SqueezedArgs, cfg: &ConfigFile) -> Result<String> {
    let nbar = cfg.pick(a.nbar, "nbar", 48)?;
    let tol = cfg.pick(a.tol, "tol", DEFAULT_FIT_TOL)?;
    let cond = SqueezedFitConditions::for_level(nbar)?;
    let fit = solve_parameters(&cond, tol)?;
    let s = fit.state;
    let m = s.moments()?;
    let mut out = String::new();
    for (k, v) in [
        ("n_bar", float(cond.n_bar)),
        ("l", cond.l.to_string()),
        ("r_out", float(cond.r_out)),
        ("e_target", float(cond.e_target)),
        ("alpha", float(s.alpha)),
        ("gamma0", float(s.gamma0)),
        ("gamma1", float(s.gamma1)),
        ("residual_p_r", float(fit.residuals.momentum)),
        ("residual_r", float(fit.residuals.radius)),
        ("residual_energy", float(fit.residuals.energy)),
        ("tolerance", float(tol)),
        ("mean_r", float(m.r)),
        ("delta_r", float(m.delta_r())),
        ("delta_p", float(m.delta_p())),
        ("uncertainty_product_t0", float(m.uncertainty_product())),
        (
            "uncertainty_product_analytic",
            float(s.uncertainty_product()),
        ),
    ] {
        out.push_str(&format!("{k} = {v}\n"));
    }
    if !a.evolve {
        return Ok(out);
    }

    let model = EnergyModel::hydrogen();
    let expansion = expand_in_eigenbasis(&s, default_levels(nbar), &QuadratureRule::default())?;
    let evolved = evolve(&expansion, &model)?;
    let t_cl_ns = au_to_ns(model.time_scales(f64::from(nbar))?.t_cl).0;
    let end = cfg.pick(a.t_end_ns, "t-end-ns", 2.0 * t_cl_ns)?;
    let step = cfg.pick(a.grid_step_ns, "grid-step-ns", t_cl_ns / 40.0)?;
    let grid = TimeGrid::new(0.0, end, step)?;
    let rows: Vec<_> = grid
        .points()
        .par_iter()
        .map(|&t| evolved.observables(ns_to_au(TimeNs(t))))
        .collect();
    let u: Vec<f64> = rows.iter().map(|o| o.uncertainty_product()).collect();
    let (lo, hi) = u
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    out.push_str(&format!(
        "levels = {}..{}\ncaptured_probability = {}\ndominant_level = {}\n",
        expansion.coefficients.first().map_or(0, |c| c.0),
        expansion.coefficients.last().map_or(0, |c| c.0),
        float(expansion.captured),
        expansion.dominant_level().unwrap_or(0)
    ));
    out.push_str(&format!(
        "evolved_uncertainty_min = {}\nevolved_uncertainty_max = {}\n",
        float(lo),
        float(hi)
    ));
    let csv = uncertainty_csv(&rows);
    match &a.out {
        Some(path) => {
            write_file(path, &csv)?;
            out.push_str(&format!(
                "wrote {} samples to {}\n",
                rows.len(),
                path.display()
            ));
        }
        None => out.push_str(&csv),
    }
    Ok(out)
}

fn cmd_defect(a: &DefectArgs, cfg: &ConfigFile) -> Result<String> {
    let n = cfg.pick(a.n, "n", 48)?;
    let delta = cfg.pick(a.delta, "delta", 0.0)?;
    let detuning = cfg.pick(a.detuning, "detuning", -delta)?;
    let sigma = cfg.pick(a.sigma, "sigma", 1.5)?;
    let window = cfg.pick(a.window, "window", default_window(sigma))?;
    let shift = cfg.pick(a.global_shift, "global-shift", 0.0)?;
    let end = cfg.pick_opt(a.t_end_ns, "t-end-ns")?;
    let step = cfg.pick_opt(a.grid_step_ns, "grid-step-ns")?;

    let mut ccfg = ComparisonConfig::matched(n, delta, sigma);
    ccfg.detuning = detuning;
    ccfg.window = Some(window);
    ccfg.validate()?;
    if end.is_some() || step.is_some() {
        let s = crate::defectlab::scales_with_detuning(n, detuning)?;
        let end = end.unwrap_or(1.25 * au_to_ns(s.t_sr).0 / 6.0);
        let step = step.unwrap_or(au_to_ns(s.t_cl).0 / 80.0);
        ccfg.grid = Some(TimeGrid::new(0.0, end, step)?);
    }
    let cmp = compare_revival_structure(&ccfg)?;
    let lo = n.saturating_sub(window).max(1);
    let profile = level_shift_profile(lo..=n + window, delta, shift)?;

    let mut out = cmp.to_report();
    out.push_str(&format!(
        "level_shift levels={}..{} global_shift={} spread={}\n",
        lo,
        n + window,
        float(shift),
        float(profile.spread)
    ));
    let csv = profile.to_csv();
    match &a.out {
        Some(path) => {
            write_file(path, &csv)?;
            out.push_str(&format!(
                "wrote {} levels to {}\n",
                profile.rows.len(),
                path.display()
            ));
        }
        None => {
            out.push_str("[level_shift]\n");
            out.push_str(&csv);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let c =
            ConfigFile::parse("# comment\nnbar = 30\n\nsigma=2 # trailing\nq_max = 6\n").unwrap();
        assert_eq!(c.pick::<f64>(None, "nbar", 48.0).unwrap(), 30.0);
        assert_eq!(c.pick::<f64>(Some(40.0), "nbar", 48.0).unwrap(), 40.0);
        assert_eq!(c.pick::<u32>(None, "q-max", 12).unwrap(), 6);
        assert_eq!(c.pick::<f64>(None, "delta", 0.25).unwrap(), 0.25);
        assert!(ConfigFile::parse("bogus = 1").is_err());
        assert!(ConfigFile::parse("nbar 48").is_err());
        let bad = ConfigFile::parse("nbar = x").unwrap();
        assert!(bad.pick::<f64>(None, "nbar", 1.0).is_err());
    }

    #[test]
    fn exit_codes() {
        let e = run(["rydwave", "nonsense"]).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        let e = run(["rydwave", "--help"]).unwrap_err();
        assert_eq!(e.exit_code(), 0);
        let e = run(["rydwave", "timescales", "--nbar", "-3"]).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
