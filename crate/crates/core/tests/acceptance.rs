//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rydwave::defectlab::{
    level_shift_profile, scales_relative_difference, scales_with_defect, scales_with_detuning,
    spacing_differences,
};
use rydwave::hydrogenic::{overlap, QuadratureRule, RadialEigenstate};
use rydwave::packet::{autocorr_exact, autocorr_third_order, AutocorrTrace, PacketSpec, TimeGrid};
use rydwave::revival::{classify, detect_peaks, local_period, ClassifyConfig, Peak};
use rydwave::spectrum::{EnergyModel, TimeScales};
use rydwave::squeezed::{
    default_levels, evolve, expand_in_eigenbasis, solve_parameters, RadialSqueezedState,
    SqueezedFitConditions,
};
use rydwave::units::{au_to_ns, TimeAu};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn scales48() -> TimeScales {
    EnergyModel::hydrogen().time_scales(48.0).unwrap()
}

fn ns(t: TimeAu) -> f64 {
    au_to_ns(t).0
}

fn figure_one_spec() -> PacketSpec {
    PacketSpec::new(48.0, 1.5, EnergyModel::hydrogen())
        .unwrap()
        .with_window(8)
        .unwrap()
}

fn figure_one_grid() -> TimeGrid {
    TimeGrid::new(0.0, 4.0, 2e-4).unwrap()
}

fn highest_near(peaks: &[Peak], t: f64, half_width: f64) -> Option<&Peak> {
    peaks
        .iter()
        .filter(|p| (p.t_ns - t).abs() <= half_width)
        .max_by(|a, b| a.height.total_cmp(&b.height))
}

fn criterion_1() -> Outcome {
    let s = scales48();
    let t_rev = ns(s.t_rev);
    let sr12 = ns(s.t_sr) / 12.0;
    let sr6 = ns(s.t_sr) / 6.0;
    let pass = (0.5375..=0.5385).contains(&t_rev)
        && (1.608..=1.620).contains(&sr12)
        && (3.220..=3.240).contains(&sr6);
    outcome(
        pass,
        format!("t_rev={t_rev:.5} ns, t_sr/12={sr12:.4} ns, t_sr/6={sr6:.4} ns"),
    )
}

fn criterion_2() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let start = Instant::now();
    let (trace, peaks) = pool.install(|| {
        let trace = autocorr_exact(&figure_one_spec(), &figure_one_grid()).unwrap();
        let peaks = detect_peaks(&trace, 0.1, 0.4 * ns(scales48().t_cl)).unwrap();
        (trace, peaks)
    });
    let elapsed = start.elapsed().as_secs_f64();
    let t_rev = ns(scales48().t_rev);
    let a0 = trace.samples[0].abs2;
    let rev = highest_near(&peaks, t_rev, 0.03);
    let sr = highest_near(&peaks, 3.23, 0.06);
    let (a, b, c, d) = (
        (a0 - 1.0).abs() <= 1e-10,
        rev.is_some(),
        sr.is_some(),
        matches!((rev, sr), (Some(r), Some(s)) if s.height > r.height),
    );
    outcome(
        a && b && c && d && elapsed < 30.0,
        format!(
            "|A(0)|^2-1={:.1e}, revival peak {}, superrevival peak {}, single-thread {:.2} s",
            a0 - 1.0,
            rev.map_or("none".into(), |p| format!(
                "{:.4} ns h={:.3}",
                p.t_ns, p.height
            )),
            sr.map_or("none".into(), |p| format!(
                "{:.4} ns h={:.3}",
                p.t_ns, p.height
            )),
            elapsed
        ),
    )
}

fn exact_trace() -> AutocorrTrace {
    autocorr_exact(&figure_one_spec(), &figure_one_grid()).unwrap()
}

fn criterion_3() -> Outcome {
    let trace = exact_trace();
    let t_rev = ns(scales48().t_rev);
    let p12 = local_period(&trace, 1.61, 0.6);
    let p6 = local_period(&trace, 3.23, 1.0);
    let within =
        |p: Option<f64>, target: f64| p.is_some_and(|p| ((p - target) / target).abs() <= 0.10);
    outcome(
        within(p12, t_rev / 4.0) && within(p6, t_rev / 2.0),
        format!(
            "period near 1.61 ns = {:?} (t_rev/4 = {:.4}), near 3.23 ns = {:?} (t_rev/2 = {:.4})",
            p12.map(|p| (p * 1e4).round() / 1e4),
            t_rev / 4.0,
            p6.map(|p| (p * 1e4).round() / 1e4),
            t_rev / 2.0
        ),
    )
}

fn criterion_4() -> Outcome {
    let exact = exact_trace();
    let third = autocorr_third_order(&figure_one_spec(), &figure_one_grid()).unwrap();
    let (worst, at) = exact
        .samples
        .iter()
        .zip(&third.samples)
        .map(|(a, b)| ((a.abs2 - b.abs2).abs(), a.t_ns))
        .fold((0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
    let cfg = ClassifyConfig::default();
    let la = classify(&exact, &scales48(), &cfg).unwrap().matched_kinds();
    let lb = classify(&third, &scales48(), &cfg).unwrap().matched_kinds();
    let labels: Vec<String> = la.iter().map(|k| k.token()).collect();
    outcome(
        worst < 0.05 && la == lb,
        format!(
            "max deviation {worst:.4} at {at:.4} ns (bound 0.05), labels {} ({})",
            if la == lb { "agree" } else { "differ" },
            labels.join(",")
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut worst_moment: f64 = 0.0;
    let mut worst_product: f64 = 0.0;
    let mut min_product = f64::MAX;
    for alpha in [1.0, 2.0, 5.0] {
        for g0 in [0.01, 0.1, 1.0] {
            for g1 in [0.0, 0.05] {
                let s = RadialSqueezedState::new(alpha, g0, g1).unwrap();
                let (w, product, _) = common::moment_check(&s);
                worst_moment = worst_moment.max(w);
                worst_product = worst_product.max((product - s.uncertainty_product()).abs());
                min_product = min_product.min(product);
            }
        }
    }
    let mut worst_residual: f64 = 0.0;
    for n in [10, 24, 48] {
        let fit = solve_parameters(&SqueezedFitConditions::for_level(n).unwrap(), 1e-10).unwrap();
        worst_residual = worst_residual.max(fit.residuals.max());
    }
    let state = solve_parameters(&SqueezedFitConditions::for_level(48).unwrap(), 1e-10)
        .unwrap()
        .state;
    let exp = expand_in_eigenbasis(&state, default_levels(48), &QuadratureRule::default()).unwrap();
    let ev = evolve(&exp, &EnergyModel::hydrogen()).unwrap();
    let track = ev.track(TimeAu(2.0 * scales48().t_cl.0), 161);
    let u: Vec<f64> = track.iter().map(|o| o.uncertainty_product()).collect();
    let variation = u.iter().map(|x| (x - u[0]).abs()).fold(0.0, f64::max) / u[0];
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst_moment < 1e-8
            && worst_residual < 1e-10
            && worst_product < 1e-8
            && min_product > 0.5
            && variation >= 0.05
            && elapsed < 120.0,
        format!(
            "moment rel err {worst_moment:.1e}, solver residual {worst_residual:.1e}, product err {worst_product:.1e} (min {min_product:.4}), evolved variation {:.0}%, {elapsed:.1} s",
            100.0 * variation
        ),
    )
}

fn criterion_6() -> Outcome {
    let rule = QuadratureRule::default();
    let mut worst: f64 = 0.0;
    for m in 46..=50 {
        let state = RadialEigenstate::new(m, 1).unwrap();
        for n in 46..=50 {
            let v = overlap(&state, n, 1, &rule).unwrap();
            let target = if m == n { 1.0 } else { 0.0 };
            worst = worst.max((v.re - target).abs().max(v.im.abs()));
        }
    }
    let state = solve_parameters(&SqueezedFitConditions::for_level(48).unwrap(), 1e-10)
        .unwrap()
        .state;
    let exp = expand_in_eigenbasis(&state, default_levels(48), &rule).unwrap();
    let dominant = exp.dominant_level();
    outcome(
        worst < 1e-7 && exp.captured > 0.99 && dominant == Some(48),
        format!(
            "orthonormality error {worst:.1e}, captured {:.10}, dominant n={dominant:?}",
            exp.captured
        ),
    )
}

fn criterion_7() -> Outcome {
    let a = scales_with_defect(48, 0.5).unwrap();
    let b = scales_with_detuning(48, -0.5).unwrap();
    let rel = scales_relative_difference(&a, &b);
    let spacings = spacing_differences(44..=52, 0.5).unwrap();
    let all_differ = spacings.iter().all(|r| r.3 != 0.0);
    let min_diff = spacings.iter().map(|r| r.3.abs()).fold(f64::MAX, f64::min);
    let defect_spread = level_shift_profile(44..=52, 0.5, 0.0).unwrap().spread;
    let rigid_spread = level_shift_profile(44..=52, 0.0, 1e-6).unwrap().spread;
    outcome(
        rel <= 1e-12 && all_differ && defect_spread > 0.0 && rigid_spread == 0.0,
        format!(
            "scale rel diff {rel:.1e}, min spacing diff {min_diff:.2e}, spread defect {defect_spread:.2e} rigid {rigid_spread:e}"
        ),
    )
}

fn run_cli(args: &[&str], threads: Option<&str>) -> Vec<u8> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rydwave"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    let o = cmd.output().unwrap();
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o.stdout
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let (auto, rev, sq, def) = (
        p("trace.csv"),
        p("revivals.txt"),
        p("uncertainty.csv"),
        p("levels.csv"),
    );
    let runs: Vec<Vec<&str>> = vec![
        vec!["timescales", "--nbar", "48"],
        vec![
            "autocorr",
            "--nbar",
            "48",
            "--sigma",
            "1.5",
            "--t-end-ns",
            "4",
            "--out",
            &auto,
        ],
        vec![
            "revivals", "--nbar", "48", "--sigma", "1.5", "--window", "8", "--out", &rev,
        ],
        vec![
            "squeezed",
            "--nbar",
            "48",
            "--evolve",
            "--t-end-ns",
            "0.05",
            "--out",
            &sq,
        ],
        vec!["defect", "--n", "48", "--delta", "0.5", "--out", &def],
    ];
    let read = |path: Option<&str>| path.map(|p| std::fs::read(Path::new(p)).unwrap());
    let mut mismatched = Vec::new();
    for args in &runs {
        let out_path = args.iter().position(|a| *a == "--out").map(|i| args[i + 1]);
        let first = (run_cli(args, None), read(out_path));
        let second = (run_cli(args, None), read(out_path));
        let single = (run_cli(args, Some("1")), read(out_path));
        if first != second || first != single {
            mismatched.push(args[0]);
        }
    }
    outcome(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!(
                "{} subcommands byte-identical over 3 runs (one single-threaded)",
                runs.len()
            )
        } else {
            format!("outputs differ for {mismatched:?}")
        },
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("time-scale anchors", criterion_1),
        ("figure-1 reproduction", criterion_2),
        ("fractional-superrevival periodicity", criterion_3),
        ("third-order model fidelity", criterion_4),
        ("squeezed-state suite", criterion_5),
        ("eigenbasis hygiene", criterion_6),
        ("defect/detuning asymmetry", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} {}: {} -- {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            name,
            result.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
