//! Acceptance criteria, one printed line each. Runs without the libtest
//! harness so the lines always reach the output; exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use subfrac_cli::config::PartialConfig;
use subfrac_cli::runner::{run_experiment, sweep_csv, with_pool, Report};
use subfrac_core::asymptotics::{
    bbm_sweep, geometry_suite, ms_sweep, run_suite, InequalitySuite, SweepResult, Verdict,
    VerdictRecord, BBM_S_GRID, MS_S_GRID,
};
use subfrac_core::functionals::{bump, gauss};
use subfrac_core::quadrature::ball_volume;
use subfrac_core::{HomogeneousGauge, OrliczFunction, QuadratureSpec};

type Outcome = Result<(bool, String), String>;

/// Sample count for every sweep: at least 10⁶ pairs per point.
const SWEEP_SAMPLES: usize = 1 << 20;

fn gauge(g: &str) -> HomogeneousGauge {
    let k = if g == "h1" { "koranyi" } else { "euclidean" };
    HomogeneousGauge::from_ids(g, k).unwrap()
}

fn sweep_spec() -> QuadratureSpec {
    QuadratureSpec::with_samples(SWEEP_SAMPLES, 0)
}

/// Composite Simpson rule; the test-side oracle for one-dimensional integrals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn hard_fails(records: &[VerdictRecord]) -> Vec<&str> {
    records.iter().filter(|r| r.is_hard_fail()).map(|r| r.name.as_str()).collect()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// The bump profile on the unit gauge ball.
fn bump_profile(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

fn euclidean_bbm() -> Outcome {
    let ng = gauge("r1");
    let u = gauss(&ng, 8.0).map_err(err)?;
    let phi = OrliczFunction::power(2.0).map_err(err)?;
    let r = bbm_sweep(&u, &phi, &ng, &BBM_S_GRID, &sweep_spec()).map_err(err)?;
    // K(1,2) = 1 and u′ = −2x e^{−x²}
    let oracle = simpson(|x| 4.0 * x * x * (-2.0 * x * x).exp(), -8.0, 8.0, 20_000);
    let closed = (PI / 2.0).sqrt();
    let e = rel(r.extrapolated, oracle);
    Ok((
        e <= 0.05 && rel(oracle, closed) < 1e-9,
        format!(
            "limit {:.5} ± {:.1e} vs √(π/2) = {:.5} (quadrature {:.5}), rel err {:.2}%",
            r.extrapolated,
            r.extrapolation_error(),
            closed,
            oracle,
            100.0 * e
        ),
    ))
}

fn euclidean_ms() -> Outcome {
    let ng = gauge("r1");
    let u = gauss(&ng, 8.0).map_err(err)?;
    let phi = OrliczFunction::power(2.0).map_err(err)?;
    let r = ms_sweep(&u, &phi, &ng, &MS_S_GRID, &sweep_spec()).map_err(err)?;
    // 2·(QC_b/p)·∫u² with Q = 1, C_b = 2, p = 2
    let energy = simpson(|x| (-2.0 * x * x).exp(), -8.0, 8.0, 20_000);
    let (q, cb, p) = (1.0, 2.0, 2.0);
    let target = 2.0 * (q * cb / p) * energy;
    let e = rel(r.extrapolated, target);
    Ok((
        e <= 0.05,
        format!(
            "limit {:.5} ± {:.1e} vs 2(QC_b/p)Φ_φ(u) = {:.5}, rel err {:.2}%",
            r.extrapolated,
            r.extrapolation_error(),
            target,
            100.0 * e
        ),
    ))
}

fn heisenberg_ms() -> Result<(bool, String, SweepResult), String> {
    let ng = gauge("h1");
    let u = bump(&ng, 1.0).map_err(err)?;
    let phi = OrliczFunction::power(2.0).map_err(err)?;
    let r = ms_sweep(&u, &phi, &ng, &MS_S_GRID, &sweep_spec()).map_err(err)?;
    let cb = ball_volume(&ng).value;
    let qcb = 4.0 * cb;
    // Φ_φ(u) for a radial profile: QC_b∫₀¹ r³ f(r)² dr
    let energy = qcb * simpson(|t| t.powi(3) * bump_profile(t).powi(2), 0.0, 1.0, 20_000);
    let target = 2.0 * (qcb / 2.0) * energy;
    let e = rel(r.extrapolated, target);
    let line = format!(
        "limit {:.5} ± {:.1e} vs 2(QC_b/2)Φ_φ(u) = {:.5} (C_b = {:.5}), rel err {:.2}%",
        r.extrapolated,
        r.extrapolation_error(),
        target,
        cb,
        100.0 * e
    );
    Ok((e <= 0.10, line, r))
}

fn orlicz_bands(square: &SweepResult) -> Outcome {
    let ng = gauge("h1");
    let u = bump(&ng, 1.0).map_err(err)?;
    let phi = OrliczFunction::power_log(2.0).map_err(err)?;
    let r = ms_sweep(&u, &phi, &ng, &MS_S_GRID, &sweep_spec()).map_err(err)?;
    let not_failed = |res: &SweepResult, name: &str| {
        res.verdict(name).is_some_and(|v| v.verdict != Verdict::Fail)
    };
    let band = not_failed(&r, "ms.band.lower") && not_failed(&r, "ms.band.upper");
    let tight = not_failed(square, "ms.tight_band.lower") && not_failed(square, "ms.tight_band.upper");
    let mut fails = hard_fails(&r.verdicts);
    fails.extend(hard_fails(&square.verdicts));
    Ok((
        band && tight && fails.is_empty(),
        format!(
            "power_log limit {:.5} in [{:.5}, {:.5}]: {}; t² tight band [{:.5}, {:.5}] holds: {}; hard fails {:?}",
            r.extrapolated,
            r.targets["ms_lower"].value,
            r.targets["ms_upper"].value,
            band,
            square.targets.get("ms_tight_lower").map_or(f64::NAN, |t| t.value),
            square.targets.get("ms_tight_upper").map_or(f64::NAN, |t| t.value),
            tight,
            fails
        ),
    ))
}

fn inequality_suite() -> Outcome {
    let ng = gauge("r1");
    let u = bump(&ng, 1.0).map_err(err)?;
    let spec = QuadratureSpec::with_samples(1 << 18, 0);
    let mut total = 0;
    let mut inconclusive = 0;
    let mut fails = Vec::new();
    let mut overlap = true;
    for phi in [OrliczFunction::power(2.0), OrliczFunction::power_log(2.0)] {
        let phi = phi.map_err(err)?;
        let r = run_suite(&u, &phi, &ng, &InequalitySuite::default(), &spec).map_err(err)?;
        total += r.records.len();
        for v in &r.records {
            if v.verdict == Verdict::Inconclusive {
                inconclusive += 1;
                overlap &= (v.lhs - v.rhs).abs() < v.error_bar;
            }
            if v.is_hard_fail() {
                fails.push(format!("{}:{}", phi.id(), v.name));
            }
        }
    }
    // the same sandwich on the Korányi sphere, reported alongside
    let h1 = gauge("h1");
    let only_sandwich = InequalitySuite {
        s_list: vec![],
        mollifier_eps: vec![],
        truncation_k: vec![],
        translations: 0,
        ..Default::default()
    };
    let hb = bump(&h1, 1.0).map_err(err)?;
    let square = OrliczFunction::power(2.0).map_err(err)?;
    let hr = run_suite(&hb, &square, &h1, &only_sandwich, &QuadratureSpec::with_samples(1 << 16, 0))
        .map_err(err)?;
    let h1_fails = hard_fails(&hr.records);
    Ok((
        fails.is_empty() && overlap,
        format!(
            "r1 bump, power:2 and power_log:2: {total} records, {inconclusive} inconclusive, hard fails {fails:?}; \
             h1 sandwich (reported only) fails at {h1_fails:?}"
        ),
    ))
}

fn geometry() -> Outcome {
    let spec = QuadratureSpec::with_samples(1 << 18, 1);
    let mut bad = Vec::new();
    let mut n = 0;
    for g in ["r1", "r2", "r3", "h1"] {
        let r = geometry_suite(&gauge(g), 100_000, &spec).map_err(err)?;
        n += r.records.len();
        bad.extend(
            r.records
                .iter()
                .filter(|v| v.verdict != Verdict::Pass)
                .map(|v| format!("{g}:{}", v.name)),
        );
    }
    Ok((bad.is_empty(), format!("{n} checks over r1, r2, r3, h1; not passing: {bad:?}")))
}

fn determinism() -> Outcome {
    let mut lines = Vec::new();
    let mut same = true;
    for text in [
        "experiment = \"bbm\"\n[field]\nname = \"gauss\"\nradius = 8\n[quad]\nsamples = 65536\nseed = 9",
        "experiment = \"ms\"\ngroup = \"h1\"\n[quad]\nsamples = 16384\nseed = 4",
    ] {
        let cfg = toml::from_str::<PartialConfig>(text).map_err(err)?.finish().map_err(err)?;
        let resolved = cfg.resolve().map_err(err)?;
        let mut csvs = Vec::new();
        for threads in [1, 4, 8] {
            let (out, _) = with_pool(Some(threads), || run_experiment(&cfg, &resolved)).map_err(err)?;
            match out.map_err(err)?.report {
                Report::Sweep(r) => csvs.push(sweep_csv(&r.points).map_err(err)?),
                _ => return Err("expected a sweep".into()),
            }
        }
        let ok = csvs.windows(2).all(|w| w[0] == w[1]);
        same &= ok;
        lines.push(format!("{} {}: {}", cfg.experiment, cfg.group, if ok { "identical" } else { "DIFFERENT" }));
    }
    Ok((same, format!("sweep.csv across 1/4/8 workers: {}", lines.join(", "))))
}

fn planar_probe() -> Outcome {
    let ng = gauge("r2");
    let u = bump(&ng, 1.0).map_err(err)?;
    let phi = OrliczFunction::power(2.0).map_err(err)?;
    let r = bbm_sweep(&u, &phi, &ng, &BBM_S_GRID, &sweep_spec()).map_err(err)?;
    // ∫|∇u|² = 2π∫₀¹ r f′(r)² dr with f′ = −2r/(1−r²)²·f
    let grad = 2.0 * PI
        * simpson(
            |t| {
                let d = -2.0 * t / (1.0 - t * t).powi(2) * bump_profile(t);
                if d.is_finite() { t * d * d } else { 0.0 }
            },
            0.0,
            1.0,
            20_000,
        );
    let directional = PI / 2.0 * grad;
    let norm_form = PI * grad;
    let (ed, en) = (rel(r.extrapolated, directional), rel(r.extrapolated, norm_form));
    let winner = match (ed <= 0.05, en <= 0.05) {
        (true, false) => "directional K(2,2) form matches",
        (false, true) => "‖z′‖ form matches",
        (true, true) => "both match",
        (false, false) => "neither matches",
    };
    Ok((
        r.extrapolated.is_finite(),
        format!(
            "limit {:.4}; directional (π/2)∫|∇u|² = {:.4} ({:.1}%), ‖z′‖ form π∫|∇u|² = {:.4} ({:.1}%): {winner}",
            r.extrapolated,
            directional,
            100.0 * ed,
            norm_form,
            100.0 * en
        ),
    ))
}

fn report(n: usize, title: &str, limit: Option<Duration>, t: Instant, outcome: Outcome, failed: &mut usize) {
    let elapsed = t.elapsed();
    let (ok, detail) = match outcome {
        Ok((ok, d)) => (ok, d),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let ok = ok && in_time;
    if !ok {
        *failed += 1;
    }
    println!(
        "criterion {n} [{}] {title}: {detail} ({:.1}s{})",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        if in_time { "" } else { ", over time budget" }
    );
}

fn main() {
    // libtest flags such as --nocapture or --list are accepted and ignored
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut failed = 0;
    let two_min = Some(Duration::from_secs(120));

    let t = Instant::now();
    report(1, "Euclidean BBM oracle", two_min, t, euclidean_bbm(), &mut failed);
    let t = Instant::now();
    report(2, "Euclidean MS oracle", two_min, t, euclidean_ms(), &mut failed);

    let t = Instant::now();
    let h = heisenberg_ms();
    let square = h.as_ref().ok().map(|(_, _, r)| r.clone());
    report(
        3,
        "Heisenberg MS",
        Some(Duration::from_secs(600)),
        t,
        h.map(|(ok, line, _)| (ok, line)),
        &mut failed,
    );

    let t = Instant::now();
    let bands = match &square {
        Some(sq) => orlicz_bands(sq),
        None => Err("criterion 3 sweep unavailable".into()),
    };
    report(4, "Orlicz band checks", None, t, bands, &mut failed);

    let t = Instant::now();
    report(5, "Inequality suite", None, t, inequality_suite(), &mut failed);
    let t = Instant::now();
    report(6, "Geometry and measure suite", None, t, geometry(), &mut failed);
    let t = Instant::now();
    report(7, "Determinism", None, t, determinism(), &mut failed);
    let t = Instant::now();
    report(8, "Open-question probe (non-gating)", None, t, planar_probe(), &mut failed);

    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
