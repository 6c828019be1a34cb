//! Experiment execution and artifact writing.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use subfrac_core::asymptotics::{
    bbm_sweep, geometry_suite, ms_sweep, run_suite, InequalitySuite, Regime, SweepPoint,
    SweepResult, TargetValue, Verdict, VerdictRecord,
};
use subfrac_core::quadrature::{ball_volume, sphere_integral, BallVolume};
use subfrac_core::{Error, HomogeneousGauge, QuadratureSpec};

use crate::config::{Experiment, ExperimentConfig, Resolved};

/// Samples per norm axiom in the props experiment.
pub const AXIOM_SAMPLES: usize = 100_000;
pub const THREADS_VAR: &str = "SUBFRAC_THREADS";

/// Exit status classes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or identifiers. Nothing is written.
    Usage(anyhow::Error),
    /// The numerics gave up (divergent or non-finite integrals).
    Numerical(Error),
    Io(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "error: {e:#}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e:#}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. }
            | Error::Divergent(_)
            | Error::NonConvergent(_)
            | Error::GrowthCondition(_) => CliError::Numerical(e),
            other => CliError::Usage(other.into()),
        }
    }
}

/// Geometric constants of a group with a gauge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub group: String,
    pub gauge: String,
    pub homogeneous_dim: u32,
    pub horizontal_dim: usize,
    pub c_b: f64,
    pub c_b_stderr: f64,
    pub c_b_samples: usize,
    pub c_b_seed: u64,
    pub qc_b: f64,
    pub qc_b_stderr: f64,
    /// σ(S) by direct sphere quadrature, an independent check on `qc_b`.
    pub sphere_measure: f64,
    pub sphere_measure_stderr: f64,
}

pub fn constants(ng: &HomogeneousGauge, spec: &QuadratureSpec) -> Result<ConstantsReport, Error> {
    let g = ng.group();
    let cb = ball_volume(ng);
    let q = g.homogeneous_dim();
    let sigma = sphere_integral(|_| 1.0, ng, spec)?;
    Ok(ConstantsReport {
        group: g.id().into(),
        gauge: ng.kind().id().into(),
        homogeneous_dim: q,
        horizontal_dim: g.horizontal_dim(),
        c_b: cb.value,
        c_b_stderr: cb.stderr,
        c_b_samples: cb.samples,
        c_b_seed: cb.seed,
        qc_b: q as f64 * cb.value,
        qc_b_stderr: q as f64 * cb.stderr,
        sphere_measure: sigma.value,
        sphere_measure_stderr: sigma.stderr,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stage {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub records: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub hard_fails: usize,
}

impl Summary {
    pub fn of(records: &[VerdictRecord]) -> Self {
        let count = |v| records.iter().filter(|r| r.verdict == v).count();
        Summary {
            records: records.len(),
            pass: count(Verdict::Pass),
            fail: count(Verdict::Fail),
            inconclusive: count(Verdict::Inconclusive),
            hard_fails: records.iter().filter(|r| r.is_hard_fail()).count(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.hard_fails > 0 {
            2
        } else {
            0
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Sweep(SweepResult),
    Props(Vec<VerdictRecord>),
    Constants(ConstantsReport),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub report: Report,
    pub ball_volume: BallVolume,
    pub timings: Vec<Stage>,
}

impl ExperimentOutput {
    pub fn records(&self) -> &[VerdictRecord] {
        match &self.report {
            Report::Sweep(r) => &r.verdicts,
            Report::Props(r) => r,
            Report::Constants(_) => &[],
        }
    }

    pub fn summary(&self) -> Summary {
        Summary::of(self.records())
    }
}

fn timed<T>(timings: &mut Vec<Stage>, stage: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    timings.push(Stage {
        stage: stage.into(),
        seconds: t.elapsed().as_secs_f64(),
    });
    out
}

/// Runs the experiment without touching the filesystem.
pub fn run_experiment(cfg: &ExperimentConfig, r: &Resolved) -> Result<ExperimentOutput, Error> {
    let mut timings = Vec::new();
    let ball = timed(&mut timings, "ball_volume", || ball_volume(&r.gauge));
    let report = match cfg.experiment {
        Experiment::Bbm => Report::Sweep(timed(&mut timings, "sweep", || {
            bbm_sweep(&r.field, &r.phi, &r.gauge, &cfg.s_grid, &r.spec)
        })?),
        Experiment::Ms => Report::Sweep(timed(&mut timings, "sweep", || {
            ms_sweep(&r.field, &r.phi, &r.gauge, &cfg.s_grid, &r.spec)
        })?),
        Experiment::Props => {
            let mut records = timed(&mut timings, "geometry", || {
                geometry_suite(&r.gauge, AXIOM_SAMPLES, &r.spec)
            })?
            .records;
            let suite = InequalitySuite {
                s_list: cfg.s_grid.clone(),
                seed: cfg.quad.seed,
                ..Default::default()
            };
            let ineq = timed(&mut timings, "inequalities", || {
                run_suite(&r.field, &r.phi, &r.gauge, &suite, &r.spec)
            })?;
            records.extend(ineq.records);
            Report::Props(records)
        }
        Experiment::Constants => Report::Constants(timed(&mut timings, "constants", || {
            constants(&r.gauge, &r.spec)
        })?),
    };
    Ok(ExperimentOutput {
        report,
        ball_volume: ball,
        timings,
    })
}

/// Sweep rows as RFC-4180 CSV. Floats use the shortest round-trip form.
pub fn sweep_csv(points: &[SweepPoint]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    regime: Regime,
    extrapolated: f64,
    extrapolated_stderr: f64,
    extrapolation_residual: f64,
    targets: &'a BTreeMap<String, TargetValue>,
}

#[derive(Serialize)]
struct VerdictsFile<'a> {
    experiment: Experiment,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepSummary<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constants: Option<&'a ConstantsReport>,
    records: &'a [VerdictRecord],
    summary: Summary,
}

#[derive(Serialize)]
struct Tool {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: Tool,
    config: &'a ExperimentConfig,
    threads: usize,
    ball_volume: &'a BallVolume,
    timings: &'a [Stage],
    summary: Summary,
    exit_code: i32,
}

/// Files written by a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_artifacts(
    cfg: &ExperimentConfig,
    out: &ExperimentOutput,
    threads: usize,
) -> anyhow::Result<Artifacts> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    let summary = out.summary();

    let (sweep, constants) = match &out.report {
        Report::Sweep(r) => {
            let path = dir.join("sweep.csv");
            fs::write(&path, sweep_csv(&r.points)?)
                .with_context(|| format!("writing {}", path.display()))?;
            files.push(path);
            let s = SweepSummary {
                regime: r.regime,
                extrapolated: r.extrapolated,
                extrapolated_stderr: r.extrapolated_stderr,
                extrapolation_residual: r.extrapolation_residual,
                targets: &r.targets,
            };
            (Some(s), None)
        }
        Report::Constants(c) => (None, Some(c)),
        Report::Props(_) => (None, None),
    };

    let path = dir.join("verdicts.json");
    write_json(
        &path,
        &VerdictsFile {
            experiment: cfg.experiment,
            sweep,
            constants,
            records: out.records(),
            summary: summary.clone(),
        },
    )?;
    files.push(path);

    let path = dir.join("manifest.json");
    write_json(
        &path,
        &Manifest {
            tool: Tool {
                name: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
            },
            config: cfg,
            threads,
            ball_volume: &out.ball_volume,
            timings: &out.timings,
            exit_code: summary.exit_code(),
            summary,
        },
    )?;
    files.push(path);

    Ok(Artifacts {
        dir: dir.clone(),
        files,
    })
}

/// Worker count from `SUBFRAC_THREADS`; `None` leaves the choice to rayon.
pub fn threads_from_env() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(anyhow::anyhow!("{THREADS_VAR}: {e}")),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(anyhow::anyhow!("{THREADS_VAR} must be a positive integer, got `{v}`")),
        },
    }
}

pub fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<(T, usize)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()?;
    let n = pool.current_num_threads();
    Ok((pool.install(f), n))
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub output: ExperimentOutput,
    pub artifacts: Artifacts,
    pub exit_code: i32,
}

/// Validates, runs in a pool sized by `SUBFRAC_THREADS`, and writes artifacts.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let resolved = cfg.resolve().map_err(CliError::Usage)?;
    let threads = threads_from_env().map_err(CliError::Usage)?;
    let (result, n) = with_pool(threads, || run_experiment(cfg, &resolved)).map_err(CliError::Io)?;
    let output = result?;
    let artifacts = write_artifacts(cfg, &output, n).map_err(CliError::Io)?;
    let exit_code = output.summary().exit_code();
    Ok(Outcome {
        output,
        artifacts,
        exit_code,
    })
}
