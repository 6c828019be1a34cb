//! Command-line experiment runner for `subfrac-core`.
//!
//! `run` executes a configured experiment and writes `sweep.csv`,
//! `verdicts.json` and `manifest.json`; `props` runs the inequality and
//! geometry checks; `constants` prints the gauge-ball constants. Exit status
//! is 0 when nothing hard-fails, 2 on a hard fail or numerical breakdown and
//! 1 on usage errors.

pub mod config;
pub mod runner;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};
use subfrac_core::asymptotics::Verdict;
use subfrac_core::{HomogeneousGauge, QuadratureSpec};

pub use config::{Experiment, ExperimentConfig, Overrides};
pub use runner::{execute, run_experiment, CliError, ConstantsReport, Outcome, Report};

#[derive(Debug, Parser)]
#[command(name = "subfrac", version, about = "Fractional Orlicz energies on Carnot groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment named in the config or by --experiment.
    Run(Overrides),
    /// Run the inequality and geometry suite.
    Props(Overrides),
    /// Print C_b, Q, QC_b and the sphere measure.
    Constants {
        #[arg(long, default_value = "r1")]
        group: String,
        /// Defaults to koranyi on h1 and euclidean elsewhere.
        #[arg(long)]
        gauge: Option<String>,
        #[arg(long, default_value_t = config::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run(o) => run(o),
        Command::Props(mut o) => {
            o.experiment = Some(Experiment::Props);
            run(o)
        }
        Command::Constants {
            group,
            gauge,
            samples,
            seed,
            json,
        } => {
            let gauge = gauge.unwrap_or_else(|| if group == "h1" { "koranyi" } else { "euclidean" }.into());
            let ng = HomogeneousGauge::from_ids(&group, &gauge)?;
            let spec = QuadratureSpec::with_samples(samples, seed);
            spec.validate()?;
            let threads = runner::threads_from_env().map_err(CliError::Usage)?;
            let (c, _) = runner::with_pool(threads, || runner::constants(&ng, &spec)).map_err(CliError::Io)?;
            print_constants(&c?, json).map_err(|e| CliError::Io(e.into()))?;
            Ok(0)
        }
    }
}

fn run(o: Overrides) -> Result<i32, CliError> {
    let cfg = o.into_config().map_err(CliError::Usage)?;
    let out = execute(&cfg)?;
    print_outcome(&out).map_err(|e| CliError::Io(e.into()))?;
    Ok(out.exit_code)
}

fn print_constants(c: &ConstantsReport, json: bool) -> std::io::Result<()> {
    let mut w = std::io::stdout().lock();
    if json {
        return writeln!(w, "{}", serde_json::to_string_pretty(c)?);
    }
    writeln!(w, "group  {} ({} gauge)", c.group, c.gauge)?;
    writeln!(w, "Q      {}", c.homogeneous_dim)?;
    writeln!(w, "m      {}", c.horizontal_dim)?;
    writeln!(
        w,
        "C_b    {:.8} ± {:.1e}  ({} samples, seed {:#x})",
        c.c_b, c.c_b_stderr, c.c_b_samples, c.c_b_seed
    )?;
    writeln!(w, "QC_b   {:.8} ± {:.1e}", c.qc_b, c.qc_b_stderr)?;
    writeln!(w, "σ(S)   {:.8} ± {:.1e}", c.sphere_measure, c.sphere_measure_stderr)
}

fn print_outcome(out: &Outcome) -> std::io::Result<()> {
    let mut w = std::io::stdout().lock();
    match &out.output.report {
        Report::Sweep(r) => {
            for p in &r.points {
                writeln!(w, "s={:<6} scaled={:.6} ± {:.1e}", p.s, p.scaled_energy, p.stderr)?;
            }
            writeln!(
                w,
                "limit {:.6} ± {:.1e} (fit residual {:.1e})",
                r.extrapolated, r.extrapolated_stderr, r.extrapolation_residual
            )?;
        }
        Report::Constants(c) => {
            writeln!(w, "C_b {:.8} ± {:.1e}, QC_b {:.8}", c.c_b, c.c_b_stderr, c.qc_b)?;
        }
        Report::Props(_) => {}
    }
    for v in out.output.records() {
        let tag = match (v.verdict, v.gating) {
            (Verdict::Pass, _) => "pass",
            (Verdict::Inconclusive, _) => "inconclusive",
            (Verdict::Fail, true) => "FAIL",
            (Verdict::Fail, false) => "fail (non-gating)",
        };
        writeln!(
            w,
            "{tag:<18} {:<36} lhs={:.6e} rhs={:.6e} ±{:.1e}",
            v.name, v.lhs, v.rhs, v.error_bar
        )?;
    }
    let s = out.output.summary();
    writeln!(
        w,
        "{} records: {} pass, {} inconclusive, {} fail ({} hard); artifacts in {}",
        s.records,
        s.pass,
        s.inconclusive,
        s.fail,
        s.hard_fails,
        out.artifacts.dir.display()
    )
}
