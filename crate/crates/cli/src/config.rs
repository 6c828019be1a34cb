//! Experiment configuration: a TOML file, command-line overrides, and the
//! validated result that gets echoed into the manifest.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::Args;
use serde::{Deserialize, Serialize};
use subfrac_core::asymptotics::{Regime, BBM_S_GRID, MS_S_GRID};
use subfrac_core::functionals::{builtin, Field};
use subfrac_core::{HomogeneousGauge, OrliczFunction, QuadratureSpec};

pub const MIN_SAMPLES: usize = 1_000;
pub const DEFAULT_SAMPLES: usize = 1 << 18;
pub const DEFAULT_OUTPUT_DIR: &str = "subfrac-out";
pub const PROPS_S_GRID: [f64; 4] = [0.3, 0.5, 0.7, 0.9];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Bbm,
    Ms,
    Props,
    Constants,
}

impl Experiment {
    pub fn id(&self) -> &'static str {
        match self {
            Experiment::Bbm => "bbm",
            Experiment::Ms => "ms",
            Experiment::Props => "props",
            Experiment::Constants => "constants",
        }
    }

    fn default_grid(&self) -> Vec<f64> {
        match self {
            Experiment::Bbm => BBM_S_GRID.to_vec(),
            Experiment::Ms => MS_S_GRID.to_vec(),
            Experiment::Props => PROPS_S_GRID.to_vec(),
            Experiment::Constants => Vec::new(),
        }
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "bbm" => Ok(Experiment::Bbm),
            "ms" => Ok(Experiment::Ms),
            "props" => Ok(Experiment::Props),
            "constants" => Ok(Experiment::Constants),
            _ => bail!("unknown experiment `{s}` (expected bbm, ms, props or constants)"),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrliczSpec {
    pub family: String,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    pub samples: usize,
    pub seed: u64,
    pub annuli: usize,
    /// Zero selects the graded near field.
    pub r_min: f64,
}

/// A fully resolved and validated experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub group: String,
    pub gauge: String,
    pub orlicz: OrliczSpec,
    pub field: FieldSpec,
    pub quad: QuadConfig,
    pub s_grid: Vec<f64>,
    pub output_dir: PathBuf,
}

/// The objects a validated config refers to.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub gauge: HomogeneousGauge,
    pub phi: OrliczFunction,
    pub field: Field,
    pub spec: QuadratureSpec,
}

impl ExperimentConfig {
    /// Checks every constraint and builds the referenced objects.
    pub fn resolve(&self) -> anyhow::Result<Resolved> {
        let gauge = HomogeneousGauge::from_ids(&self.group, &self.gauge)?;
        let phi = OrliczFunction::new(self.orlicz.family.parse()?, self.orlicz.p)?;
        let field = builtin(&self.field.name, self.field.radius, &gauge)?;
        if self.quad.samples < MIN_SAMPLES {
            bail!("quad.samples must be at least {MIN_SAMPLES}, got {}", self.quad.samples);
        }
        let spec = QuadratureSpec {
            samples: self.quad.samples,
            seed: self.quad.seed,
            annuli: self.quad.annuli,
            r_min: self.quad.r_min,
            ..QuadratureSpec::default()
        };
        spec.validate()?;
        if let Some(s) = self.s_grid.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
            bail!("s_grid value {s} is outside (0, 1)");
        }
        match self.experiment {
            Experiment::Bbm => {
                Regime::BbmSToOne.check_grid(&self.s_grid)?;
            }
            Experiment::Ms => {
                Regime::MsSToZero.check_grid(&self.s_grid)?;
            }
            Experiment::Props | Experiment::Constants => {}
        }
        Ok(Resolved {
            gauge,
            phi,
            field,
            spec,
        })
    }

    /// Reads a TOML config, or the config echoed in a `manifest.json`.
    pub fn load(path: &Path) -> anyhow::Result<PartialConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") {
            #[derive(Deserialize)]
            struct Echo {
                config: ExperimentConfig,
            }
            let echo: Echo = serde_json::from_str(&text)
                .with_context(|| format!("parsing manifest {}", path.display()))?;
            return Ok(echo.config.into());
        }
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Config file contents; anything left out takes a default.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub experiment: Option<Experiment>,
    pub group: Option<String>,
    pub gauge: Option<String>,
    pub orlicz: Option<OrliczSpec>,
    pub field: Option<FieldSpec>,
    #[serde(default)]
    pub quad: PartialQuad,
    pub s_grid: Option<Vec<f64>>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialQuad {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub annuli: Option<usize>,
    pub r_min: Option<f64>,
}

impl From<ExperimentConfig> for PartialConfig {
    fn from(c: ExperimentConfig) -> Self {
        PartialConfig {
            experiment: Some(c.experiment),
            group: Some(c.group),
            gauge: Some(c.gauge),
            orlicz: Some(c.orlicz),
            field: Some(c.field),
            quad: PartialQuad {
                samples: Some(c.quad.samples),
                seed: Some(c.quad.seed),
                annuli: Some(c.quad.annuli),
                r_min: Some(c.quad.r_min),
            },
            s_grid: Some(c.s_grid),
            output_dir: Some(c.output_dir),
        }
    }
}

impl PartialConfig {
    /// Fills in defaults. The experiment must be named somewhere.
    pub fn finish(self) -> anyhow::Result<ExperimentConfig> {
        let experiment = self
            .experiment
            .ok_or_else(|| anyhow!("no experiment given (use --experiment or the config file)"))?;
        let group = self.group.unwrap_or_else(|| "r1".into());
        let gauge = self.gauge.unwrap_or_else(|| {
            if group == "h1" { "koranyi" } else { "euclidean" }.into()
        });
        let defaults = QuadratureSpec::default();
        Ok(ExperimentConfig {
            experiment,
            orlicz: self.orlicz.unwrap_or(OrliczSpec {
                family: "power".into(),
                p: 2.0,
            }),
            field: self.field.unwrap_or(FieldSpec {
                name: "bump".into(),
                radius: 1.0,
            }),
            quad: QuadConfig {
                samples: self.quad.samples.unwrap_or(DEFAULT_SAMPLES),
                seed: self.quad.seed.unwrap_or(defaults.seed),
                annuli: self.quad.annuli.unwrap_or(defaults.annuli),
                r_min: self.quad.r_min.unwrap_or(defaults.r_min),
            },
            s_grid: self.s_grid.unwrap_or_else(|| experiment.default_grid()),
            output_dir: self.output_dir.unwrap_or_else(|| DEFAULT_OUTPUT_DIR.into()),
            group,
            gauge,
        })
    }
}

/// Flags that override config-file values.
#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// TOML config file, or a manifest.json from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// bbm, ms, props or constants.
    #[arg(long)]
    pub experiment: Option<Experiment>,
    /// r1, r2, r3 or h1.
    #[arg(long)]
    pub group: Option<String>,
    /// euclidean or koranyi.
    #[arg(long)]
    pub gauge: Option<String>,
    /// Orlicz function as family:p, e.g. power:2 or power_log:2.
    #[arg(long, value_parser = parse_orlicz)]
    pub orlicz: Option<OrliczSpec>,
    /// Field as name:radius, e.g. bump:1 or gauss:8.
    #[arg(long, value_parser = parse_field)]
    pub field: Option<FieldSpec>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub annuli: Option<usize>,
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Comma-separated fractional orders.
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    /// Loads the config file if any and applies the flags on top.
    pub fn into_config(self) -> anyhow::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => PartialConfig::default(),
        };
        macro_rules! take {
            ($($field:ident).+ <- $flag:ident) => {
                if let Some(v) = self.$flag {
                    c.$($field).+ = Some(v);
                }
            };
        }
        take!(experiment <- experiment);
        take!(group <- group);
        take!(gauge <- gauge);
        take!(orlicz <- orlicz);
        take!(field <- field);
        take!(quad.samples <- samples);
        take!(quad.seed <- seed);
        take!(quad.annuli <- annuli);
        take!(quad.r_min <- r_min);
        take!(s_grid <- s_grid);
        take!(output_dir <- output_dir);
        c.finish()
    }
}

fn split_pair(s: &str, what: &str) -> anyhow::Result<(String, f64)> {
    let (name, value) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("expected {what} as name:number, got `{s}`"))?;
    let value = value
        .trim()
        .parse()
        .map_err(|_| anyhow!("cannot parse number in `{s}`"))?;
    Ok((name.trim().to_string(), value))
}

fn parse_orlicz(s: &str) -> anyhow::Result<OrliczSpec> {
    let (family, p) = split_pair(s, "family:p")?;
    Ok(OrliczSpec { family, p })
}

fn parse_field(s: &str) -> anyhow::Result<FieldSpec> {
    let (name, radius) = split_pair(s, "name:radius")?;
    Ok(FieldSpec { name, radius })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partial(toml_text: &str) -> PartialConfig {
        toml::from_str(toml_text).unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = partial("experiment = \"ms\"").finish().unwrap();
        assert_eq!(c.group, "r1");
        assert_eq!(c.gauge, "euclidean");
        assert_eq!(c.s_grid, MS_S_GRID.to_vec());
        assert_eq!(c.quad.samples, DEFAULT_SAMPLES);
        c.resolve().unwrap();
        let h = partial("experiment = \"bbm\"\ngroup = \"h1\"").finish().unwrap();
        assert_eq!(h.gauge, "koranyi");
    }

    #[test]
    fn full_file() {
        let c = partial(
            r#"
            experiment = "bbm"
            group = "r2"
            s_grid = [0.9, 0.95, 0.99]
            output_dir = "out"
            [orlicz]
            family = "power_log"
            p = 2.5
            [field]
            name = "gauss"
            radius = 4
            [quad]
            samples = 4096
            seed = 7
            "#,
        )
        .finish()
        .unwrap();
        assert_eq!(c.orlicz.family, "power_log");
        assert_eq!(c.field.radius, 4.0);
        assert_eq!((c.quad.samples, c.quad.seed, c.quad.annuli), (4096, 7, 4));
        let r = c.resolve().unwrap();
        assert_eq!(r.spec.samples, 4096);
    }

    #[test]
    fn validation_errors() {
        let base = || partial("experiment = \"ms\"").finish().unwrap();
        let mut c = base();
        c.group = "h2".into();
        assert!(c.resolve().is_err());
        let mut c = base();
        c.quad.samples = 999;
        assert!(c.resolve().is_err());
        let mut c = base();
        c.s_grid = vec![0.1, 0.05, 1.5];
        assert!(c.resolve().is_err());
        let mut c = base();
        c.s_grid = vec![0.9, 0.95, 0.99];
        assert!(c.resolve().is_err(), "bbm grid in an ms run");
        let mut c = base();
        c.field.name = "hat".into();
        assert!(c.resolve().is_err());
        let mut c = base();
        c.orlicz.p = 0.5;
        assert!(c.resolve().is_err());
        assert!(toml::from_str::<PartialConfig>("colour = 1").is_err());
        assert!(PartialConfig::default().finish().is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let o = Overrides {
            experiment: Some(Experiment::Ms),
            orlicz: Some(parse_orlicz("power_log:3").unwrap()),
            field: Some(parse_field("gauss:8").unwrap()),
            s_grid: Some(vec![0.2, 0.1, 0.05]),
            ..Default::default()
        };
        let c = o.into_config().unwrap();
        assert_eq!(c.orlicz, OrliczSpec { family: "power_log".into(), p: 3.0 });
        assert_eq!(c.field.name, "gauss");
        assert_eq!(c.s_grid, vec![0.2, 0.1, 0.05]);
        assert!(parse_field("bump").is_err());
        assert!(parse_orlicz("power:x").is_err());
    }
}
