//! Declarative experiment configuration: the TOML file schema, the resolved
//! configuration with every default applied, and its canonical echo.
//!
//! The file uses one flat section per subsystem:
//!
//! ```toml
//! [model]
//! preset = "loc2"          # loc1..loc3 | scale1..scale3 | loc:eps=.. | scale:eps=..
//! dim = 15
//! scorer = "linear"        # linear | quadscale
//!
//! [phi]
//! specs = ["mww", "pol:q=3", "rtb:u0=0.9"]
//!
//! [training]
//! n_train = 150
//! m_train = 150
//! n_test = 10000
//! m_test = 10000
//! replications = 10
//!
//! [optimizer]
//! iterations = 50
//! step_size = 0.1414       # default 1/sqrt(iterations)
//! bandwidth_constant = 1.0 # h = c * N^(-1/5)
//! bandwidth_fixed = 0.25   # overrides the power law when present
//! stop_tolerance = 1e-6
//! renormalize = false
//!
//! [output]
//! seed = 42
//! out_dir = "runs/loc2"
//! roc_grid = 101
//! svg = false
//! ```
//!
//! Every key is optional; the resolved defaults are echoed to
//! `config.resolved.txt` in the output directory.

use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::optimizer::{BandwidthRule, GaConfig};
use crate::roceval::CurveMetric;
use crate::scoregen::ScoreGen;
use crate::synthdata::{LocationConfig, ScaleConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Which synthetic two-sample model the experiment draws from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    LocationPreset(u8),
    ScalePreset(u8),
    LocationCustom { epsilon: f64 },
    ScaleCustom { epsilon: f64 },
}

impl ModelSpec {
    /// Parses `loc1..loc3`, `scale1..scale3`, `loc:eps=<x>`, `scale:eps=<x>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim().to_ascii_lowercase();
        let bad = || Error::Config(format!("unknown model preset `{spec}`"));
        match spec.as_str() {
            "loc1" => return Ok(ModelSpec::LocationPreset(1)),
            "loc2" => return Ok(ModelSpec::LocationPreset(2)),
            "loc3" => return Ok(ModelSpec::LocationPreset(3)),
            "scale1" => return Ok(ModelSpec::ScalePreset(1)),
            "scale2" => return Ok(ModelSpec::ScalePreset(2)),
            "scale3" => return Ok(ModelSpec::ScalePreset(3)),
            _ => {}
        }
        let (head, args) = spec.split_once(':').ok_or_else(bad)?;
        let eps = args
            .strip_prefix("eps=")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(bad)?;
        match head {
            "loc" => Ok(ModelSpec::LocationCustom { epsilon: eps }),
            "scale" => Ok(ModelSpec::ScaleCustom { epsilon: eps }),
            _ => Err(bad()),
        }
    }

    pub fn spec_string(&self) -> String {
        match self {
            ModelSpec::LocationPreset(l) => format!("loc{l}"),
            ModelSpec::ScalePreset(l) => format!("scale{l}"),
            ModelSpec::LocationCustom { epsilon } => format!("loc:eps={epsilon}"),
            ModelSpec::ScaleCustom { epsilon } => format!("scale:eps={epsilon}"),
        }
    }

    pub fn is_location(&self) -> bool {
        matches!(
            self,
            ModelSpec::LocationPreset(_) | ModelSpec::LocationCustom { .. }
        )
    }

    pub fn location_config(&self, dim: usize) -> Result<LocationConfig> {
        match self {
            ModelSpec::LocationPreset(level) => LocationConfig::preset(*level, dim),
            ModelSpec::LocationCustom { epsilon } => LocationConfig::custom(*epsilon, dim),
            _ => Err(Error::Config("not a location model".into())),
        }
    }

    pub fn scale_config(&self, dim: usize) -> Result<ScaleConfig> {
        match self {
            ModelSpec::ScalePreset(level) => ScaleConfig::preset(*level, dim),
            ModelSpec::ScaleCustom { epsilon } => ScaleConfig::custom(*epsilon, dim),
            _ => Err(Error::Config("not a scale model".into())),
        }
    }
}

/// Fully resolved experiment description; every field is concrete.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub scorer: ModelKind,
    pub phis: Vec<ScoreGen>,
    pub dim: usize,
    pub n_train: usize,
    pub m_train: usize,
    pub n_test: usize,
    pub m_test: usize,
    pub replications: usize,
    pub ga: GaConfig,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    pub roc_grid: usize,
    /// Distance ranking the best/worst replication curves against the
    /// reference.
    pub best_worst_metric: CurveMetric,
    pub emit_svg: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.phis.is_empty() {
            return Err(Error::Config("need at least one phi spec".into()));
        }
        if self.dim == 0
            || self.n_train == 0
            || self.m_train == 0
            || self.n_test == 0
            || self.m_test == 0
            || self.replications == 0
        {
            return Err(Error::Config("all counts must be >= 1".into()));
        }
        if self.roc_grid < 2 {
            return Err(Error::Config("roc_grid must be >= 2".into()));
        }
        for (idx, phi) in self.phis.iter().enumerate() {
            if !phi.is_differentiable() {
                return Err(Error::Config(format!(
                    "phi `{}` has no derivative and cannot be trained with",
                    phi.label()
                )));
            }
            // Records are keyed by label; duplicates would blend in the
            // aggregates.
            if self.phis[..idx].iter().any(|p| p.label() == phi.label()) {
                return Err(Error::Config(format!(
                    "duplicate phi spec `{}`",
                    phi.label()
                )));
            }
        }
        Ok(())
    }

    /// Canonical echo with every applied default, written to
    /// `config.resolved.txt`.
    pub fn resolved_echo(&self) -> String {
        let (constant, fixed) = match self.ga.bandwidth {
            BandwidthRule::PowerLaw { constant } => (Some(constant), None),
            BandwidthRule::Fixed(h) => (None, Some(h)),
        };
        let echo = ResolvedEcho {
            model: EchoModel {
                preset: self.model.spec_string(),
                dim: self.dim,
                scorer: self.scorer.as_str().to_string(),
            },
            phi: EchoPhi {
                specs: self.phis.iter().map(|p| p.spec_string()).collect(),
            },
            training: EchoTraining {
                n_train: self.n_train,
                m_train: self.m_train,
                n_test: self.n_test,
                m_test: self.m_test,
                replications: self.replications,
            },
            optimizer: EchoOptimizer {
                iterations: self.ga.iterations,
                step_size: self.ga.step_size,
                bandwidth_constant: constant,
                bandwidth_fixed: fixed,
                stop_tolerance: self.ga.stop_tolerance,
                record_trajectory: self.ga.record_trajectory,
                renormalize: self.ga.renormalize,
            },
            output: EchoOutput {
                seed: self.master_seed.to_string(),
                out_dir: self.out_dir.display().to_string(),
                roc_grid: self.roc_grid,
                best_worst_metric: self.best_worst_metric.as_str().to_string(),
                svg: self.emit_svg,
            },
        };
        toml::to_string(&echo).expect("echo struct serializes")
    }
}

#[derive(Serialize)]
struct ResolvedEcho {
    model: EchoModel,
    phi: EchoPhi,
    training: EchoTraining,
    optimizer: EchoOptimizer,
    output: EchoOutput,
}

#[derive(Serialize)]
struct EchoModel {
    preset: String,
    dim: usize,
    scorer: String,
}

#[derive(Serialize)]
struct EchoPhi {
    specs: Vec<String>,
}

#[derive(Serialize)]
struct EchoTraining {
    n_train: usize,
    m_train: usize,
    n_test: usize,
    m_test: usize,
    replications: usize,
}

#[derive(Serialize)]
struct EchoOptimizer {
    iterations: usize,
    step_size: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth_fixed: Option<f64>,
    stop_tolerance: f64,
    record_trajectory: bool,
    renormalize: bool,
}

#[derive(Serialize)]
struct EchoOutput {
    // TOML integers are signed 64-bit; seeds are echoed as strings so the
    // full u64 range round-trips.
    seed: String,
    out_dir: String,
    roc_grid: usize,
    best_worst_metric: String,
    svg: bool,
}

/// Partially specified configuration: the file schema and the CLI overrides
/// both produce one of these; [`PartialConfig::resolve`] applies defaults.
#[derive(Debug, Clone, Default)]
pub struct PartialConfig {
    pub preset: Option<String>,
    pub dim: Option<usize>,
    pub scorer: Option<String>,
    pub phi_specs: Option<Vec<String>>,
    pub n_train: Option<usize>,
    pub m_train: Option<usize>,
    pub n_test: Option<usize>,
    pub m_test: Option<usize>,
    pub replications: Option<usize>,
    pub iterations: Option<usize>,
    pub step_size: Option<f64>,
    pub bandwidth_constant: Option<f64>,
    pub bandwidth_fixed: Option<f64>,
    pub stop_tolerance: Option<f64>,
    pub record_trajectory: Option<bool>,
    pub renormalize: Option<bool>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub roc_grid: Option<usize>,
    pub best_worst_metric: Option<String>,
    pub svg: Option<bool>,
}

impl PartialConfig {
    /// Reads the TOML file schema.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: FileConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(file.into_partial())
    }

    /// Overlays `other` (typically CLI flags) on top of `self`.
    pub fn merged_with(mut self, other: PartialConfig) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { self.$field = other.$field; })*
            };
        }
        take!(
            preset,
            dim,
            scorer,
            phi_specs,
            n_train,
            m_train,
            n_test,
            m_test,
            replications,
            iterations,
            step_size,
            bandwidth_constant,
            bandwidth_fixed,
            stop_tolerance,
            record_trajectory,
            renormalize,
            seed,
            out_dir,
            roc_grid,
            svg
        );
        self
    }

    /// Applies the documented defaults and validates.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let model = ModelSpec::parse(self.preset.as_deref().unwrap_or("loc2"))?;
        let scorer = match self.scorer {
            Some(s) => ModelKind::parse(&s)?,
            None => {
                if model.is_location() {
                    ModelKind::Linear
                } else {
                    ModelKind::QuadraticScale
                }
            }
        };
        let phi_specs = self
            .phi_specs
            .unwrap_or_else(|| vec!["mww".into(), "pol:q=3".into(), "rtb:u0=0.9".into()]);
        let phis: Vec<ScoreGen> = phi_specs
            .iter()
            .map(|s| ScoreGen::parse(s))
            .collect::<Result<_>>()?;

        let iterations = self.iterations.unwrap_or(50);
        let mut ga = GaConfig::with_iterations(iterations);
        if let Some(eta) = self.step_size {
            ga.step_size = eta;
        }
        ga.bandwidth = match (self.bandwidth_fixed, self.bandwidth_constant) {
            (Some(h), _) => BandwidthRule::Fixed(h),
            (None, Some(c)) => BandwidthRule::PowerLaw { constant: c },
            (None, None) => BandwidthRule::default(),
        };
        if let Some(tol) = self.stop_tolerance {
            ga.stop_tolerance = tol;
        }
        if let Some(rec) = self.record_trajectory {
            ga.record_trajectory = rec;
        }
        if let Some(r) = self.renormalize {
            ga.renormalize = r;
        }

        let cfg = ExperimentConfig {
            model,
            scorer,
            phis,
            dim: self.dim.unwrap_or(15),
            n_train: self.n_train.unwrap_or(150),
            m_train: self.m_train.unwrap_or(150),
            n_test: self.n_test.unwrap_or(10_000),
            m_test: self.m_test.unwrap_or(10_000),
            replications: self.replications.unwrap_or(10),
            ga,
            master_seed: self.seed.unwrap_or(42),
            out_dir: self.out_dir.unwrap_or_else(|| PathBuf::from("runs/out")),
            roc_grid: self.roc_grid.unwrap_or(101),
            best_worst_metric: match self.best_worst_metric {
                Some(m) => CurveMetric::parse(&m)?,
                None => CurveMetric::default(),
            },
            emit_svg: self.svg.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<FileModel>,
    phi: Option<FilePhi>,
    training: Option<FileTraining>,
    optimizer: Option<FileOptimizer>,
    output: Option<FileOutput>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileModel {
    preset: Option<String>,
    dim: Option<usize>,
    scorer: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FilePhi {
    specs: Option<Vec<String>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileTraining {
    n_train: Option<usize>,
    m_train: Option<usize>,
    n_test: Option<usize>,
    m_test: Option<usize>,
    replications: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileOptimizer {
    iterations: Option<usize>,
    step_size: Option<f64>,
    bandwidth_constant: Option<f64>,
    bandwidth_fixed: Option<f64>,
    stop_tolerance: Option<f64>,
    record_trajectory: Option<bool>,
    renormalize: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileOutput {
    #[serde(default, deserialize_with = "flexible_u64")]
    seed: Option<u64>,
    out_dir: Option<String>,
    roc_grid: Option<usize>,
    best_worst_metric: Option<String>,
    svg: Option<bool>,
}

/// Accepts a seed written either as a TOML integer or as a decimal string.
fn flexible_u64<'de, D>(de: D) -> std::result::Result<Option<u64>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Text(String),
    }
    match Option::<Raw>::deserialize(de)? {
        None => Ok(None),
        Some(Raw::Int(v)) => u64::try_from(v)
            .map(Some)
            .map_err(|_| serde::de::Error::custom("seed must be nonnegative")),
        Some(Raw::Text(v)) => v
            .parse::<u64>()
            .map(Some)
            .map_err(|_| serde::de::Error::custom("seed must be a decimal u64")),
    }
}

impl FileConfig {
    fn into_partial(self) -> PartialConfig {
        let model = self.model.unwrap_or_default();
        let phi = self.phi.unwrap_or_default();
        let training = self.training.unwrap_or_default();
        let optimizer = self.optimizer.unwrap_or_default();
        let output = self.output.unwrap_or_default();
        PartialConfig {
            preset: model.preset,
            dim: model.dim,
            scorer: model.scorer,
            phi_specs: phi.specs,
            n_train: training.n_train,
            m_train: training.m_train,
            n_test: training.n_test,
            m_test: training.m_test,
            replications: training.replications,
            iterations: optimizer.iterations,
            step_size: optimizer.step_size,
            bandwidth_constant: optimizer.bandwidth_constant,
            bandwidth_fixed: optimizer.bandwidth_fixed,
            stop_tolerance: optimizer.stop_tolerance,
            record_trajectory: optimizer.record_trajectory,
            renormalize: optimizer.renormalize,
            seed: output.seed,
            out_dir: output.out_dir.map(PathBuf::from),
            roc_grid: output.roc_grid,
            best_worst_metric: output.best_worst_metric,
            svg: output.svg,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_spec_grammar() {
        assert_eq!(
            ModelSpec::parse("loc2").unwrap(),
            ModelSpec::LocationPreset(2)
        );
        assert_eq!(
            ModelSpec::parse("scale3").unwrap(),
            ModelSpec::ScalePreset(3)
        );
        assert_eq!(
            ModelSpec::parse("loc:eps=0.25").unwrap(),
            ModelSpec::LocationCustom { epsilon: 0.25 }
        );
        assert!(ModelSpec::parse("loc9").is_err());
        assert!(ModelSpec::parse("scale:eps=oops").is_err());
    }

    #[test]
    fn defaults_resolve_to_documented_values() {
        let cfg = PartialConfig::default().resolve().unwrap();
        assert_eq!(cfg.model, ModelSpec::LocationPreset(2));
        assert_eq!(cfg.scorer, ModelKind::Linear);
        assert_eq!(cfg.phis.len(), 3);
        assert_eq!((cfg.n_train, cfg.m_train), (150, 150));
        assert_eq!((cfg.n_test, cfg.m_test), (10_000, 10_000));
        assert_eq!(cfg.replications, 10);
        assert_eq!(cfg.ga.iterations, 50);
        assert!((cfg.ga.step_size - 1.0 / 50.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(cfg.master_seed, 42);
    }

    #[test]
    fn scale_presets_default_to_the_quadratic_scorer() {
        let cfg = PartialConfig {
            preset: Some("scale1".into()),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(cfg.scorer, ModelKind::QuadraticScale);
    }

    #[test]
    fn cli_overrides_file_values() {
        let file = PartialConfig {
            seed: Some(1),
            replications: Some(4),
            ..Default::default()
        };
        let cli = PartialConfig {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = file.merged_with(cli).resolve().unwrap();
        assert_eq!(cfg.master_seed, 9);
        assert_eq!(cfg.replications, 4);
    }

    #[test]
    fn duplicate_phi_specs_are_rejected() {
        let out = PartialConfig {
            phi_specs: Some(vec!["mww".into(), "mww".into()]),
            ..Default::default()
        }
        .resolve();
        assert!(out.is_err());
    }

    #[test]
    fn training_with_non_smooth_phi_is_rejected() {
        let out = PartialConfig {
            phi_specs: Some(vec!["median".into()]),
            ..Default::default()
        }
        .resolve();
        assert!(out.is_err());
    }

    #[test]
    fn echo_round_trips_through_the_file_schema() {
        let cfg = PartialConfig::default().resolve().unwrap();
        let echo = cfg.resolved_echo();
        let parsed: FileConfig = toml::from_str(&echo).unwrap();
        let resolved = parsed.into_partial().resolve().unwrap();
        assert_eq!(resolved.master_seed, cfg.master_seed);
        assert_eq!(resolved.phis, cfg.phis);
        assert_eq!(resolved.ga, cfg.ga);
    }
}
