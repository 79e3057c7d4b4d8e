use std::collections::BTreeMap;
use std::path::PathBuf;

use entrolab_core::linalg::BipartiteDims;
use entrolab_core::statesgen::{EnsembleKind, EnsembleSpec, TauKind};
use entrolab_core::superops::QuadratureSpec;
use entrolab_core::verify::Tolerances;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Verify,
    Sweep,
    Inspect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(CliError::Config(format!(
                "unknown format {other:?} (expected json or csv)"
            ))),
        }
    }
}

/// Extra parameters of an epsilon sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub epsilons: Vec<f64>,
    pub tau: TauKind,
}

impl Default for SweepOptions {
    /// `0, 0.05, ..., 1`.
    fn default() -> Self {
        Self {
            epsilons: (0..=20).map(|k| k as f64 / 20.0).collect(),
            tau: TauKind::Ginibre,
        }
    }
}

/// Matrix files compared by `inspect`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectInputs {
    pub rho: PathBuf,
    pub sigma: PathBuf,
}

/// Everything that determines a run's output. Serialized into every report
/// header, so a report can be replayed from its own config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub dims: BipartiteDims,
    pub trials: u64,
    pub ensemble: EnsembleSpec,
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub format: OutputFormat,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub smooth: bool,
    /// Emit a wall-clock timestamp; the only nondeterministic output field.
    #[serde(default = "default_true")]
    pub timestamp: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<InspectInputs>,
    /// Worker threads (0 picks the core count). Has no effect on output.
    #[serde(skip)]
    pub jobs: usize,
}

fn default_true() -> bool {
    true
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRIALS: u64 = 100;
pub const DEFAULT_EPSILON: f64 = 0.1;

impl RunConfig {
    pub fn new(command: Command, dims: BipartiteDims) -> Self {
        let kind = match command {
            Command::Sweep => EnsembleKind::ProductPerturbed,
            _ => EnsembleKind::GinibreFullRank,
        };
        Self {
            command,
            dims,
            trials: DEFAULT_TRIALS,
            ensemble: EnsembleSpec {
                kind,
                dims,
                epsilon: DEFAULT_EPSILON,
                seed: DEFAULT_SEED,
            },
            quadrature: QuadratureSpec::default(),
            tolerance_overrides: BTreeMap::new(),
            format: OutputFormat::Json,
            out: None,
            smooth: false,
            timestamp: true,
            sweep: (command == Command::Sweep).then(SweepOptions::default),
            inputs: None,
            jobs: 0,
        }
    }

    /// Default tolerances with the overrides applied.
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let mut tol = Tolerances::default();
        for (name, value) in &self.tolerance_overrides {
            tol.set(name, *value)?;
        }
        Ok(tol)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        BipartiteDims::new(self.dims.dim_a, self.dims.dim_b)?;
        if self.ensemble.dims != self.dims {
            return Err(CliError::Config(format!(
                "ensemble dims {}x{} differ from run dims {}x{}",
                self.ensemble.dims.dim_a, self.ensemble.dims.dim_b, self.dims.dim_a, self.dims.dim_b
            )));
        }
        self.ensemble.validate()?;
        self.quadrature.validate()?;
        self.tolerances()?;
        match self.command {
            Command::Sweep => {
                if self.ensemble.kind != EnsembleKind::ProductPerturbed {
                    return Err(CliError::Config(format!(
                        "sweep needs the product_perturbed ensemble, got {}",
                        self.ensemble.kind.name()
                    )));
                }
                let sweep = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| CliError::Config("sweep options missing".into()))?;
                if sweep.epsilons.is_empty() {
                    return Err(CliError::Config("sweep needs at least one epsilon".into()));
                }
                if let Some(e) = sweep.epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
                    return Err(CliError::Config(format!("sweep epsilon {e} outside [0, 1]")));
                }
            }
            Command::Inspect => {
                if self.inputs.is_none() {
                    return Err(CliError::Config("inspect needs rho and sigma files".into()));
                }
            }
            Command::Verify => {}
        }
        Ok(())
    }
}

/// Parses `T,PANELS,NODES`.
pub fn parse_quadrature(s: &str) -> Result<QuadratureSpec, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::Config(format!("quadrature must be T,PANELS,NODES, got {s:?}"));
    let [t, panels, nodes] = parts.as_slice() else {
        return Err(bad());
    };
    let spec = QuadratureSpec {
        truncation: t.parse().map_err(|_| bad())?,
        panels: panels.parse().map_err(|_| bad())?,
        nodes_per_panel: nodes.parse().map_err(|_| bad())?,
    };
    spec.validate()?;
    Ok(spec)
}

/// Parses `NAME=VALUE`.
pub fn parse_tolerance(s: &str) -> Result<(String, f64), CliError> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("tolerance must be NAME=VALUE, got {s:?}")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("tolerance value {value:?} is not a number")))?;
    Ok((name.trim().to_string(), value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> BipartiteDims {
        BipartiteDims::new(2, 2).unwrap()
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = RunConfig::new(Command::Sweep, dims());
        cfg.tolerance_overrides.insert("composite".into(), 1e-8);
        cfg.jobs = 7;
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(!text.contains("jobs"));
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.jobs, 0);
        assert_eq!(back, RunConfig { jobs: 0, ..cfg });
    }

    #[test]
    fn validation() {
        assert!(RunConfig::new(Command::Verify, dims()).validate().is_ok());
        let mut cfg = RunConfig::new(Command::Verify, dims());
        cfg.tolerance_overrides.insert("inequality".into(), -1.0);
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::new(Command::Sweep, dims());
        cfg.sweep.as_mut().unwrap().epsilons.push(1.5);
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::new(Command::Sweep, dims());
        cfg.ensemble.kind = EnsembleKind::Product;
        assert!(cfg.validate().is_err());
        assert!(RunConfig::new(Command::Inspect, dims()).validate().is_err());
    }

    #[test]
    fn flag_parsers() {
        let q = parse_quadrature("20, 40,8").unwrap();
        assert_eq!((q.truncation, q.panels, q.nodes_per_panel), (20.0, 40, 8));
        assert!(parse_quadrature("20,40").is_err());
        assert!(parse_quadrature("20,0,8").is_err());
        assert_eq!(parse_tolerance("composite=1e-8").unwrap(), ("composite".into(), 1e-8));
        assert!(parse_tolerance("composite").is_err());
        assert!(parse_tolerance("composite=x").is_err());
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
    }
}
