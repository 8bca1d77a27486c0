//! JSON run configuration: strict parsing (unknown keys are errors, so a
//! typo in a physics parameter cannot silently fall back to a default) and
//! one place where all the documented defaults live.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::dynamics::SolverOptions;
use crate::error::{Error, Result};
use crate::model::Params;
use crate::protocol::StorageModel;
use crate::wavepacket::{SpectralGrid, Wavepacket};

/// Top-level config. Every field is optional in the file; [`RunConfig::resolve`]
/// fills defaults and insists on the two parameters that have none (delta,
/// and g unless the caller derives it from the matching condition first).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub storage: Option<StorageConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Gaussian,
    RisingExponential,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<PulseShape>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_store: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_retrieve: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// Fully resolved pulse description, ready to build on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseSpec {
    Gaussian { center: f64, width: f64 },
    RisingExponential { duration: f64 },
}

impl PulseSpec {
    pub fn build(&self, grid: SpectralGrid) -> Result<Wavepacket> {
        match *self {
            PulseSpec::Gaussian { center, width } => Wavepacket::gaussian(grid, center, width),
            PulseSpec::RisingExponential { duration } => {
                Wavepacket::rising_exponential(grid, duration)
            }
        }
    }
}

/// Everything a run needs, with defaults applied and parameters validated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: Params,
    pub grid: SpectralGrid,
    pub pulse: PulseSpec,
    pub storage: StorageModel,
    pub solver: SolverOptions,
    pub format: Option<OutputFormat>,
    pub path: Option<String>,
}

impl RunConfig {
    /// Applies the documented defaults: kappa 1, gamma 0, omega0 0, grid
    /// [-20 kappa, 20 kappa] with 4096 points, Gaussian pulse of width
    /// kappa/100 centered at 0, ideal storage, solver tolerances 1e-10.
    pub fn resolve(&self) -> Result<Resolved> {
        let kappa = self.kappa.unwrap_or(1.0);
        let delta = self
            .delta
            .ok_or_else(|| Error::Config("delta is required".into()))?;
        let g = self
            .g
            .ok_or_else(|| Error::Config("g is required (or derive it with --matched-g)".into()))?;
        let params = Params {
            g,
            kappa,
            delta,
            gamma: self.gamma.unwrap_or(0.0),
            omega0: self.omega0.unwrap_or(0.0),
        };
        params.validate()?;

        let gc = self.grid.clone().unwrap_or_default();
        let grid = SpectralGrid::new(
            gc.nu_min.unwrap_or(-20.0 * kappa),
            gc.nu_max.unwrap_or(20.0 * kappa),
            gc.n_points.unwrap_or(4096),
        )?;

        let pc = self.pulse.clone().unwrap_or_default();
        let pulse = match pc.shape.unwrap_or(PulseShape::Gaussian) {
            PulseShape::Gaussian => PulseSpec::Gaussian {
                center: pc.center.unwrap_or(0.0),
                width: pc.width.unwrap_or(kappa / 100.0),
            },
            PulseShape::RisingExponential => PulseSpec::RisingExponential {
                duration: pc.duration.ok_or_else(|| {
                    Error::Config("pulse duration is required for the rising exponential".into())
                })?,
            },
        };

        let sc = self.storage.clone().unwrap_or_default();
        let storage = StorageModel {
            efficiency: sc.efficiency.unwrap_or(1.0),
            phase_store: sc.phase_store.unwrap_or(0.0),
            phase_retrieve: sc.phase_retrieve.unwrap_or(0.0),
        };
        storage.validate()?;

        let vc = self.solver.clone().unwrap_or_default();
        let defaults = SolverOptions::default();
        let solver = SolverOptions {
            abs_tol: vc.abs_tol.unwrap_or(defaults.abs_tol),
            rel_tol: vc.rel_tol.unwrap_or(defaults.rel_tol),
            max_steps: vc.max_steps.unwrap_or(defaults.max_steps),
        };

        let oc = self.output.clone().unwrap_or_default();
        Ok(Resolved {
            params,
            grid,
            pulse,
            storage,
            solver,
            format: oc.format,
            path: oc.path,
        })
    }
}

/// Strict parse of a config string; serde's message carries line/column.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    parse_config(&text)
}
