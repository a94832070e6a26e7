//! Run-configuration schema: a versioned JSON document validated against the
//! scenario's parameter schema before any computation. Unknown keys are
//! rejected everywhere.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use photon_pair::scenarios::{Scenario, ScenarioFile};
use photon_pair::sweep::{Axis, Objective};

use crate::CliError;

pub const CONFIG_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub format_version: u32,
    /// Inline scenario, or a path to a scenario file (exactly one).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_file: Option<PathBuf>,
    /// Probe detuning, required by `spectrum` and `g2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persistence: Option<PersistenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    pub tau_max: f64,
    pub tau_step: f64,
}

impl TraceConfig {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if !(self.tau_step > 0.0) || !(self.tau_max > 0.0) {
            return Err(CliError::validation(
                "trace.tau_step and trace.tau_max must be positive",
            ));
        }
        let n = (self.tau_max / self.tau_step).round() as usize;
        Ok((0..=n).map(|i| i as f64 * self.tau_step).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistenceConfig {
    pub threshold: f64,
    /// Window over which the maximum of g² is reported.
    pub window: (f64, f64),
}

impl Default for PersistenceConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            window: (0.0, 5.0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisConfig {
    pub fn axis(&self) -> Result<Axis, CliError> {
        Axis::linspace_step(self.param.clone(), self.min, self.max, self.step)
            .map_err(CliError::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    G2Zero,
    G2Tau,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub kind: MapKind,
    pub axis1: AxisConfig,
    pub axis2: AxisConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    MinG2Zero,
    MaxTauHalf { g2_zero_cap: f64 },
    MaxWindow { cap: f64 },
}

impl ObjectiveConfig {
    pub fn objective(&self) -> Objective {
        match self {
            ObjectiveConfig::MinG2Zero => Objective::MinimizeG2Zero,
            ObjectiveConfig::MaxTauHalf { g2_zero_cap } => Objective::MaximizeTauHalf {
                g2_zero_cap: *g2_zero_cap,
            },
            ObjectiveConfig::MaxWindow { cap } => Objective::MaximizeWindow { cap: *cap },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub objective: ObjectiveConfig,
    /// Parameter name → [lo, hi]; ordering is alphabetical and deterministic.
    pub bounds: BTreeMap<String, [f64; 2]>,
    pub budget: usize,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::validation(format!("config parse error: {e}")))?;
        if config.format_version != CONFIG_FORMAT_VERSION {
            return Err(CliError::validation(format!(
                "unsupported config format_version {} (expected {CONFIG_FORMAT_VERSION})",
                config.format_version
            )));
        }
        Ok((config, bytes))
    }

    /// Resolve the inline-or-file scenario; paths are taken relative to the
    /// config file's directory.
    pub fn scenario(&self, config_dir: &Path) -> Result<Scenario, CliError> {
        let scenario = match (&self.scenario, &self.scenario_file) {
            (Some(s), None) => s.clone(),
            (None, Some(p)) => {
                let path = if p.is_absolute() {
                    p.clone()
                } else {
                    config_dir.join(p)
                };
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::io(format!("cannot read scenario {}: {e}", path.display()))
                })?;
                let file: ScenarioFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::validation(format!("scenario parse error: {e}")))?;
                file.validate()?;
                file.scenario
            }
            (Some(_), Some(_)) => {
                return Err(CliError::validation(
                    "give either 'scenario' or 'scenario_file', not both",
                ))
            }
            (None, None) => {
                return Err(CliError::validation(
                    "missing field 'scenario' (or 'scenario_file')",
                ))
            }
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn require_detuning(&self) -> Result<f64, CliError> {
        self.detuning.ok_or_else(|| {
            CliError::validation("missing field 'detuning' (required by this command)")
        })
    }
}
