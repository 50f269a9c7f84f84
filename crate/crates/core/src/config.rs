//! Experiment configuration: JSON/TOML deserialization, validation, and the
//! content hash embedded in every output header.

use crate::pde::InitialPreset;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config {path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_w: usize,
    pub n_v: usize,
    pub y: f64,
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub lambda1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub tbar1: f64,
    pub tbar2: f64,
}

/// Feedback configuration; `open` runs with all inputs held at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Open,
    Controller1,
    Controller2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub mode: Mode,
    pub alpha1: f64,
    pub alpha2: f64,
    /// energy-bound constant; defaults to the computed `delta_o(3 lambda1)`
    #[serde(default)]
    pub delta: Option<f64>,
    /// run controller 1 even when the dwell-time conditions fail
    #[serde(default)]
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub preset: InitialPreset,
    pub seed: u64,
}

fn default_stride() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// directory for CSV/JSON outputs; in-memory only when absent
    #[serde(default)]
    pub dir: Option<String>,
    /// steps between summary rows
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// steps between full-field trajectory snapshots (0 disables)
    #[serde(default)]
    pub trajectory_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, stride: default_stride(), trajectory_stride: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub schedule: ScheduleConfig,
    pub controller: ControllerConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

impl ExperimentConfig {
    /// Desk-scale defaults: unit subdomains, `lambda1 = 50` (inside the
    /// destabilizing regime), symmetric 0.05 dwell times.
    pub fn desk_scale() -> Self {
        ExperimentConfig {
            grid: GridConfig { n_w: 129, n_v: 129, y: 1.0, l: 2.0 },
            physics: PhysicsConfig { lambda1: 50.0 },
            schedule: ScheduleConfig { tbar1: 0.05, tbar2: 0.05 },
            controller: ControllerConfig {
                mode: Mode::Open,
                alpha1: 15000.0,
                alpha2: 15000.0,
                delta: None,
                force: false,
            },
            solver: SolverConfig {
                dt: 1e-6,
                t_end: 0.5,
                preset: InitialPreset::RandomSmooth { amplitude: 1e-3 },
                seed: 1,
            },
            outputs: OutputConfig::default(),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let is_toml = path.extension().map(|e| e == "toml").unwrap_or(false);
        let cfg: ExperimentConfig = if is_toml {
            toml::from_str(&text).map_err(|e| ConfigError::Parse { path: path.display().to_string(), detail: e.to_string() })?
        } else {
            serde_json::from_str(&text)
                .map_err(|e| ConfigError::Parse { path: path.display().to_string(), detail: e.to_string() })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        if !(g.y > 0.0 && g.l > g.y) {
            return Err(ConfigError::Invalid(format!("need 0 < Y < L, got Y = {}, L = {}", g.y, g.l)));
        }
        if g.n_w < 9 || g.n_v < 9 {
            return Err(ConfigError::Invalid("need at least 9 nodes per subdomain".into()));
        }
        if !(self.physics.lambda1 >= 0.0) {
            return Err(ConfigError::Invalid("lambda1 must be nonnegative".into()));
        }
        if !(self.schedule.tbar1 > 0.0 && self.schedule.tbar2 > 0.0) {
            return Err(ConfigError::Invalid("dwell times must be positive".into()));
        }
        if !(self.solver.dt > 0.0 && self.solver.t_end > 0.0) {
            return Err(ConfigError::Invalid("dt and t_end must be positive".into()));
        }
        if self.controller.mode != Mode::Open && !(self.controller.alpha1 > 0.0 && self.controller.alpha2 > 0.0) {
            return Err(ConfigError::Invalid("design rates must be positive".into()));
        }
        if self.outputs.stride == 0 {
            return Err(ConfigError::Invalid("outputs.stride must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization; identical configs hash
    /// identically regardless of source format.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_scale_is_valid() {
        ExperimentConfig::desk_scale().validate().unwrap();
    }

    #[test]
    fn json_and_toml_roundtrip_agree() {
        let cfg = ExperimentConfig::desk_scale();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let from_json: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, from_json);
        let toml_text = toml::to_string(&cfg).unwrap();
        let from_toml: ExperimentConfig = toml::from_str(&toml_text).unwrap();
        assert_eq!(cfg, from_toml);
        assert_eq!(cfg.hash(), from_toml.hash());
    }

    #[test]
    fn hash_changes_with_content() {
        let a = ExperimentConfig::desk_scale();
        let mut b = a.clone();
        b.solver.seed = 2;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn invalid_geometry_rejected() {
        let mut cfg = ExperimentConfig::desk_scale();
        cfg.grid.y = 3.0;
        assert!(cfg.validate().is_err());
    }
}
