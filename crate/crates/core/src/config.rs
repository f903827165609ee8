//! Configuration payloads for the command-line subcommands.
//!
//! Every config is schema-validated on load: unknown keys are rejected and
//! parse failures name the offending JSON path.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::disk::GeodesicBox;
use crate::error::{Error, Result};
use crate::experiments::ApproachPath;
use crate::quad_diff::DifferentialSpec;

fn default_n_boundary() -> usize {
    1024
}

fn default_n_samples() -> usize {
    4096
}

/// Config for `converge` and `asymptotics`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub differential: DifferentialSpec,
    pub theta: f64,
    pub r#box: GeodesicBox,
    pub path: ApproachPath,
    pub grid: usize,
    #[serde(default = "default_n_boundary")]
    pub n_boundary: usize,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
}

/// Config for `trace`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    pub differential: DifferentialSpec,
    #[serde(default)]
    pub theta: f64,
    /// Seed point as `[re, im]`, strictly inside the shell.
    pub seed: [f64; 2],
    #[serde(default = "TraceConfig::default_step")]
    pub step: f64,
    #[serde(default = "TraceConfig::default_shell")]
    pub shell: f64,
}

impl TraceConfig {
    fn default_step() -> f64 {
        crate::quad_diff::DEFAULT_STEP
    }
    fn default_shell() -> f64 {
        crate::quad_diff::DEFAULT_SHELL
    }
}

/// Config for `lamination`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminationConfig {
    pub differential: DifferentialSpec,
    #[serde(default)]
    pub theta: f64,
    pub r#box: GeodesicBox,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
}

/// Parse a JSON config, naming the failing path on error.
pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config(format!("at '{path}': {}", e.inner()))
    })
}

pub fn load_json<T: DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::PathKind;

    #[test]
    fn converge_config_parses() {
        let text = r#"{
            "differential": {"kind": "constant", "c": 1.0},
            "theta": 0.0,
            "box": [5.759586531581287, 0.5235987755982988, 2.617993877991494, 3.665191429188092],
            "path": {"kind": "radial", "schedule": [4, 8, 16]},
            "grid": 257
        }"#;
        let cfg: ConvergeConfig = from_json_str(text).unwrap();
        assert_eq!(cfg.grid, 257);
        assert_eq!(cfg.n_boundary, 1024);
        assert_eq!(cfg.path.kind, PathKind::Radial);
    }

    #[test]
    fn unknown_keys_rejected_with_path() {
        let text = r#"{
            "differential": {"kind": "constant", "c": 1.0},
            "theta": 0.0,
            "box": [0.0, 1.0, 3.2, 4.8],
            "path": {"kind": "radial", "schedule": [4]},
            "grid": 257,
            "bogus": true
        }"#;
        let err = from_json_str::<ConvergeConfig>(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus"), "message was: {msg}");
    }

    #[test]
    fn invalid_box_rejected_with_path() {
        let text = r#"{
            "differential": {"kind": "constant", "c": 1.0},
            "theta": 0.0,
            "box": [0.0, 0.0, 3.2, 4.8],
            "path": {"kind": "radial", "schedule": [4]},
            "grid": 257
        }"#;
        let err = from_json_str::<ConvergeConfig>(text).unwrap_err();
        assert!(err.to_string().contains("box"), "message was: {err}");
    }

    #[test]
    fn trace_defaults() {
        let cfg: TraceConfig = from_json_str(
            r#"{"differential":{"kind":"constant","c":1.0},"seed":[0.3,0.0]}"#,
        )
        .unwrap();
        assert_eq!(cfg.step, crate::quad_diff::DEFAULT_STEP);
        assert_eq!(cfg.theta, 0.0);
    }
}
