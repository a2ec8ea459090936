//! Scenario configuration: JSON ingestion and validation.
//!
//! A config file is parsed into [`ScenarioConfig`] (unknown fields are
//! rejected), then [`ScenarioConfig::validate`] checks every semantic rule
//! and reports all violations at once.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ConfigError, FieldError};
use crate::grid::{GridSpec, Representation};
use crate::slits::{Pipeline, SlitModel};
use crate::states::StateSpec;
use crate::sweep::SweepDescriptor;

/// Monte Carlo samples drawn when a config does not say.
pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub n_points: usize,
}

/// Joint-performance thresholds for the incompatibility frontier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub v_min: f64,
    pub acc_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            v_min: 0.9,
            acc_min: 0.99,
        }
    }
}

fn default_mass() -> f64 {
    1.0
}

/// On-disk scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub grid: GridConfig,
    pub particle: StateSpec,
    pub wall: StateSpec,
    #[serde(default = "default_mass")]
    pub mass_particle: f64,
    #[serde(default = "default_mass")]
    pub mass_wall: f64,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub tau_prime: f64,
    pub k: f64,
    pub slits: SlitModel,
    /// Window pivot P₀; defaults to the wall's initial momentum mean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Screen positions at which `Prob(P|q)` slices are emitted.
    #[serde(default)]
    pub conditional_q: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepDescriptor>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: GridSpec,
    pub particle: StateSpec,
    pub wall: StateSpec,
    pub mass_particle: f64,
    pub mass_wall: f64,
    pub tau: f64,
    pub tau_prime: f64,
    pub k: f64,
    pub slits: SlitModel,
    pub pivot: Option<f64>,
    pub seed: Option<u64>,
    pub samples: usize,
    pub conditional_q: Vec<f64>,
    pub sweep: Option<SweepDescriptor>,
    pub thresholds: Thresholds,
    pub output_dir: Option<PathBuf>,
    source: ScenarioConfig,
}

impl Scenario {
    pub fn pipeline(&self) -> Pipeline {
        Pipeline {
            mass_particle: self.mass_particle,
            tau: self.tau,
            tau_prime: self.tau_prime,
            k: self.k,
            slits: self.slits,
        }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.source
    }

    /// SHA-256 of the canonical JSON form of the config.
    pub fn config_hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.source).expect("config serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Copy of this scenario with its seed replaced.
    pub fn with_seed(&self, seed: u64) -> Result<Scenario, ConfigError> {
        let mut config = self.source.clone();
        config.seed = Some(seed);
        config.validate()
    }

    /// Copy of this scenario with one numeric field replaced. `name` is a
    /// dotted path into the config, e.g. `wall.sigma` or `k`.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Scenario, ConfigError> {
        let mut doc = serde_json::to_value(&self.source).expect("config serializes");
        let pointer = parameter_pointer(name);
        match doc.pointer_mut(&pointer) {
            Some(slot) if slot.is_number() => {
                *slot = serde_json::Number::from_f64(value)
                    .map(serde_json::Value::Number)
                    .ok_or_else(|| {
                        ConfigError::Invalid(vec![FieldError::new(name, "value must be finite")])
                    })?;
            }
            _ => {
                return Err(ConfigError::Invalid(vec![FieldError::new(
                    name,
                    "not a numeric field of this config",
                )]))
            }
        }
        let config: ScenarioConfig = serde_json::from_value(doc).map_err(|e| ConfigError::Parse {
            line: 0,
            column: 0,
            message: e.to_string(),
        })?;
        config.validate()
    }
}

pub(crate) fn parameter_pointer(name: &str) -> String {
    format!("/{}", name.replace('.', "/"))
}

pub(crate) fn is_numeric_parameter(config: &ScenarioConfig, name: &str) -> bool {
    serde_json::to_value(config)
        .ok()
        .and_then(|doc| doc.pointer(&parameter_pointer(name)).map(|v| v.is_number()))
        .unwrap_or(false)
}

impl ScenarioConfig {
    /// Checks every semantic rule, collecting all failures.
    pub fn validate(self) -> Result<Scenario, ConfigError> {
        let mut errors = Vec::new();
        let mut push = |field: String, message: String| errors.push(FieldError::new(field, message));

        let grid = match GridSpec::new(self.grid.length, self.grid.n_points) {
            Ok(g) => Some(g),
            Err(e) => {
                push("grid".into(), e.to_string());
                None
            }
        };
        for (prefix, spec) in [("particle", &self.particle), ("wall", &self.wall)] {
            for (field, msg) in spec.validate() {
                push(format!("{prefix}.{field}"), msg);
            }
        }
        for (field, v) in [("mass_particle", self.mass_particle), ("mass_wall", self.mass_wall)] {
            if !(v.is_finite() && v > 0.0) {
                push(field.into(), format!("must be finite and > 0, got {v}"));
            }
        }
        for (field, v) in [("tau", self.tau), ("tau_prime", self.tau_prime), ("k", self.k)] {
            if !(v.is_finite() && v >= 0.0) {
                push(field.into(), format!("must be finite and >= 0, got {v}"));
            }
        }
        for (field, msg) in self.slits.validate() {
            push(format!("slits.{field}"), msg);
        }
        if let Some(p) = self.pivot {
            if !p.is_finite() {
                push("pivot".into(), format!("must be finite, got {p}"));
            }
        }
        if self.samples == Some(0) {
            push("samples".into(), "must be at least 1".into());
        }
        if self.seed.is_none() && (self.sweep.is_some() || self.samples.is_some()) {
            push(
                "seed".into(),
                "required: this config requests Monte Carlo path classification".into(),
            );
        }
        if let Some(sweep) = &self.sweep {
            for (field, msg) in sweep.validate() {
                push(format!("sweep.{field}"), msg);
            }
            if !is_numeric_parameter(&self, &sweep.parameter) {
                push(
                    "sweep.parameter".into(),
                    format!("'{}' is not a numeric field of this config", sweep.parameter),
                );
            }
        }
        for (field, v) in [("thresholds.v_min", self.thresholds.v_min), ("thresholds.acc_min", self.thresholds.acc_min)] {
            if !(0.0..=1.0).contains(&v) {
                push(field.into(), format!("must lie in [0, 1], got {v}"));
            }
        }
        if let Some(g) = grid {
            for (i, &q) in self.conditional_q.iter().enumerate() {
                if g.nearest_index(Representation::Position, q).is_none() {
                    push(format!("conditional_q[{i}]"), format!("{q} lies outside the grid"));
                }
            }
        }

        match grid {
            Some(grid) if errors.is_empty() => Ok(Scenario {
                grid,
                particle: self.particle.clone(),
                wall: self.wall.clone(),
                mass_particle: self.mass_particle,
                mass_wall: self.mass_wall,
                tau: self.tau,
                tau_prime: self.tau_prime,
                k: self.k,
                slits: self.slits,
                pivot: self.pivot,
                seed: self.seed,
                samples: self.samples.unwrap_or(DEFAULT_SAMPLES),
                conditional_q: self.conditional_q.clone(),
                sweep: self.sweep.clone(),
                thresholds: self.thresholds,
                output_dir: self.output_dir.clone(),
                source: self,
            }),
            _ => Err(ConfigError::Invalid(errors)),
        }
    }
}

/// Parses config text without semantic validation.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Reads, parses and validates a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<Scenario, ConfigError> {
    read_config(path.as_ref())?.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "grid": {"length": 100.53096491487338, "n_points": 4096},
        "particle": {"kind": "gaussian_position", "sigma": 2.0},
        "wall": {"kind": "gaussian_position", "sigma": 1.0},
        "tau_prime": 2.0,
        "k": 1.0,
        "slits": {"mode": "partition"}
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let s = parse_config(MINIMAL).unwrap().validate().unwrap();
        assert_eq!(s.mass_particle, 1.0);
        assert_eq!(s.tau, 0.0);
        assert_eq!(s.samples, DEFAULT_SAMPLES);
        assert_eq!(s.thresholds, Thresholds::default());
        assert_eq!(s.slits, SlitModel::Partition { x_divide: 0.0 });
        assert_eq!(s.config_hash().len(), 64);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_config("{\n  \"grid\": [1,\n").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert!(line >= 2),
            other => panic!("{other}"),
        }
        let err = parse_config(&MINIMAL.replace("\"tau_prime\"", "\"tau_primer\"")).unwrap_err();
        assert!(err.to_string().contains("tau_primer"), "{err}");
    }

    #[test]
    fn all_semantic_errors_are_reported() {
        let text = MINIMAL
            .replace(r#""n_points": 4096"#, r#""n_points": 1000"#)
            .replace(r#""k": 1.0"#, r#""k": -1.0"#)
            .replace(r#"{"mode": "partition"}"#, r#"{"mode": "aperture", "d": 1.0, "w": 2.0}"#);
        let err = parse_config(&text).unwrap().validate().unwrap_err();
        let fields: Vec<_> = err.field_errors().iter().map(|e| e.field.as_str()).collect();
        assert!(fields.contains(&"grid"));
        assert!(fields.contains(&"k"));
        assert!(fields.contains(&"slits.w"));
    }

    #[test]
    fn monte_carlo_without_seed_is_rejected() {
        let text = MINIMAL.replace(r#""k": 1.0"#, r#""k": 1.0, "samples": 100"#);
        let err = parse_config(&text).unwrap().validate().unwrap_err();
        assert!(err.field_errors().iter().any(|e| e.field == "seed"));
    }

    #[test]
    fn parameters_can_be_substituted() {
        let s = parse_config(MINIMAL).unwrap().validate().unwrap();
        let t = s.with_parameter("wall.sigma", 2.5).unwrap();
        assert_eq!(
            t.wall,
            StateSpec::GaussianPosition {
                center: 0.0,
                sigma: 2.5,
                chirp: 0.0
            }
        );
        assert_ne!(t.config_hash(), s.config_hash());
        assert!(s.with_parameter("wall.nonexistent", 1.0).is_err());
        assert!(s.with_parameter("wall.kind", 1.0).is_err());
    }
}
