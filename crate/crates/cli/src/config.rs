use std::path::{Path, PathBuf};

use gaussbv_core::QuadratureKind;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Largest grid level; `2^9 + 1 = 513` nodes per axis.
pub const MAX_LEVEL: u32 = 9;
pub const MIN_LEVEL: u32 = 3;
pub const MAX_PATHS: usize = 1_000_000;

/// One experiment invocation. Every field but `experiment` is optional and
/// falls back to the experiment's default; fields an experiment does not use
/// are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Grid level `L`: `2^L + 1` nodes per axis on `[-6, 6]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Names of the optional fields, for per-experiment validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Dim,
    Level,
    Quadrature,
    Times,
    Levels,
    Radii,
    Seed,
    Paths,
    Steps,
}

impl Param {
    pub fn key(self) -> &'static str {
        match self {
            Param::Dim => "dim",
            Param::Level => "level",
            Param::Quadrature => "quadrature",
            Param::Times => "times",
            Param::Levels => "levels",
            Param::Radii => "radii",
            Param::Seed => "seed",
            Param::Paths => "paths",
            Param::Steps => "steps",
        }
    }
}

impl ExperimentConfig {
    pub fn named(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn present(&self) -> Vec<Param> {
        let mut p = Vec::new();
        if self.dim.is_some() {
            p.push(Param::Dim);
        }
        if self.level.is_some() {
            p.push(Param::Level);
        }
        if self.quadrature.is_some() {
            p.push(Param::Quadrature);
        }
        if self.times.is_some() {
            p.push(Param::Times);
        }
        if self.levels.is_some() {
            p.push(Param::Levels);
        }
        if self.radii.is_some() {
            p.push(Param::Radii);
        }
        if self.seed.is_some() {
            p.push(Param::Seed);
        }
        if self.paths.is_some() {
            p.push(Param::Paths);
        }
        if self.steps.is_some() {
            p.push(Param::Steps);
        }
        p
    }

    /// Rejects fields outside `accepted` and checks the generic ranges.
    pub fn validate(&self, accepted: &[Param]) -> Result<(), CliError> {
        for p in self.present() {
            if !accepted.contains(&p) {
                return Err(CliError::Config(format!(
                    "experiment {} does not take `{}`",
                    self.experiment,
                    p.key()
                )));
            }
        }
        if let Some(l) = self.level {
            if !(MIN_LEVEL..=MAX_LEVEL).contains(&l) {
                return Err(CliError::Config(format!("level {l} outside {MIN_LEVEL}..={MAX_LEVEL}")));
            }
        }
        if let Some(d) = self.dim {
            if !(1..=3).contains(&d) {
                return Err(CliError::Config(format!("dim {d} outside 1..=3")));
            }
        }
        if let Some(t) = &self.times {
            if t.is_empty() || t.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(CliError::Config("times must be a non-empty list of positive numbers".into()));
            }
        }
        for (key, v) in [("levels", &self.levels), ("radii", &self.radii)] {
            if let Some(v) = v {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(CliError::Config(format!("{key} must be a non-empty list of finite numbers")));
                }
            }
        }
        if let Some(n) = self.paths {
            if !(2..=MAX_PATHS).contains(&n) {
                return Err(CliError::Config(format!("paths {n} outside 2..={MAX_PATHS}")));
            }
        }
        if let Some(n) = self.steps {
            if !(2..=1 << 14).contains(&n) {
                return Err(CliError::Config(format!("steps {n} outside 2..=16384")));
            }
        }
        Ok(())
    }
}

/// Nodes per axis at grid level `level`.
pub fn nodes(level: u32) -> usize {
    (1usize << level) + 1
}
