use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Record of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub inputs: BTreeMap<String, Value>,
    pub values: BTreeMap<String, Value>,
    pub pass_flags: BTreeMap<String, bool>,
    /// File names of CSV artifacts, relative to the output directory.
    pub artifacts: Vec<String>,
    pub wall_time: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.pass_flags.values().all(|&p| p)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.pass_flags
            .iter()
            .filter(|(_, &p)| !p)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without `wall_time`; equal runs give equal strings.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(m) = &mut v {
            m.remove("wall_time");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{}.json", self.experiment));
        std::fs::write(&path, self.to_json() + "\n").map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        })?;
        Ok(path)
    }
}

/// Values and flags collected while an experiment runs.
#[derive(Debug, Default)]
pub struct Outcome {
    pub inputs: BTreeMap<String, Value>,
    pub values: BTreeMap<String, Value>,
    pub pass_flags: BTreeMap<String, bool>,
    pub artifacts: Vec<String>,
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

impl Outcome {
    pub fn input(&mut self, key: &str, v: impl Serialize) {
        self.inputs.insert(key.to_string(), to_value(v));
    }

    pub fn value(&mut self, key: impl Into<String>, v: impl Serialize) {
        self.values.insert(key.into(), to_value(v));
    }

    pub fn flag(&mut self, key: impl Into<String>, pass: bool) {
        self.pass_flags.insert(key.into(), pass);
    }

    pub fn artifact(&mut self, name: impl Into<String>) {
        self.artifacts.push(name.into());
    }
}

/// A CSV table written with `{:?}` floats, which round-trip exactly.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, label: &str, values: &[f64]) {
        let mut r = vec![label.to_string()];
        r.extend(values.iter().map(|v| format!("{v:?}")));
        self.rows.push(r);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        std::fs::write(path, s).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        })
    }
}
