//! Experiment runner for `gaussbv-core`.
//!
//! An experiment is configured by an [`ExperimentConfig`], runs a fixed set
//! of library checks and writes a JSON [`Report`] with the computed values
//! and one pass flag per property, plus CSV artifacts.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiments::{find, run, REGISTRY};
pub use report::Report;

/// Default output directory.
pub const DEFAULT_OUT: &str = "gaussbv-out";

/// `override_dir`, else the configured directory, else [`DEFAULT_OUT`].
pub fn output_dir(config: &ExperimentConfig, override_dir: Option<&Path>) -> PathBuf {
    override_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Caps the worker pool at `GAUSSBV_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GAUSSBV_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("GAUSSBV_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
