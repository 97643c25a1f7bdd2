use std::f64::consts::PI;
use std::sync::Arc;

use gaussbv_core::bv::DEFAULT_SCHEDULE;
use gaussbv_core::gauss::DEFAULT_BOX_RADIUS;
use gaussbv_core::{Grid, GridField, Regularity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Ctx;
use crate::config::nodes;
use crate::error::{op, CliError};

/// Standard grid on `[-6, 6]^dim` at `level`.
pub fn grid(dim: usize, level: u32) -> Result<Arc<Grid>, CliError> {
    op("grid", Grid::standard(dim, nodes(level), DEFAULT_BOX_RADIUS))
}

pub fn field<F: Fn(&[f64]) -> f64 + Sync>(grid: &Arc<Grid>, f: F) -> Result<GridField, CliError> {
    op("field", GridField::from_fn(grid, Regularity::Smooth, f))
}

impl Ctx<'_> {
    pub fn level_or(&self, default: u32) -> u32 {
        self.config.level.unwrap_or(default)
    }

    pub fn seed_or(&self, default: u64) -> u64 {
        self.config.seed.unwrap_or(default)
    }

    pub fn schedule(&self) -> Vec<f64> {
        self.config.times.clone().unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec())
    }

    /// Dimensions selected by `dim` among `allowed`, all of them by default.
    /// A level only makes sense for one dimension.
    pub fn dims(&self, allowed: &[usize]) -> Result<Vec<usize>, CliError> {
        match self.config.dim {
            Some(d) if allowed.contains(&d) => Ok(vec![d]),
            Some(d) => Err(CliError::Config(format!(
                "{} runs in dimensions {allowed:?}, not {d}",
                self.config.experiment
            ))),
            None if self.config.level.is_some() && allowed.len() > 1 => Err(CliError::Config(format!(
                "{} needs `dim` together with `level`",
                self.config.experiment
            ))),
            None => Ok(allowed.to_vec()),
        }
    }

    pub fn csv(&self, name: &str) -> std::path::PathBuf {
        self.out_dir.join(name)
    }
}

/// `sum_k a_k sin(<w_k, x> + p_k)` with `a_k ~ N(0, 1) / k`, `w_k` standard
/// normal and uniform phases.
#[derive(Debug, Clone)]
pub struct RandomSines {
    terms: Vec<(f64, Vec<f64>, f64)>,
}

impl RandomSines {
    pub fn new(dim: usize, terms: usize, rng: &mut ChaCha8Rng) -> Self {
        let terms = (1..=terms)
            .map(|k| {
                let a: f64 = rng.sample::<f64, _>(StandardNormal) / k as f64;
                let w = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let p = 2.0 * PI * rng.random::<f64>();
                (a, w, p)
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, w, p)| a * (w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + p).sin())
            .sum()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Formats a level or time for use in a key.
pub fn key(prefix: &str, v: f64) -> String {
    format!("{prefix}={v}")
}
