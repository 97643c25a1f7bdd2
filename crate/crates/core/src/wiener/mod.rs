//! Monte Carlo on the classical Wiener space over `[0, 1]`.
//!
//! Ensembles are described by their parameters and regenerated path by path
//! from counter-based ChaCha streams keyed by `(seed, path index)`, so the
//! statistics never hold the whole ensemble in memory and do not depend on
//! the thread count.

mod hino;
mod stats;

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub use hino::{hino_uchida_estimator, path_infima, DomainGeometry, HinoUchidaParams, HinoUchidaPoint};
pub use stats::{
    marginal_stats, running_max_stats, running_max_stats_with, MarginalStats, RunningMaxStats, DEFAULT_TIE_DELTA,
};

pub const DEFAULT_STEPS: usize = 1 << 12;
pub const DEFAULT_PATHS: usize = 100_000;

/// Largest ensemble `values` will materialize.
pub const MAX_MATERIALIZED: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PathKind {
    Brownian,
    /// Brownian bridge ending at `b` at time 1.
    Pinned { b: f64 },
    /// `d xi = -xi/2 dt + dB`, the process whose law at time `2t` is given by
    /// the Ornstein-Uhlenbeck semigroup at time `t`.
    OrnsteinUhlenbeck,
}

/// A reproducible family of paths on the time grid `k / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathEnsemble {
    pub kind: PathKind,
    pub n_paths: usize,
    pub n_steps: usize,
    pub start: f64,
    pub seed: u64,
}

impl PathEnsemble {
    fn new(kind: PathKind, n_paths: usize, n_steps: usize, start: f64, seed: u64) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 steps, got {n_steps}")));
        }
        if n_paths == 0 {
            return Err(Error::InvalidArgument("need at least one path".into()));
        }
        if !start.is_finite() {
            return Err(Error::Domain { what: "start", value: start });
        }
        if let PathKind::Pinned { b } = kind {
            if !b.is_finite() {
                return Err(Error::Domain { what: "pin", value: b });
            }
        }
        Ok(Self {
            kind,
            n_paths,
            n_steps,
            start,
            seed,
        })
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.n_steps as f64
    }

    pub fn pin(&self) -> Option<f64> {
        match self.kind {
            PathKind::Pinned { b } => Some(b),
            _ => None,
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.n_steps as f64
    }

    /// Random stream for the path increments of path `i`.
    pub(crate) fn stream(&self, i: usize, aux: bool) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * i as u64 + aux as u64);
        rng
    }

    /// Writes path `i` into `out`, which must hold `n_steps + 1` values.
    pub fn fill_path(&self, i: usize, out: &mut [f64]) {
        assert_eq!(out.len(), self.n_steps + 1);
        let mut rng = self.stream(i, false);
        let dt = self.dt();
        out[0] = self.start;
        match self.kind {
            PathKind::Brownian => {
                let s = dt.sqrt();
                for k in 1..out.len() {
                    let z: f64 = rng.sample(StandardNormal);
                    out[k] = out[k - 1] + s * z;
                }
            }
            PathKind::Pinned { b } => {
                // W from 0, then X_t = a + t (b - a) + W_t - t W_1
                let s = dt.sqrt();
                let mut w = 0.0;
                for k in 1..out.len() {
                    let z: f64 = rng.sample(StandardNormal);
                    w += s * z;
                    out[k] = w;
                }
                let w1 = w;
                let a = self.start;
                for k in 1..self.n_steps {
                    let t = self.time(k);
                    out[k] = a + t * (b - a) + out[k] - t * w1;
                }
                out[self.n_steps] = b;
            }
            PathKind::OrnsteinUhlenbeck => {
                let decay = (-0.5 * dt).exp();
                let s = (-(-dt).exp_m1()).sqrt();
                for k in 1..out.len() {
                    let z: f64 = rng.sample(StandardNormal);
                    out[k] = decay * out[k - 1] + s * z;
                }
            }
        }
    }

    pub fn path(&self, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.n_steps + 1];
        self.fill_path(i, &mut v);
        v
    }

    /// Applies `f` to every path in parallel; results come back in path order.
    pub fn map_paths<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &[f64]) -> T + Sync,
    {
        (0..self.n_paths)
            .into_par_iter()
            .map_init(
                || vec![0.0; self.n_steps + 1],
                |buf, i| {
                    self.fill_path(i, buf);
                    f(i, buf)
                },
            )
            .collect()
    }

    /// Values of all paths at step `k`.
    pub fn values_at(&self, k: usize) -> Result<Vec<f64>> {
        if k > self.n_steps {
            return Err(Error::InvalidArgument(format!("step {k} beyond {}", self.n_steps)));
        }
        Ok(self.map_paths(|_, p| p[k]))
    }

    /// Every path, for ensembles small enough to hold in memory.
    pub fn values(&self) -> Result<Vec<Vec<f64>>> {
        if self.n_paths.saturating_mul(self.n_steps + 1) > MAX_MATERIALIZED {
            return Err(Error::InvalidArgument(format!(
                "ensemble of {} x {} values is too large to materialize",
                self.n_paths,
                self.n_steps + 1
            )));
        }
        Ok(self.map_paths(|_, p| p.to_vec()))
    }

    /// CSV with header `path_id,t,value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(std::fs::File::create(path)?));
        w.write_record(["path_id", "t", "value"])?;
        for (i, p) in self.values()?.iter().enumerate() {
            for (k, v) in p.iter().enumerate() {
                w.write_record(&[i.to_string(), format!("{:e}", self.time(k)), format!("{v:e}")])?;
            }
        }
        w.into_inner()
            .map_err(|e| Error::Io(e.into_error()))?
            .flush()?;
        Ok(())
    }
}

/// Brownian paths started at `a`.
pub fn sample_brownian(n_paths: usize, n_steps: usize, a: f64, seed: u64) -> Result<PathEnsemble> {
    PathEnsemble::new(PathKind::Brownian, n_paths, n_steps, a, seed)
}

/// Brownian bridges from `a` at time 0 to `b` at time 1.
pub fn sample_pinned(n_paths: usize, n_steps: usize, a: f64, b: f64, seed: u64) -> Result<PathEnsemble> {
    PathEnsemble::new(PathKind::Pinned { b }, n_paths, n_steps, a, seed)
}

/// Ornstein-Uhlenbeck paths from `x0` by the exact Gaussian update
/// `xi_{t+dt} = e^{-dt/2} xi_t + sqrt(1 - e^{-dt}) Z`.
pub fn ou_process(n_paths: usize, n_steps: usize, x0: f64, seed: u64) -> Result<PathEnsemble> {
    PathEnsemble::new(PathKind::OrnsteinUhlenbeck, n_paths, n_steps, x0, seed)
}
