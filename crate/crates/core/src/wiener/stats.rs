use rand::Rng;
use serde::Serialize;

use super::{PathEnsemble, PathKind};
use crate::error::{Error, Result};

/// Default `delta` of the near-tie diagnostic.
pub const DEFAULT_TIE_DELTA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalStats {
    pub t: f64,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub mean_se: f64,
    /// Standard error of the sample variance, `sqrt((m4 - var^2) / n)`.
    pub variance_se: f64,
}

/// Summary of a sample; sums run in index order so results are reproducible.
pub(crate) fn summarize(v: &[f64]) -> (f64, f64, f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    let mean_se = (var / n).sqrt();
    let var_se = ((m4 - m2 * m2).max(0.0) / n).sqrt();
    (mean, var, mean_se, var_se)
}

/// Mean and variance of the ensemble at step `k`.
pub fn marginal_stats(e: &PathEnsemble, k: usize) -> Result<MarginalStats> {
    if e.n_paths < 2 {
        return Err(Error::InvalidArgument("statistics need at least two paths".into()));
    }
    let v = e.values_at(k)?;
    let (mean, variance, mean_se, variance_se) = summarize(&v);
    Ok(MarginalStats {
        t: e.time(k),
        n: v.len(),
        mean,
        variance,
        mean_se,
        variance_se,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunningMaxStats {
    pub n: usize,
    /// Sample mean of `M_1 = sup_{s <= 1} B_s`.
    pub mean: f64,
    pub variance: f64,
    pub mean_se: f64,
    /// Sample `P(M_1 > 1)` and its binomial standard error.
    pub exceed_one: f64,
    pub exceed_one_se: f64,
    /// Smallest sampled maximum.
    pub min: f64,
    pub tie_delta: f64,
    /// Fraction of paths that come within `tie_delta` of their maximum at a
    /// time more than `tie_delta` away from where it is attained.
    pub near_tie_fraction: f64,
}

/// Running-maximum statistics of a Brownian ensemble started at 0.
///
/// The maximum over each step is drawn from its exact conditional law given
/// the endpoints, `(x + y + sqrt((y - x)^2 - 2 dt log U)) / 2`, which removes
/// the bias of the node maximum.
pub fn running_max_stats(e: &PathEnsemble) -> Result<RunningMaxStats> {
    running_max_stats_with(e, DEFAULT_TIE_DELTA)
}

pub fn running_max_stats_with(e: &PathEnsemble, tie_delta: f64) -> Result<RunningMaxStats> {
    if e.kind != PathKind::Brownian || e.start != 0.0 {
        return Err(Error::InvalidArgument(
            "running maximum needs an unpinned Brownian ensemble started at 0".into(),
        ));
    }
    if e.n_paths < 2 {
        return Err(Error::InvalidArgument("statistics need at least two paths".into()));
    }
    if !(tie_delta > 0.0) {
        return Err(Error::Domain {
            what: "tie delta",
            value: tie_delta,
        });
    }
    let dt = e.dt();
    let per_path = e.map_paths(|i, p| {
        let mut rng = e.stream(i, true);
        let mut m = f64::NEG_INFINITY;
        for w in p.windows(2) {
            let u = 1.0 - rng.random::<f64>();
            let d = w[1] - w[0];
            m = m.max(0.5 * (w[0] + w[1] + (d * d - 2.0 * dt * u.ln()).sqrt()));
        }
        let (k_star, node_max) = p
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        let t_star = e.time(k_star);
        let tie = p
            .iter()
            .enumerate()
            .any(|(k, &v)| (e.time(k) - t_star).abs() > tie_delta && v >= node_max - tie_delta);
        (m, tie)
    });
    let maxima: Vec<f64> = per_path.iter().map(|r| r.0).collect();
    let (mean, variance, mean_se, _) = summarize(&maxima);
    let n = maxima.len() as f64;
    let exceed_one = maxima.iter().filter(|&&m| m > 1.0).count() as f64 / n;
    Ok(RunningMaxStats {
        n: maxima.len(),
        mean,
        variance,
        mean_se,
        exceed_one,
        exceed_one_se: (exceed_one * (1.0 - exceed_one) / n).sqrt(),
        min: maxima.iter().copied().fold(f64::INFINITY, f64::min),
        tie_delta,
        near_tie_fraction: per_path.iter().filter(|r| r.1).count() as f64 / n,
    })
}
