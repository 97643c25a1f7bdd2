use serde::Serialize;

use super::tv::{grid_schedule, tv_report, tv_semigroup, DEFAULT_ASCENT_ITERS};
use super::{IndicatorSet, TVReport};
use crate::error::{Error, Result};
use crate::extrapolate::slope_at_zero;
use crate::field::Grid;
use crate::semigroup::Semigroup;
use crate::special::isoperimetric_profile;

/// Perimeter of `E` by every total-variation route; the perimeter itself is
/// the `tv_semigroup` entry.
pub fn perimeter(e: &IndicatorSet) -> Result<TVReport> {
    tv_report(e.membership(), &grid_schedule(e.grid()), DEFAULT_ASCENT_ITERS, 0)
}

/// Relative tolerance of the isoperimetric comparison.
pub const ISOPERIMETRIC_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoperimetricReport {
    pub perimeter: f64,
    pub volume: f64,
    /// `U(gamma(E))`.
    pub profile: f64,
    /// `P(E) >= U(gamma(E)) (1 - tol)`.
    pub pass: bool,
    /// `|P(E) - U(gamma(E))| <= tol U(gamma(E))`.
    pub equality: bool,
}

/// Compares `P(E)` with `U(gamma(E))`.
pub fn isoperimetric_check(e: &IndicatorSet) -> Result<IsoperimetricReport> {
    let p = tv_semigroup(e.membership(), &grid_schedule(e.grid()))?;
    isoperimetric_from(p, e.volume())
}

pub(crate) fn isoperimetric_from(perimeter: f64, volume: f64) -> Result<IsoperimetricReport> {
    let profile = isoperimetric_profile(volume.clamp(0.0, 1.0))?;
    Ok(IsoperimetricReport {
        perimeter,
        volume,
        profile,
        pass: perimeter >= profile * (1.0 - ISOPERIMETRIC_TOL),
        equality: (perimeter - profile).abs() <= ISOPERIMETRIC_TOL * profile,
    })
}

/// Squared Euclidean distance transform of one line (Felzenszwalb and
/// Huttenlocher); `f` holds 0 at sites and infinity elsewhere, or the output
/// of a previous pass.
fn edt_line(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut k: isize = -1;
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            if k < 0 {
                k = 0;
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            }
            let p = v[k as usize];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k as usize] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k as usize] = q;
            z[k as usize] = s;
            z[k as usize + 1] = f64::INFINITY;
            break;
        }
    }
    if k < 0 {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut j = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[j + 1] < q as f64 {
            j += 1;
        }
        let p = v[j];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Euclidean distance from every node to the nearest member node.
pub(crate) fn distance_to_members(e: &IndicatorSet) -> Vec<f64> {
    let grid: &Grid = e.grid();
    let n = grid.n();
    let mut d2: Vec<f64> = e
        .membership()
        .values()
        .iter()
        .map(|&v| if v == 1.0 { 0.0 } else { f64::INFINITY })
        .collect();
    let mut line = vec![0.0; n];
    let mut out = vec![0.0; n];
    for axis in 0..grid.dim() {
        let s = grid.stride(axis);
        for base in 0..grid.len() {
            if (base / s) % n != 0 {
                continue;
            }
            for i in 0..n {
                line[i] = d2[base + i * s];
            }
            edt_line(&line, &mut out);
            for i in 0..n {
                d2[base + i * s] = out[i];
            }
        }
    }
    let h = grid.spacing();
    d2.into_iter().map(|v| v.sqrt() * h).collect()
}

/// Outer Minkowski content `lim (gamma(E_r) - gamma(E)) / r`.
///
/// The boundary of the discrete set sits half a cell outside the member
/// nodes, so a non-member node at distance `D` from the set is at distance
/// `D - h/2` from its boundary; the enlargement `E_r` covers each node
/// fractionally over one cell to avoid staircase jumps in `r`. On boundaries
/// that are not aligned with the grid this still leaves an offset of order
/// `h` in `gamma(E_r) - gamma(E)`, so the content is taken as the slope at
/// `r = 0` of the quadratic through the three smallest radii rather than as
/// a limit of quotients.
pub fn minkowski_content(e: &IndicatorSet, r_schedule: &[f64]) -> Result<f64> {
    let grid = e.grid();
    let h = grid.spacing();
    if r_schedule.len() < 2 || r_schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Schedule("need at least two strictly decreasing radii".into()));
    }
    let last = r_schedule[r_schedule.len() - 1];
    if !(last >= 2.0 * h) {
        return Err(Error::Schedule(format!("smallest radius {last} is below 2h = {}", 2.0 * h)));
    }
    if e.is_empty() {
        return Ok(0.0);
    }
    let dist = distance_to_members(e);
    let w = grid.weights();
    let added: Vec<f64> = r_schedule
        .iter()
        .map(|&r| {
            dist.iter()
                .zip(w)
                .filter(|(d, _)| **d > 0.0)
                .map(|(d, wi)| wi * ((r - (d - 0.5 * h)) / h + 0.5).clamp(0.0, 1.0))
                .sum()
        })
        .collect();
    let k = added.len().min(3);
    let x = &r_schedule[r_schedule.len() - k..];
    Ok(slope_at_zero(x, &added[added.len() - k..])?.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DensityLabel {
    /// Density 0.
    Exterior,
    /// Density 1.
    Interior,
    /// Density 1/2.
    Half,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityClassification {
    pub labels: Vec<DensityLabel>,
    pub t_schedule: Vec<f64>,
}

impl DensityClassification {
    pub fn count(&self, label: DensityLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Absolute tolerance on the smoothed indicator for a density label.
pub const DENSITY_TOL: f64 = 0.05;

/// Labels nodes by the short-time limit of `S_t chi_E`, where `S` is the heat
/// or Ornstein-Uhlenbeck semigroup. A node receives a label when the last
/// three values lie within [`DENSITY_TOL`] of 0, 1 or 1/2.
pub fn density_classify(e: &IndicatorSet, t_schedule: &[f64], semigroup: Semigroup) -> Result<DensityClassification> {
    let grid = e.grid();
    if t_schedule.len() < 3 {
        return Err(Error::Schedule("density classification needs at least 3 times".into()));
    }
    if t_schedule.windows(2).any(|w| !(w[1] < w[0])) || !(t_schedule[t_schedule.len() - 1] > 0.0) {
        return Err(Error::Schedule("times must be positive and strictly decreasing".into()));
    }
    let h2 = grid.spacing().powi(2);
    if t_schedule[t_schedule.len() - 1] < h2 {
        return Err(Error::Schedule(format!("times below h^2 = {h2:e} are under-resolved")));
    }
    let tail = &t_schedule[t_schedule.len() - 3..];
    let smoothed = tail
        .iter()
        .map(|&t| semigroup.apply(e.membership(), t))
        .collect::<Result<Vec<_>>>()?;
    let labels = (0..grid.len())
        .map(|i| {
            let near = |target: f64| smoothed.iter().all(|s| (s.values()[i] - target).abs() <= DENSITY_TOL);
            if near(1.0) {
                DensityLabel::Interior
            } else if near(0.0) {
                DensityLabel::Exterior
            } else if near(0.5) {
                DensityLabel::Half
            } else {
                DensityLabel::Unresolved
            }
        })
        .collect();
    Ok(DensityClassification {
        labels,
        t_schedule: t_schedule.to_vec(),
    })
}
