use serde::Serialize;

use super::tv::{grid_schedule, slice_semigroup_tv, tv_directional, tv_semigroup, tv_smooth, DEFAULT_ASCENT_ITERS};
use super::{relative_spread, IndicatorSet, SetKind};
use crate::error::{Error, Result};
use crate::field::{GridField, Regularity};
use crate::special::isoperimetric_profile;

/// Number of levels in the default coarea level grid.
pub const COAREA_LEVELS: usize = 256;
/// Relative gap allowed between the two sides of the coarea formula.
pub const COAREA_TOL: f64 = 0.02;
/// Relative gap allowed between directional variation and the slice integral.
pub const SLICING_TOL: f64 = 0.01;
/// Relative slack of the Sobolev-isoperimetric inequality.
pub const SOBOLEV_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoareaReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub pass: bool,
}

/// Uniform levels spanning `[min u, max u]` over the nodes.
pub fn default_levels(u: &GridField) -> Vec<f64> {
    let lo = u.values().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![lo];
    }
    (0..COAREA_LEVELS)
        .map(|k| lo + (hi - lo) * k as f64 / (COAREA_LEVELS - 1) as f64)
        .collect()
}

/// `|D u|(X)` against `int P({u > t}) dt`, the latter by the trapezoid rule
/// over `levels`. Both sides use the semigroup route.
pub fn coarea_check(u: &GridField, levels: &[f64]) -> Result<CoareaReport> {
    if levels.is_empty() || levels.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("levels must be non-empty and increasing".into()));
    }
    let schedule = grid_schedule(u.grid());
    let lhs = tv_semigroup(u, &schedule)?;
    let perims = levels
        .iter()
        .map(|&t| {
            let values = u.values().iter().map(|&v| if v > t { 1.0 } else { 0.0 }).collect();
            let e = IndicatorSet::new(GridField::new(u.grid().clone(), values, Regularity::Rough)?, SetKind::Custom)?;
            tv_semigroup(e.membership(), &schedule)
        })
        .collect::<Result<Vec<f64>>>()?;
    let rhs: f64 = levels
        .windows(2)
        .zip(perims.windows(2))
        .map(|(t, p)| 0.5 * (t[1] - t[0]) * (p[0] + p[1]))
        .sum();
    let gap = relative_spread(&[lhs, rhs]);
    Ok(CoareaReport {
        lhs,
        rhs,
        gap,
        pass: gap < COAREA_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlicingReport {
    pub axis: usize,
    /// Directional variation by the dual route.
    pub lhs: f64,
    /// Integral over orthogonal slices of the one-dimensional variation,
    /// computed by the semigroup route on each slice.
    pub rhs: f64,
    pub gap: f64,
    pub pass: bool,
}

/// Directional variation along axis `axis` against the slice integral.
pub fn slicing_check(u: &GridField, axis: usize) -> Result<SlicingReport> {
    let d = u.grid().dim();
    if d < 2 {
        return Err(Error::InvalidArgument("slicing needs at least two dimensions".into()));
    }
    if axis >= d {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let mut nu = vec![0.0; d];
    nu[axis] = 1.0;
    let lhs = tv_directional(u, &nu, DEFAULT_ASCENT_ITERS, 0)?;
    let rhs = slice_semigroup_tv(u, axis, &grid_schedule(u.grid()))?;
    let gap = relative_spread(&[lhs, rhs]);
    Ok(SlicingReport {
        axis,
        lhs,
        rhs,
        gap,
        pass: gap < SLICING_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `int |grad_H u| d(gamma) >= int_0^inf U(gamma({|u| > s})) ds`.
///
/// The right-hand side is integrated exactly for the grid distribution of
/// `|u|`, which is a step function of `s`.
pub fn sobolev_isoperimetric_check(u: &GridField) -> Result<InequalityReport> {
    let lhs = tv_smooth(u)?;
    let w = u.grid().weights();
    let total: f64 = w.iter().sum();
    let abs: Vec<f64> = u.values().iter().map(|v| v.abs()).collect();
    let mut order: Vec<usize> = (0..abs.len()).collect();
    order.sort_by(|&a, &b| abs[a].total_cmp(&abs[b]));
    // mass strictly above the current level, normalized
    let mut above: f64 = 1.0;
    let mut s = 0.0;
    let mut rhs = 0.0;
    let mut k = 0;
    while k < order.len() {
        let level = abs[order[k]];
        rhs += (level - s) * isoperimetric_profile(above.clamp(0.0, 1.0))?;
        s = level;
        while k < order.len() && abs[order[k]] == level {
            above -= w[order[k]] / total;
            k += 1;
        }
    }
    Ok(InequalityReport {
        lhs,
        rhs,
        pass: lhs >= rhs * (1.0 - SOBOLEV_TOL),
    })
}
