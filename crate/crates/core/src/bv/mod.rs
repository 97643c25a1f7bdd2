//! Total variation and perimeter with respect to the standard Gaussian.
//!
//! Total variation is computed by independent routes: the dual formula
//! (`tv_dual`), the Ornstein-Uhlenbeck short-time limit with a differentiated
//! kernel (`tv_semigroup`), relaxation along the smoothing sequence
//! `T_t u` with finite-difference gradients (`tv_relaxation`), and direct
//! quadrature of the gradient for smooth fields (`tv_smooth`).

mod boxes;
mod checks;
pub(crate) mod sets;
pub(crate) mod tv;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{integrate, Grid, GridField, Regularity};

pub use boxes::{ball_perimeter_2d, box_perimeter_growth, box_radius, BoxGrowth};
pub use checks::{
    coarea_check, default_levels, slicing_check, sobolev_isoperimetric_check, CoareaReport, InequalityReport,
    SlicingReport,
};
pub use sets::{
    density_classify, isoperimetric_check, minkowski_content, perimeter, DensityClassification, DensityLabel,
    IsoperimetricReport,
};
pub use tv::{
    dual_field, grid_schedule, tv_directional, tv_dual, tv_relaxation, tv_report, tv_semigroup, tv_semigroup_detailed, tv_smooth,
    ScheduleTv, DEFAULT_ASCENT_ITERS, DEFAULT_SCHEDULE, FINE_SCHEDULE_MIN,
};

/// The total-variation estimates of one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TVReport {
    pub tv_dual: f64,
    pub tv_semigroup: f64,
    pub tv_relaxation: f64,
    pub tv_smooth: Option<f64>,
    /// Largest `|a - b| / max(a, b)` over pairs of present estimates.
    pub spread: f64,
}

impl TVReport {
    pub fn new(tv_dual: f64, tv_semigroup: f64, tv_relaxation: f64, tv_smooth: Option<f64>) -> Self {
        let mut r = Self {
            tv_dual,
            tv_semigroup,
            tv_relaxation,
            tv_smooth,
            spread: 0.0,
        };
        r.spread = relative_spread(&r.values());
        r
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.tv_dual, self.tv_semigroup, self.tv_relaxation];
        v.extend(self.tv_smooth);
        v
    }
}

/// Below this magnitude estimates are treated as zero when comparing.
pub const ZERO_TV: f64 = 1e-9;

/// Largest pairwise relative deviation `|a - b| / max(|a|, |b|)`.
pub fn relative_spread(values: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            let m = a.abs().max(b.abs());
            if m > ZERO_TV {
                worst = worst.max((a - b).abs() / m);
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Halfspace,
    Ball,
    Box,
    Polygon,
    Custom,
}

/// A set `E` represented by its indicator on a grid.
#[derive(Debug, Clone)]
pub struct IndicatorSet {
    membership: GridField,
    kind: SetKind,
}

impl IndicatorSet {
    /// Wraps a 0/1 field.
    pub fn new(membership: GridField, kind: SetKind) -> Result<Self> {
        if let Some(i) = membership.values().iter().position(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidArgument(format!("indicator value at node {i} is not 0 or 1")));
        }
        Ok(Self {
            membership: membership.with_regularity(Regularity::Rough),
            kind,
        })
    }

    pub fn from_predicate<F: Fn(&[f64]) -> bool>(grid: &Arc<Grid>, kind: SetKind, inside: F) -> Result<Self> {
        let f = GridField::from_fn(grid, Regularity::Rough, |x| if inside(x) { 1.0 } else { 0.0 })?;
        Self::new(f, kind)
    }

    /// `{x : <x, normal> > offset}` for a unit `normal`.
    pub fn halfspace(grid: &Arc<Grid>, normal: &[f64], offset: f64) -> Result<Self> {
        check_len(grid, normal)?;
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("halfspace normal must be a unit vector".into()));
        }
        Self::from_predicate(grid, SetKind::Halfspace, |x| {
            x.iter().zip(normal).map(|(a, b)| a * b).sum::<f64>() > offset
        })
    }

    /// Open ball `{|x - center| < radius}`.
    pub fn ball(grid: &Arc<Grid>, center: &[f64], radius: f64) -> Result<Self> {
        check_len(grid, center)?;
        Self::from_predicate(grid, SetKind::Ball, |x| {
            x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < radius * radius
        })
    }

    /// Closed box `prod [-r_k, r_k]`.
    pub fn centered_box(grid: &Arc<Grid>, half_widths: &[f64]) -> Result<Self> {
        check_len(grid, half_widths)?;
        Self::from_predicate(grid, SetKind::Box, |x| x.iter().zip(half_widths).all(|(a, r)| a.abs() <= *r))
    }

    /// Interior of a simple polygon in the plane (even-odd rule).
    pub fn polygon(grid: &Arc<Grid>, vertices: &[[f64; 2]]) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: grid.dim(),
            });
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument("polygon needs at least 3 vertices".into()));
        }
        Self::from_predicate(grid, SetKind::Polygon, |x| {
            let mut inside = false;
            let m = vertices.len();
            for k in 0..m {
                let [xa, ya] = vertices[k];
                let [xb, yb] = vertices[(k + 1) % m];
                if (ya > x[1]) != (yb > x[1]) && x[0] < xa + (x[1] - ya) * (xb - xa) / (yb - ya) {
                    inside = !inside;
                }
            }
            inside
        })
    }

    pub fn membership(&self) -> &GridField {
        &self.membership
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.membership.grid()
    }

    /// `gamma(E)` by grid quadrature.
    pub fn volume(&self) -> f64 {
        integrate(&self.membership)
    }

    pub fn is_empty(&self) -> bool {
        self.membership.values().iter().all(|&v| v == 0.0)
    }
}

fn check_len(grid: &Grid, v: &[f64]) -> Result<()> {
    if v.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: v.len(),
        });
    }
    Ok(())
}
