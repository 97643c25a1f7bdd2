//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use gaussbv_core::bv::IndicatorSet;
use gaussbv_core::{Grid, GridField, Regularity};

pub fn grid(dim: usize, n: usize) -> Arc<Grid> {
    Grid::standard(dim, n, 6.0).expect("valid grid")
}

pub fn interval(grid: &Arc<Grid>) -> GridField {
    GridField::from_fn(grid, Regularity::Rough, |x| if x[0] > -0.5 && x[0] < 1.0 { 1.0 } else { 0.0 })
        .expect("field")
}

pub fn ball(grid: &Arc<Grid>) -> IndicatorSet {
    IndicatorSet::ball(grid, &vec![0.0; grid.dim()], 1.0).expect("ball")
}

pub fn smooth(grid: &Arc<Grid>) -> GridField {
    GridField::from_fn(grid, Regularity::Smooth, |x| x.iter().map(|v| (1.3 * v).sin()).sum()).expect("field")
}
