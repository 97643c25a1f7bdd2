use std::path::Path;
use std::sync::Arc;

use super::{Grid, GridField, Regularity};
use crate::error::{Error, Result};
use crate::gauss::GaussianMeasure;

/// Writes `x1,...,xd,value` rows in grid order.
pub fn write_csv(u: &GridField, path: impl AsRef<Path>) -> Result<()> {
    let grid = u.grid();
    let d = grid.dim();
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    header.push("value".into());
    w.write_record(&header)?;
    let mut x = vec![0.0; d];
    let mut rec = Vec::with_capacity(d + 1);
    for (i, v) in u.values().iter().enumerate() {
        grid.point(i, &mut x);
        rec.clear();
        rec.extend(x.iter().map(|c| format!("{c:?}")));
        rec.push(format!("{v:?}"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field written by [`write_csv`] and rebuilds its grid.
///
/// The rows must enumerate a uniform tensor grid `[-R, R]^d` in row-major
/// order with the same node count on every axis.
pub fn read_csv(path: impl AsRef<Path>, measure: GaussianMeasure, regularity: Regularity) -> Result<GridField> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let d = header.len().checked_sub(1).filter(|&d| d >= 1).ok_or_else(|| {
        Error::MalformedGrid("expected columns x1,...,xd,value".into())
    })?;
    for (k, name) in header.iter().take(d).enumerate() {
        if name.trim() != format!("x{}", k + 1) {
            return Err(Error::MalformedGrid(format!("unexpected column {name:?}")));
        }
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != d + 1 {
            return Err(Error::MalformedGrid(format!("row with {} fields", rec.len())));
        }
        for k in 0..d {
            points.push(parse(&rec[k])?);
        }
        values.push(parse(&rec[d])?);
    }
    let len = values.len();
    let n = (len as f64).powf(1.0 / d as f64).round() as usize;
    if n < 2 || n.pow(d as u32) != len {
        return Err(Error::MalformedGrid(format!("{len} rows do not form an n^{d} grid")));
    }
    let radius = points[points.len() - 1];
    if !(radius > 0.0) || (points[0] + radius).abs() > 1e-9 * radius {
        return Err(Error::MalformedGrid("grid is not a symmetric box".into()));
    }
    let grid: Arc<Grid> = Grid::new(d, n, radius, measure)?;
    let mut x = vec![0.0; d];
    let tol = 1e-9 * radius.max(1.0);
    for i in 0..len {
        grid.point(i, &mut x);
        for k in 0..d {
            if (points[i * d + k] - x[k]).abs() > tol {
                return Err(Error::MalformedGrid(format!("row {} is off the uniform grid", i + 1)));
            }
        }
    }
    GridField::new(grid, values, regularity)
}

fn parse(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::MalformedGrid(format!("not a number: {s:?}")))
}
