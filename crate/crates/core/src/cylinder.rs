//! Canonical cylindrical approximations on a grid.
//!
//! With coordinates ordered by the grid axes, `E_m u` keeps the first `m`
//! axes and averages the remaining ones against their Gaussian factor. Grids
//! over a non-standard Gaussian must be whitened by the caller first; the
//! routines here require the standard measure.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{integrate, integrate_h_norm, Grid, GridField};
use crate::gauss::{sample_gaussian, GaussianMeasure};
use crate::semigroup::ou_gradient;
use crate::special::normal_pdf;

/// Tolerance of the tower property.
pub const TOWER_TOL: f64 = 1e-8;
/// Relative slack of the monotonicity inequality.
pub const MONOTONICITY_TOL: f64 = 0.01;
/// Width of the Monte Carlo acceptance band in standard errors.
pub const ROTATION_SIGMAS: f64 = 4.0;

/// The projection onto the first `m` of `total_dim` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CylinderProjection {
    m: usize,
    total_dim: usize,
}

impl CylinderProjection {
    pub fn new(m: usize, total_dim: usize) -> Result<Self> {
        if m == 0 || m > total_dim {
            return Err(Error::InvalidArgument(format!(
                "retained coordinate count {m} outside 1..={total_dim}"
            )));
        }
        Ok(Self { m, total_dim })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// `E_m u`, constant along the integrated axes.
    pub fn apply(&self, u: &GridField) -> Result<GridField> {
        let grid = u.grid();
        grid.require_standard()?;
        if grid.dim() != self.total_dim {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim,
                got: grid.dim(),
            });
        }
        if self.m == self.total_dim {
            return Ok(u.clone());
        }
        // integrated axes are the fastest, so each retained node owns a
        // contiguous block
        let tail = tail_weights(grid, self.total_dim - self.m);
        let block = tail.len();
        let mut out = vec![0.0; grid.len()];
        out.par_chunks_mut(block)
            .zip(u.values().par_chunks(block))
            .for_each(|(o, v)| {
                let mean: f64 = v.iter().zip(&tail).map(|(a, w)| a * w).sum();
                o.fill(mean);
            });
        GridField::new(grid.clone(), out, u.regularity())
    }
}

/// Normalized product weights over the last `k` axes.
fn tail_weights(grid: &Grid, k: usize) -> Vec<f64> {
    let n = grid.n();
    let h = grid.spacing();
    let mut axis: Vec<f64> = grid
        .axis()
        .iter()
        .enumerate()
        .map(|(i, &x)| if i == 0 || i == n - 1 { 0.5 * h } else { h } * normal_pdf(x))
        .collect();
    let s: f64 = axis.iter().sum();
    axis.iter_mut().for_each(|w| *w /= s);
    let mut w = vec![1.0];
    for _ in 0..k {
        w = w.iter().flat_map(|a| axis.iter().map(move |b| a * b)).collect();
    }
    w
}

/// `E_m u`: integrates out coordinates `m+1..d`.
pub fn conditional_expectation(u: &GridField, m: usize) -> Result<GridField> {
    CylinderProjection::new(m, u.grid().dim())?.apply(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TowerReport {
    pub m: usize,
    pub n: usize,
    /// `max |E_m E_n u - E_m u|`.
    pub residual: f64,
    pub pass: bool,
}

/// `E_m (E_n u) = E_m u` for `m <= n`.
pub fn tower_check(u: &GridField, m: usize, n: usize) -> Result<TowerReport> {
    if m > n {
        return Err(Error::InvalidArgument(format!("tower check needs m <= n, got {m} > {n}")));
    }
    let inner = conditional_expectation(&conditional_expectation(u, n)?, m)?;
    let direct = conditional_expectation(u, m)?;
    let residual = inner.sub(&direct)?.max_abs();
    Ok(TowerReport {
        m,
        n,
        residual,
        pass: residual <= TOWER_TOL,
    })
}

/// `||E_m u - u||_{L^1}` for `m = 1..=d`.
pub fn cylindrical_l1_errors(u: &GridField) -> Result<Vec<f64>> {
    (1..=u.grid().dim())
        .map(|m| {
            let e = conditional_expectation(u, m)?;
            Ok(integrate(&e.zip_map(u, |a, b| (a - b).abs())?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub m: usize,
    pub t: f64,
    /// `int |grad_H T_t E_m u| d(gamma)`.
    pub lhs: f64,
    /// `int |grad_H T_t u| d(gamma)`.
    pub rhs: f64,
    pub pass: bool,
}

/// `int |grad_H T_t E_m u| <= int |grad_H T_t u|`.
pub fn monotonicity_check(u: &GridField, m: usize, t: f64) -> Result<MonotonicityReport> {
    if !(t > 0.0) {
        return Err(Error::Domain { what: "time", value: t });
    }
    let em = conditional_expectation(u, m)?;
    let lhs = integrate_h_norm(&ou_gradient(&em, t)?);
    let rhs = integrate_h_norm(&ou_gradient(u, t)?);
    Ok(MonotonicityReport {
        m,
        t,
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + MONOTONICITY_TOL),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationReport {
    pub theta: f64,
    pub n_mc: usize,
    /// Monte Carlo mean of `u(cos(theta) x + sin(theta) y)`.
    pub lhs: f64,
    /// `int u d(gamma)` by grid quadrature.
    pub rhs: f64,
    pub std_err: f64,
    pub pass: bool,
}

/// Rotation invariance of the product measure, checked by Monte Carlo with
/// `u` interpolated off the grid.
///
/// Passes when the gap is within [`ROTATION_SIGMAS`] standard errors; an
/// additional `1e-12` absorbs rounding when the sample variance vanishes.
pub fn rotation_invariance_check(u: &GridField, theta: f64, n_mc: usize, seed: u64) -> Result<RotationReport> {
    let grid = u.grid();
    grid.require_standard()?;
    if n_mc < 2 {
        return Err(Error::InvalidArgument("rotation check needs at least two samples".into()));
    }
    let d = grid.dim();
    let pts = sample_gaussian(&GaussianMeasure::standard(d), 2 * n_mc, seed)?;
    let (c, s) = (theta.cos(), theta.sin());
    let samples = (0..n_mc)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (pts.point(i), pts.point(n_mc + i));
            let mut z = [0.0; crate::gauss::MAX_GRID_DIM];
            for k in 0..d {
                z[k] = c * x[k] + s * y[k];
            }
            u.interpolate(&z[..d])
        })
        .collect::<Result<Vec<f64>>>()?;
    let nf = n_mc as f64;
    let lhs = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|v| (v - lhs) * (v - lhs)).sum::<f64>() / (nf - 1.0);
    let std_err = (var / nf).sqrt();
    let rhs = integrate(u);
    Ok(RotationReport {
        theta,
        n_mc,
        lhs,
        rhs,
        std_err,
        pass: (lhs - rhs).abs() < ROTATION_SIGMAS * std_err + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Regularity;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(g: &std::sync::Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> GridField {
        GridField::from_fn(g, Regularity::Smooth, f).unwrap()
    }

    #[test]
    fn conditional_expectation_examples() {
        let g = Grid::standard(2, 129, 6.0).unwrap();
        let u = field(&g, |x| x[0].sin() + x[0] * x[0]);
        let e = conditional_expectation(&u, 1).unwrap();
        for (a, b) in e.values().iter().zip(u.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let xy = conditional_expectation(&field(&g, |x| x[0] * x[1]), 1).unwrap();
        assert!(xy.max_abs() < 1e-12);
        let y2 = conditional_expectation(&field(&g, |x| x[1] * x[1]), 1).unwrap();
        for v in y2.values() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-6);
        }
        assert!(conditional_expectation(&u, 0).is_err());
        assert!(conditional_expectation(&u, 3).is_err());
    }

    #[test]
    fn constant_shift_commutes() {
        let g = Grid::standard(3, 17, 5.0).unwrap();
        let u = field(&g, |x| x[0] * x[2] + x[1].cos());
        let shifted = u.map(|v| v + 3.5).unwrap();
        let a = conditional_expectation(&shifted, 1).unwrap();
        let b = conditional_expectation(&u, 1).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_abs_diff_eq!(x - y, 3.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn tower_examples() {
        let g = Grid::standard(2, 65, 6.0).unwrap();
        let u = field(&g, |x| x[0] + x[1]);
        assert!(tower_check(&u, 2, 2).unwrap().pass);
        let r = tower_check(&u, 1, 2).unwrap();
        assert!(r.pass && r.residual < 1e-12);
        let e = conditional_expectation(&u, 1).unwrap();
        let mut x = [0.0; 2];
        for (i, v) in e.values().iter().enumerate() {
            g.point(i, &mut x);
            assert_abs_diff_eq!(*v, x[0], epsilon = 1e-9);
        }
        let g3 = Grid::standard(3, 21, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = field(&g3, |x| c[0] + c[1] * x[0] * x[1] + c[2] * x[2] * x[2] + c[3] * x[0].powi(3) + c[4] * x[1] * x[2] + c[5] * x[2].powi(4));
        assert!(tower_check(&p, 1, 2).unwrap().pass);
        assert!(tower_check(&p, 2, 1).is_err());
    }

    #[test]
    fn l1_errors_decrease_and_contract() {
        let g = Grid::standard(3, 21, 5.0).unwrap();
        let u = field(&g, |x| (x[0] + 0.5 * x[1] - x[2]).tanh());
        let errs = cylindrical_l1_errors(&u).unwrap();
        assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert_eq!(errs[2], 0.0);
        let l1 = integrate(&u.map(f64::abs).unwrap());
        for m in 1..=3 {
            let e = conditional_expectation(&u, m).unwrap();
            assert!(integrate(&e.map(f64::abs).unwrap()) <= l1 + 1e-8);
        }
    }

    #[test]
    fn monotonicity_examples() {
        let g = Grid::standard(2, 129, 6.0).unwrap();
        let u = field(&g, |x| x[0] + x[1]);
        let r = monotonicity_check(&u, 1, 0.1).unwrap();
        let et = (-0.1f64).exp();
        assert!(r.pass);
        assert!((r.lhs - et).abs() < 1e-3 * et, "{r:?}");
        assert!((r.rhs - 2f64.sqrt() * et).abs() < 1e-3 * et, "{r:?}");
        let v = field(&g, |x| x[0].sin());
        let rv = monotonicity_check(&v, 1, 0.1).unwrap();
        assert!(rv.pass && (rv.lhs - rv.rhs).abs() < 1e-6 * rv.rhs);
        assert!(monotonicity_check(&u, 1, 0.0).is_err());
    }

    #[test]
    fn rotation_examples() {
        let g = Grid::standard(1, 2049, 8.0).unwrap();
        let sq = field(&g, |x| x[0] * x[0]);
        let r = rotation_invariance_check(&sq, 0.7, 100_000, 1).unwrap();
        assert!(r.pass, "{r:?}");
        assert_abs_diff_eq!(r.rhs, 1.0, epsilon = 1e-6);
        let id = field(&g, |x| x[0]);
        assert!(rotation_invariance_check(&id, 2.0, 100_000, 2).unwrap().pass);
        let abs = field(&g, |x| x[0].abs());
        let ra = rotation_invariance_check(&abs, std::f64::consts::FRAC_PI_3, 1_000_000, 3).unwrap();
        assert!(ra.pass, "{ra:?}");
        assert_abs_diff_eq!(ra.lhs, (2.0 / std::f64::consts::PI).sqrt(), epsilon = 4.0 * ra.std_err + 1e-6);
        let c = GridField::constant(&g, 2.0).unwrap();
        assert!(rotation_invariance_check(&c, 1.0, 1000, 0).unwrap().pass);
    }
}
