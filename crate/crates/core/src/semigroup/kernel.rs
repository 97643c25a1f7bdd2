//! One-dimensional Gaussian smoothing operators on a uniform grid.
//!
//! An operator maps node values `u_j` to
//! `v_i = int U(alpha x_i + beta y) w(y) dy` where `U` interpolates the node
//! values (constant beyond the end nodes) and `w` is either the standard
//! normal density or its derivative kernel. Each grid cell is integrated
//! with Gauss-Legendre panels, so the result is exact for the interpolant
//! up to quadrature round-off, without the aliasing a fixed Gauss-Hermite
//! rule suffers against interpolation kinks.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::quad1d::legendre_unit;
use crate::special::{normal_cdf, normal_pdf, normal_sf};

/// Standardized half-width beyond which the kernel is treated as zero.
const CUTOFF: f64 = 9.0;
/// Target panel width in standardized units.
const PANEL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Interp {
    Linear,
    /// Natural cubic spline.
    Spline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Weight {
    /// `phi(y)`: the operator itself.
    Value,
    /// `y phi(y) alpha / beta`: the derivative of the operator in `x`.
    Derivative,
}

/// A banded `n x n` matrix stored row by row.
#[derive(Debug)]
pub(crate) struct Banded {
    n: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

impl Banded {
    pub(crate) fn from_rows(n: usize, rows: Vec<(usize, Vec<f64>)>) -> Self {
        debug_assert_eq!(rows.len(), n);
        Self { n, rows }
    }

    pub(crate) fn transpose(&self) -> Self {
        let n = self.n;
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, (start, w)) in self.rows.iter().enumerate() {
            for (k, &v) in w.iter().enumerate() {
                if v != 0.0 {
                    cols[start + k].push((i, v));
                }
            }
        }
        let rows = cols
            .into_iter()
            .map(|c| match (c.first(), c.last()) {
                (Some(&(a, _)), Some(&(b, _))) => {
                    let mut w = vec![0.0; b - a + 1];
                    for (i, v) in c {
                        w[i - a] += v;
                    }
                    (a, w)
                }
                _ => (0, vec![0.0]),
            })
            .collect();
        Self { n, rows }
    }

    #[cfg(test)]
    pub(crate) fn row(&self, i: usize) -> (usize, &[f64]) {
        (self.rows[i].0, &self.rows[i].1)
    }

    /// Applies the operator along `axis` of a row-major array with `n` nodes
    /// per axis and the given stride.
    pub(crate) fn apply_along(&self, values: &[f64], stride: usize) -> Vec<f64> {
        let n = self.n;
        (0..values.len())
            .into_par_iter()
            .map(|idx| {
                let i = (idx / stride) % n;
                let base = idx - i * stride;
                let (start, w) = &self.rows[i];
                let mut s = 0.0;
                let mut p = base + start * stride;
                for &wk in w {
                    s += wk * values[p];
                    p += stride;
                }
                s
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    n: usize,
    radius: u64,
    alpha: u64,
    beta: u64,
    interp: Interp,
    weight: Weight,
}

/// Cached operator for the grid `[-radius, radius]` with `n` nodes.
pub(crate) fn operator(n: usize, radius: f64, alpha: f64, beta: f64, interp: Interp, weight: Weight) -> Arc<Banded> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Banded>>>> = OnceLock::new();
    let key = Key {
        n,
        radius: radius.to_bits(),
        alpha: alpha.to_bits(),
        beta: beta.to_bits(),
        interp,
        weight,
    };
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(op) = cache.lock().expect("kernel cache poisoned").get(&key) {
        return op.clone();
    }
    let op = Arc::new(build(n, radius, alpha, beta, interp, weight));
    let mut guard = cache.lock().expect("kernel cache poisoned");
    if guard.len() > 512 {
        guard.clear();
    }
    guard.entry(key).or_insert(op).clone()
}

fn build(n: usize, radius: f64, alpha: f64, beta: f64, interp: Interp, weight: Weight) -> Banded {
    assert!(n >= 2 && beta > 0.0);
    let h = 2.0 * radius / (n - 1) as f64;
    let z: Vec<f64> = (0..n).map(|j| -radius + j as f64 * h).collect();
    let spline = interp == Interp::Spline && n >= 3;
    let thomas = if spline { Some(SplineSolver::new(n - 2)) } else { None };
    let scale = match weight {
        Weight::Value => 1.0,
        Weight::Derivative => alpha / beta,
    };
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = z[i];
            let mut row = vec![0.0; n];
            let mut curv = vec![0.0; n];
            let y = |zj: f64| (zj - alpha * x) / beta;
            let y0 = y(z[0]);
            let yn = y(z[n - 1]);
            match weight {
                Weight::Value => {
                    row[0] += normal_cdf(y0);
                    row[n - 1] += normal_sf(yn);
                }
                Weight::Derivative => {
                    row[0] -= normal_pdf(y0);
                    row[n - 1] += normal_pdf(yn);
                }
            }
            let dy = h / beta;
            // cells that can meet [-CUTOFF, CUTOFF]
            let first = (((alpha * x - CUTOFF * beta) - z[0]) / h).floor().max(0.0) as usize;
            let last = ((((alpha * x + CUTOFF * beta) - z[0]) / h).ceil().max(0.0) as usize).min(n - 1);
            for j in first..last {
                let ya = y(z[j]);
                let lo = ya.max(-CUTOFF);
                let hi = (ya + dy).min(CUTOFF);
                if lo >= hi {
                    continue;
                }
                let sa = (lo - ya) / dy;
                let sb = (hi - ya) / dy;
                let panels = ((hi - lo) / PANEL).ceil().max(1.0) as usize;
                let order = if hi - lo < 0.05 { 3 } else { 6 };
                let rule = legendre_unit(order);
                let ds = (sb - sa) / panels as f64;
                let (mut m0, mut m1, mut c0, mut c1) = (0.0, 0.0, 0.0, 0.0);
                for p in 0..panels {
                    let s0 = sa + p as f64 * ds;
                    for &(node, w) in rule {
                        let s = s0 + node * ds;
                        let yy = ya + s * dy;
                        let k = match weight {
                            Weight::Value => normal_pdf(yy),
                            Weight::Derivative => yy * normal_pdf(yy),
                        } * w
                            * ds
                            * dy;
                        m0 += (1.0 - s) * k;
                        m1 += s * k;
                        if spline {
                            // natural-spline correction terms (A^3 - A) and (B^3 - B)
                            c0 -= s * (1.0 - s) * (2.0 - s) * k;
                            c1 -= s * (1.0 - s) * (1.0 + s) * k;
                        }
                    }
                }
                row[j] += m0;
                row[j + 1] += m1;
                curv[j] += c0 * h * h / 6.0;
                curv[j + 1] += c1 * h * h / 6.0;
            }
            if let Some(solver) = &thomas {
                // M = A^{-1} (6/h^2) D2 u on interior nodes, M_0 = M_{n-1} = 0
                let mut v: Vec<f64> = curv[1..n - 1].to_vec();
                if v.iter().any(|&c| c != 0.0) {
                    solver.solve(&mut v);
                    let k = 6.0 / (h * h);
                    for (m, vm) in v.iter().enumerate() {
                        let c = k * vm;
                        row[m] += c;
                        row[m + 1] -= 2.0 * c;
                        row[m + 2] += c;
                    }
                }
            }
            for r in row.iter_mut() {
                *r *= scale;
            }
            trim(row)
        })
        .collect();
    Banded { n, rows }
}

fn trim(row: Vec<f64>) -> (usize, Vec<f64>) {
    let peak = row.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-18 * peak.max(1e-300);
    let start = row.iter().position(|v| v.abs() > tol);
    match start {
        None => (0, vec![0.0]),
        Some(a) => {
            let b = row.iter().rposition(|v| v.abs() > tol).unwrap_or(a);
            (a, row[a..=b].to_vec())
        }
    }
}

/// The finite-difference derivative used by `field::gradient`, as a matrix.
pub(crate) fn difference_operator(n: usize, h: f64) -> Banded {
    assert!(n >= 3);
    let rows = (0..n)
        .map(|i| {
            if i == 0 {
                (0, vec![-1.5 / h, 2.0 / h, -0.5 / h])
            } else if i == n - 1 {
                (n - 3, vec![0.5 / h, -2.0 / h, 1.5 / h])
            } else if i == 1 || i == n - 2 {
                (i - 1, vec![-0.5 / h, 0.0, 0.5 / h])
            } else {
                let c = 1.0 / (12.0 * h);
                (i - 2, vec![c, -8.0 * c, 0.0, 8.0 * c, -c])
            }
        })
        .collect();
    Banded::from_rows(n, rows)
}

/// Discrete Gaussian average with standard deviation `sigma` nodes, each row
/// renormalized to sum to one (so it is a convex combination near the ends).
pub(crate) fn blur_operator(n: usize, sigma: f64) -> Banded {
    let half = (4.0 * sigma).ceil() as usize;
    let rows = (0..n)
        .map(|i| {
            let a = i.saturating_sub(half);
            let b = (i + half).min(n - 1);
            let mut w: Vec<f64> = (a..=b)
                .map(|j| {
                    let d = (j as f64 - i as f64) / sigma;
                    (-0.5 * d * d).exp()
                })
                .collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            (a, w)
        })
        .collect();
    Banded::from_rows(n, rows)
}

/// Thomas factorization of the tridiagonal matrix with rows `[1 4 1]`.
struct SplineSolver {
    cprime: Vec<f64>,
    denom: Vec<f64>,
}

impl SplineSolver {
    fn new(m: usize) -> Self {
        let mut cprime = vec![0.0; m];
        let mut denom = vec![0.0; m];
        let mut prev = 0.0;
        for i in 0..m {
            let d = 4.0 - prev;
            denom[i] = d;
            cprime[i] = 1.0 / d;
            prev = cprime[i];
        }
        Self { cprime, denom }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let m = rhs.len();
        if m == 0 {
            return;
        }
        rhs[0] /= self.denom[0];
        for i in 1..m {
            rhs[i] = (rhs[i] - rhs[i - 1]) / self.denom[i];
        }
        for i in (0..m - 1).rev() {
            rhs[i] -= self.cprime[i] * rhs[i + 1];
        }
    }
}
