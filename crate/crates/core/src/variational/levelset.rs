use serde::Serialize;

use super::integrand::ConvexIntegrand;
use super::rof::{rof_minimize, DEFAULT_ROF_ITERS, DEFAULT_ROF_TOL};
use crate::bv::sets::distance_to_members;
use crate::bv::{grid_schedule, tv_semigroup, IndicatorSet, SetKind};
use crate::error::{Error, Result};
use crate::field::{integrate, Grid, GridField, Regularity};
use crate::special::normal_pdf;

/// Second differences may dip to `-CONVEXITY_TOL_FACTOR h^2 max|u|`.
pub const CONVEXITY_TOL_FACTOR: f64 = 10.0;

/// Relative slack of the competitor comparison, measured against
/// `P(E) + int_E |g - t| d(gamma)`.
pub const LEVELSET_TOL: f64 = 0.02;

/// Levels used by `levelset_objective` when `d >= 2`.
const MAX_OBJECTIVE_LEVELS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub pass: bool,
    /// Smallest second difference along the axes and, for `d = 2`, both
    /// diagonals.
    pub min_second_difference: f64,
    pub tol: f64,
}

/// Discrete convexity: second differences along every axis and both
/// diagonals are at least `-10 h^2 max|u|`.
pub fn convexity_check(u: &GridField) -> Result<ConvexityReport> {
    let grid = u.grid();
    let d = grid.dim();
    if d > 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let h = grid.spacing();
    let tol = CONVEXITY_TOL_FACTOR * h * h * u.max_abs();
    let dirs: Vec<Vec<isize>> = if d == 1 {
        vec![vec![1]]
    } else {
        vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1]]
    };
    let n = grid.n() as isize;
    let v = u.values();
    let mut idx = vec![0usize; d];
    let mut worst = f64::INFINITY;
    for i in 0..grid.len() {
        grid.multi_index(i, &mut idx);
        for dir in &dirs {
            let inside = idx.iter().zip(dir).all(|(&k, &s)| {
                let k = k as isize;
                k - s >= 0 && k - s < n && k + s >= 0 && k + s < n
            });
            if !inside {
                continue;
            }
            let off: isize = dir.iter().enumerate().map(|(j, &s)| s * grid.stride(j) as isize).sum();
            let ip = (i as isize + off) as usize;
            let im = (i as isize - off) as usize;
            worst = worst.min(v[ip] - 2.0 * v[i] + v[im]);
        }
    }
    Ok(ConvexityReport {
        pass: worst >= -tol,
        min_second_difference: worst,
        tol,
    })
}

/// Gaussian perimeter of a grid set. In one dimension each change of
/// membership between neighbouring nodes is a boundary point at their
/// midpoint, contributing the density there; in higher dimension the
/// semigroup route with the grid schedule is used.
pub fn set_perimeter(e: &IndicatorSet) -> Result<f64> {
    let grid = e.grid();
    let m = e.membership().values();
    if m.iter().all(|&v| v == m[0]) {
        return Ok(0.0);
    }
    if grid.dim() == 1 {
        let x = grid.axis();
        return Ok(m
            .windows(2)
            .zip(x.windows(2))
            .filter(|(a, _)| a[0] != a[1])
            .map(|(_, x)| normal_pdf(0.5 * (x[0] + x[1])))
            .sum());
    }
    tv_semigroup(e.membership(), &grid_schedule(e.grid()))
}

/// `F_{g - t}(E) = P(E) - int_E (g - t) d(gamma)`.
pub fn levelset_value(e: &IndicatorSet, g: &GridField, t: f64) -> Result<f64> {
    e.membership().check_same_grid(g)?;
    let fid: f64 = e
        .membership()
        .values()
        .iter()
        .zip(g.values())
        .zip(g.grid().weights())
        .map(|((m, gv), w)| m * (gv - t) * w)
        .sum();
    Ok(set_perimeter(e)? - fid)
}

fn superlevel(u: &GridField, t: f64) -> Result<IndicatorSet> {
    IndicatorSet::new(u.map(|v| if v > t { 1.0 } else { 0.0 })?, SetKind::Custom)
}

/// `int_R [P({u > t}) - int (chi_{u > t} - chi_{t < 0})(g - t) d(gamma)] dt
/// + 1/2 int g^2 d(gamma)`, which equals the Gaussian ROF objective of `u`
/// with `F(h) = |h|`.
///
/// Between consecutive values of `u` (and 0) the superlevel set is fixed and
/// the integrand is affine in `t`, so the midpoint rule is exact there. In
/// one dimension every value is a breakpoint; in higher dimension at most
/// 256 quantile breakpoints are used.
pub fn levelset_objective(u: &GridField, g: &GridField) -> Result<f64> {
    u.check_same_grid(g)?;
    let mut brk: Vec<f64> = u.values().to_vec();
    brk.push(0.0);
    brk.sort_by(f64::total_cmp);
    brk.dedup();
    if u.grid().dim() > 1 && brk.len() > MAX_OBJECTIVE_LEVELS + 1 {
        let m = brk.len() - 1;
        let mut thin: Vec<f64> = (0..=MAX_OBJECTIVE_LEVELS)
            .map(|k| brk[k * m / MAX_OBJECTIVE_LEVELS])
            .collect();
        thin.push(0.0);
        thin.sort_by(f64::total_cmp);
        thin.dedup();
        brk = thin;
    }
    let w = g.grid().weights();
    let gv = g.values();
    let mut total = 0.5 * integrate(&g.map(|v| v * v)?);
    for pair in brk.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let t = 0.5 * (a + b);
        let e = superlevel(u, t)?;
        let below = if t < 0.0 { 1.0 } else { 0.0 };
        let fid: f64 = e
            .membership()
            .values()
            .iter()
            .zip(gv)
            .zip(w)
            .map(|((m, gi), wi)| (m - below) * (gi - t) * wi)
            .sum();
        total += (b - a) * (set_perimeter(&e)? - fid);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub t: f64,
    /// `F_{g - t}` at the level set `{u > t}`.
    pub level_value: f64,
    /// Name and value of the best competitor.
    pub best_competitor: String,
    pub best_competitor_value: f64,
    /// Name of the best set among the level set and the competitors.
    pub best_tested: String,
    pub tol: f64,
    pub pass: bool,
    pub nonempty: bool,
    /// The sublevel set `{u <= t}` meets every grid line in one contiguous
    /// run: an interval in one dimension, a row- and column-convex polyomino
    /// in two. For convex `g` the minimizer is convex, so these are the
    /// level sets that are convex.
    pub sublevel_line_convex: bool,
    /// The same test for the superlevel set `{u > t}` itself.
    pub superlevel_line_convex: bool,
}

/// Whether every grid line parallel to an axis meets the set in at most one
/// run of consecutive nodes.
fn line_convex(e: &IndicatorSet) -> bool {
    let grid: &Grid = e.grid();
    let n = grid.n();
    let m = e.membership().values();
    for axis in 0..grid.dim() {
        let s = grid.stride(axis);
        for base in 0..grid.len() {
            if (base / s) % n != 0 {
                continue;
            }
            let mut runs = 0;
            let mut prev = 0.0;
            for k in 0..n {
                let v = m[base + k * s];
                if v == 1.0 && prev == 0.0 {
                    runs += 1;
                }
                prev = v;
            }
            if runs > 1 {
                return false;
            }
        }
    }
    true
}

fn dilate(e: &IndicatorSet, r: f64) -> Result<IndicatorSet> {
    let dist = distance_to_members(e);
    let grid = e.grid();
    let vals = dist.iter().map(|&v| if v <= r * (1.0 + 1e-12) { 1.0 } else { 0.0 }).collect();
    IndicatorSet::new(GridField::new(grid.clone(), vals, Regularity::Rough)?, SetKind::Custom)
}

fn complement(e: &IndicatorSet) -> Result<IndicatorSet> {
    IndicatorSet::new(e.membership().map(|v| 1.0 - v)?, SetKind::Custom)
}

/// The competitor family of `{u > t}`: dilations and erosions by 1 to 3
/// cells, threshold shifts by 5% and 10% of the range of `u`, and the empty
/// and full sets.
fn competitors(u: &GridField, e: &IndicatorSet, t: f64) -> Result<Vec<(String, IndicatorSet)>> {
    let h = u.grid().spacing();
    let mut out = Vec::new();
    let empty = e.membership().values().iter().all(|&v| v == 0.0);
    let full = e.membership().values().iter().all(|&v| v == 1.0);
    for r in 1..=3 {
        if !empty {
            out.push((format!("dilation-{r}"), dilate(e, r as f64 * h)?));
        }
        if !full {
            out.push((format!("erosion-{r}"), complement(&dilate(&complement(e)?, r as f64 * h)?)?));
        }
    }
    let (lo, hi) = u
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi > lo {
        for frac in [-0.1, -0.05, 0.05, 0.1] {
            out.push((format!("shift{frac:+}"), superlevel(u, t + frac * (hi - lo))?));
        }
    }
    out.push(("empty".into(), IndicatorSet::new(GridField::constant(u.grid(), 0.0)?, SetKind::Custom)?));
    out.push(("full".into(), IndicatorSet::new(GridField::constant(u.grid(), 1.0)?, SetKind::Custom)?));
    Ok(out)
}

/// Compares each level set `{u > t}` of the Gaussian ROF minimizer `u` of a
/// convex `g` with its competitor family under `F_{g - t}`.
pub fn geometric_levelset_check(g: &GridField, t_levels: &[f64]) -> Result<Vec<LevelReport>> {
    let conv = convexity_check(g)?;
    if !conv.pass {
        return Err(Error::InvalidArgument(format!(
            "data is not convex (second difference {:e} below -{:e})",
            conv.min_second_difference, conv.tol
        )));
    }
    let sol = rof_minimize(&ConvexIntegrand::norm(), g, DEFAULT_ROF_TOL, DEFAULT_ROF_ITERS)?;
    geometric_levelset_check_with(g, &sol.minimizer, t_levels)
}

/// As `geometric_levelset_check`, for a minimizer computed elsewhere.
pub fn geometric_levelset_check_with(g: &GridField, u: &GridField, t_levels: &[f64]) -> Result<Vec<LevelReport>> {
    u.check_same_grid(g)?;
    let w = g.grid().weights();
    t_levels
        .iter()
        .map(|&t| {
            let e = superlevel(u, t)?;
            let level_value = levelset_value(&e, g, t)?;
            let scale = set_perimeter(&e)?
                + e.membership()
                    .values()
                    .iter()
                    .zip(g.values())
                    .zip(w)
                    .map(|((m, gv), wi)| m * (gv - t).abs() * wi)
                    .sum::<f64>();
            let tol = LEVELSET_TOL * scale + 1e-9;
            let mut best = ("none".to_string(), f64::INFINITY);
            for (name, c) in competitors(u, &e, t)? {
                let v = levelset_value(&c, g, t)?;
                if v < best.1 {
                    best = (name, v);
                }
            }
            let nonempty = !e.is_empty();
            let best_tested = if level_value <= best.1 { "level-set".to_string() } else { best.0.clone() };
            Ok(LevelReport {
                t,
                level_value,
                best_competitor: best.0,
                best_competitor_value: best.1,
                best_tested,
                tol,
                pass: level_value <= best.1 + tol,
                nonempty,
                sublevel_line_convex: line_convex(&complement(&e)?),
                superlevel_line_convex: line_convex(&e),
            })
        })
        .collect()
}
