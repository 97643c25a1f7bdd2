use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::TVReport;
use crate::error::{Error, Result};
use crate::extrapolate::neville_at_zero;
use crate::field::{gradient, integrate_h_norm, Grid, GridField, HVectorField, Regularity};
use crate::semigroup::kernel::{self, blur_operator, difference_operator, Banded, Interp, Weight};
use crate::semigroup::{ou_apply, ou_gradient, Semigroup};

/// A fixed schedule for the semigroup and relaxation routes, valid on grids
/// with spacing up to 0.05.
pub const DEFAULT_SCHEDULE: [f64; 4] = [0.08, 0.04, 0.02, 0.01];
pub const DEFAULT_ASCENT_ITERS: usize = 500;

/// Smallest time of [`grid_schedule`].
pub const FINE_SCHEDULE_MIN: f64 = 0.0025;

/// Halving schedule `8 t0, 4 t0, 2 t0, t0` with `t0` the larger of
/// [`FINE_SCHEDULE_MIN`] and the resolution floor `(2h)^2`.
///
/// On fine grids this reaches well below [`DEFAULT_SCHEDULE`], which matters
/// for sets with nearby boundary pieces and for oscillating fields: the
/// neglected terms of the extrapolation grow like `t^2` and `exp(-c / t)`.
pub fn grid_schedule(grid: &Grid) -> [f64; 4] {
    let t0 = FINE_SCHEDULE_MIN.max((2.0 * grid.spacing()).powi(2));
    [8.0 * t0, 4.0 * t0, 2.0 * t0, t0]
}

/// Width, in nodes, of the Gaussian average applied to dual test fields.
const BLUR_SIGMA_NODES: f64 = 2.0;

struct DualOps {
    diff_t: Banded,
    blur: Banded,
    blur_t: Banded,
}

impl DualOps {
    fn new(grid: &Grid) -> Result<Self> {
        if grid.n() < 3 {
            return Err(Error::GridTooCoarse(format!("{} nodes per axis", grid.n())));
        }
        let blur = blur_operator(grid.n(), BLUR_SIGMA_NODES);
        Ok(Self {
            diff_t: difference_operator(grid.n(), grid.spacing()).transpose(),
            blur_t: blur.transpose(),
            blur,
        })
    }
}

/// `g_j = D_j^T(w u) - x_j w u` for the components `j` in `axes`, which
/// represents `Phi_j -> sum w u d*_j Phi_j`. The Gaussian mean of `u` is
/// removed first: the variation ignores constants, while the discrete `g` of
/// a constant is a small stencil residual rather than zero.
pub(crate) fn adjoint_pairing(u: &GridField, axes: &[usize]) -> Result<Vec<Vec<f64>>> {
    let grid = u.grid();
    grid.require_standard()?;
    if let Some(i) = u.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let ops = DualOps::new(grid)?;
    let w = grid.weights();
    let mean = u.values().iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
    let wu: Vec<f64> = u.values().iter().zip(w).map(|(a, b)| (a - mean) * b).collect();
    Ok(axes
        .iter()
        .map(|&j| {
            let mut g = ops.diff_t.apply_along(&wu, grid.stride(j));
            g.par_iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v -= grid.coord(i, j) * wu[i]);
            g
        })
        .collect())
}

/// `S^T g_j` with `g_j` from `adjoint_pairing` and `S` the blur applied to
/// test fields.
pub(crate) fn dual_gradient(u: &GridField, axes: &[usize]) -> Result<Vec<Vec<f64>>> {
    let grid = u.grid();
    adjoint_pairing(u, axes)?
        .into_iter()
        .map(|g| blur_transpose(grid, &g))
        .collect()
}

/// `S^T v` for a nodal array `v`, with `S` the blur applied to test fields.
pub(crate) fn blur_transpose(grid: &Grid, v: &[f64]) -> Result<Vec<f64>> {
    let ops = DualOps::new(grid)?;
    let mut out = v.to_vec();
    for axis in 0..grid.dim() {
        out = ops.blur_t.apply_along(&out, grid.stride(axis));
    }
    Ok(out)
}

/// Projected ascent for the linear functional `sum_i <G_i, Psi_i>` over
/// nodewise unit balls. Returns the best value and its maximizer.
fn dual_ascent(g: &[Vec<f64>], iters: usize, seed: u64, step: f64) -> (f64, Vec<Vec<f64>>) {
    let m = g.len();
    let len = g[0].len();
    let norm = |i: usize, v: &[Vec<f64>]| v.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
    let value = |psi: &[Vec<f64>]| -> f64 {
        (0..len)
            .map(|i| (0..m).map(|j| g[j][i] * psi[j][i]).sum::<f64>())
            .sum()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (0..len).map(|i| norm(i, g)).fold(0.0, f64::max);
    // start from the normalized ascent direction; nodes where it vanishes get
    // a random unit vector
    let mut psi: Vec<Vec<f64>> = vec![vec![0.0; len]; m];
    for i in 0..len {
        let n = norm(i, g);
        if n > 0.0 {
            for j in 0..m {
                psi[j][i] = g[j][i] / n;
            }
        } else {
            let r: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            for j in 0..m {
                psi[j][i] = r[j] / rn;
            }
        }
    }
    let mut best = value(&psi);
    if scale == 0.0 {
        return (best.max(0.0), psi);
    }
    let tau = step / scale;
    for _ in 0..iters {
        let mut moved: f64 = 0.0;
        for i in 0..len {
            let mut cand: Vec<f64> = (0..m).map(|j| psi[j][i] + tau * g[j][i]).collect();
            let cn = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
            if cn > 1.0 {
                cand.iter_mut().for_each(|v| *v /= cn);
            }
            for j in 0..m {
                moved = moved.max((cand[j] - psi[j][i]).abs());
                psi[j][i] = cand[j];
            }
        }
        best = best.max(value(&psi));
        if moved < 1e-15 {
            break;
        }
    }
    (best, psi)
}

/// Dual total variation `sup { int u div_H Phi d(gamma) : |Phi|_H <= 1 }`.
///
/// Test fields are `Phi = S Psi` with `S` a normalized Gaussian average and
/// `|Psi| <= 1` nodewise, so every iterate is admissible and the returned
/// value is attained by an explicit field. The value is nondecreasing in
/// `ascent_iters`.
pub fn tv_dual(u: &GridField, ascent_iters: usize, seed: u64) -> Result<f64> {
    let axes: Vec<usize> = (0..u.grid().dim()).collect();
    let g = dual_gradient(u, &axes)?;
    Ok(dual_ascent(&g, ascent_iters, seed, 0.5 * u.grid().spacing()).0)
}

/// The admissible test field `Phi = S Psi` attaining [`tv_dual`].
pub fn dual_field(u: &GridField, ascent_iters: usize, seed: u64) -> Result<HVectorField> {
    let grid = u.grid();
    let axes: Vec<usize> = (0..grid.dim()).collect();
    let g = dual_gradient(u, &axes)?;
    let (_, psi) = dual_ascent(&g, ascent_iters, seed, 0.5 * grid.spacing());
    let ops = DualOps::new(grid)?;
    let comps = psi
        .into_iter()
        .map(|mut c| {
            for axis in 0..grid.dim() {
                c = ops.blur.apply_along(&c, grid.stride(axis));
            }
            GridField::new(grid.clone(), c, Regularity::Smooth)
        })
        .collect::<Result<Vec<_>>>()?;
    HVectorField::new(comps)
}

/// Directional total variation along a coordinate axis `nu = +-e_k`.
pub fn tv_directional(u: &GridField, nu: &[f64], ascent_iters: usize, seed: u64) -> Result<f64> {
    let axis = axis_of(u.grid(), nu)?;
    let g = dual_gradient(u, &[axis])?;
    Ok(dual_ascent(&g, ascent_iters, seed, 0.5 * u.grid().spacing()).0)
}

pub(crate) fn axis_of(grid: &Grid, nu: &[f64]) -> Result<usize> {
    if nu.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: nu.len(),
        });
    }
    let nonzero: Vec<usize> = (0..nu.len()).filter(|&k| nu[k] != 0.0).collect();
    match nonzero.as_slice() {
        [k] if nu[*k].abs() == 1.0 => Ok(*k),
        _ => Err(Error::InvalidArgument(
            "directional variation is supported only along coordinate axes".into(),
        )),
    }
}

/// Raw values of a short-time route and their extrapolation to `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleTv {
    pub value: f64,
    pub times: Vec<f64>,
    pub raw: Vec<f64>,
    /// Whether the raw values are nondecreasing as `t` decreases.
    pub monotone: bool,
}

pub(crate) fn validate_schedule(grid: &Grid, schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Schedule("empty schedule".into()));
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Schedule("times must be strictly decreasing".into()));
    }
    let floor = (2.0 * grid.spacing()).powi(2);
    let last = schedule[schedule.len() - 1];
    if !(last >= floor) {
        return Err(Error::Schedule(format!(
            "smallest time {last:e} is below the resolution floor (2h)^2 = {floor:e}"
        )));
    }
    Ok(())
}

pub(crate) fn sqrt_extrapolate(times: &[f64], raw: &[f64]) -> Result<f64> {
    let k = times.len().min(3);
    let s: Vec<f64> = times[times.len() - k..].iter().map(|t| t.sqrt()).collect();
    neville_at_zero(&s, &raw[raw.len() - k..])
}

fn monotone(raw: &[f64]) -> bool {
    raw.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0))
}

/// `lim_{t -> 0} int |grad_H T_t u|_H d(gamma)`, with the gradient taken
/// through the differentiated Mehler kernel and the limit extrapolated in
/// `sqrt t` from the three smallest times.
pub fn tv_semigroup(u: &GridField, schedule: &[f64]) -> Result<f64> {
    Ok(tv_semigroup_detailed(u, schedule)?.value)
}

pub fn tv_semigroup_detailed(u: &GridField, schedule: &[f64]) -> Result<ScheduleTv> {
    validate_schedule(u.grid(), schedule)?;
    let raw = schedule
        .iter()
        .map(|&t| Ok(integrate_h_norm(&ou_gradient(u, t)?)))
        .collect::<Result<Vec<f64>>>()?;
    let value = sqrt_extrapolate(schedule, &raw)?.max(0.0);
    Ok(ScheduleTv {
        value,
        monotone: monotone(&raw),
        times: schedule.to_vec(),
        raw,
    })
}

/// Relaxation value along the smoothing sequence `u_n = T_{t_n} u`:
/// `int |grad_H u_n| d(gamma)` with finite-difference gradients, extrapolated
/// linearly in `t` from the two smallest times.
pub fn tv_relaxation(u: &GridField, schedule: &[f64]) -> Result<f64> {
    validate_schedule(u.grid(), schedule)?;
    let raw = schedule
        .iter()
        .map(|&t| Ok(integrate_h_norm(&gradient(&ou_apply(u, t)?)?)))
        .collect::<Result<Vec<f64>>>()?;
    let k = raw.len();
    if k == 1 {
        return Ok(raw[0]);
    }
    let (t1, t2) = (schedule[k - 2], schedule[k - 1]);
    let (f1, f2) = (raw[k - 2], raw[k - 1]);
    Ok((f2 + (f2 - f1) * t2 / (t1 - t2)).max(0.0))
}

/// `int |grad_H u|_H d(gamma)` for a smooth field.
pub fn tv_smooth(u: &GridField) -> Result<f64> {
    if !u.is_smooth() {
        return Err(Error::NotSmooth("tv_smooth"));
    }
    Ok(integrate_h_norm(&gradient(u)?))
}

/// All applicable total-variation routes for `u`.
pub fn tv_report(u: &GridField, schedule: &[f64], ascent_iters: usize, seed: u64) -> Result<TVReport> {
    let smooth = if u.is_smooth() { Some(tv_smooth(u)?) } else { None };
    Ok(TVReport::new(
        tv_dual(u, ascent_iters, seed)?,
        tv_semigroup(u, schedule)?,
        tv_relaxation(u, schedule)?,
        smooth,
    ))
}

/// `int V_{gamma_1}(u_y) d(gamma^perp)(y)`: the one-dimensional semigroup
/// variation of each line along `axis`, integrated over the orthogonal
/// coordinates.
pub(crate) fn slice_semigroup_tv(u: &GridField, axis: usize, schedule: &[f64]) -> Result<f64> {
    let grid = u.grid();
    grid.require_standard()?;
    validate_schedule(grid, schedule)?;
    let interp = if u.is_smooth() { Interp::Spline } else { Interp::Linear };
    let raw = schedule
        .iter()
        .map(|&t| {
            let (a, b) = Semigroup::OrnsteinUhlenbeck.coefficients(t);
            let op = kernel::operator(grid.n(), grid.radius(), a, b, interp, Weight::Derivative);
            let d = op.apply_along(u.values(), grid.stride(axis));
            Ok(d.iter().zip(grid.weights()).map(|(v, w)| w * v.abs()).sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(sqrt_extrapolate(schedule, &raw)?.max(0.0))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::special::{normal_pdf, INV_SQRT_2PI};
    use approx::assert_abs_diff_eq;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn grid_schedule_respects_floor() {
        let fine = Grid::standard(1, 513, 6.0).unwrap();
        assert_eq!(grid_schedule(&fine), [0.02, 0.01, 0.005, 0.0025]);
        let coarse = Grid::standard(2, 129, 6.0).unwrap();
        let s = grid_schedule(&coarse);
        assert!(validate_schedule(&coarse, &s).is_ok());
        assert!((s[3] - (24.0f64 / 128.0).powi(2)).abs() < 1e-15);
        // an interval whose boundary kernels overlap at the default times
        let e = crate::bv::IndicatorSet::from_predicate(&fine, crate::bv::SetKind::Custom, |x| x[0] > -0.5 && x[0] < 1.0)
            .unwrap();
        let exact = normal_pdf(0.5) + normal_pdf(1.0);
        let v = tv_semigroup(e.membership(), &grid_schedule(&fine)).unwrap();
        assert!(rel(v, exact) < 1e-3, "{v} {exact}");
    }

    fn step(g: &Arc<Grid>) -> GridField {
        GridField::from_fn(g, Regularity::Rough, |x| if x[0] > 0.0 { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn dual_examples() {
        let g = Grid::standard(1, 1025, 6.0).unwrap();
        let v = tv_dual(&step(&g), 50, 1).unwrap();
        assert!(rel(v, INV_SQRT_2PI) < 0.01, "{v}");
        let c = GridField::constant(&g, 2.0).unwrap();
        assert!(tv_dual(&c, 50, 1).unwrap() < 1e-6);
        let x = GridField::from_fn(&g, Regularity::Smooth, |x| x[0]).unwrap();
        assert!(rel(tv_dual(&x, 50, 1).unwrap(), 1.0) < 0.01);
    }

    #[test]
    fn dual_value_is_attained_by_admissible_field() {
        let g = Grid::standard(2, 65, 6.0).unwrap();
        let u = GridField::from_fn(&g, Regularity::Rough, |x| if x[0] + 0.5 * x[1] > 0.3 { 1.0 } else { 0.0 }).unwrap();
        let v = tv_dual(&u, 10, 3).unwrap();
        let phi = dual_field(&u, 10, 3).unwrap();
        assert!(phi.max_norm() <= 1.0 + 1e-12);
        let div = crate::field::divergence_h(&phi).unwrap();
        // the value pairs div Phi with u minus its mean
        let mean = crate::field::integrate(&u) / g.weights().iter().sum::<f64>();
        let direct = crate::field::integrate(&u.zip_map(&div, |a, b| (a - mean) * b).unwrap());
        assert_abs_diff_eq!(v, direct, epsilon = 1e-10);
    }

    #[test]
    fn dual_nondecreasing_in_iterations() {
        let g = Grid::standard(1, 129, 6.0).unwrap();
        let u = GridField::from_fn(&g, Regularity::Smooth, |x| x[0].sin()).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for it in [0, 1, 5, 50] {
            let v = tv_dual(&u, it, 7).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn dual_is_midpoint_convex() {
        use rand::Rng;
        let g = Grid::standard(1, 129, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let (a, b, c) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0));
            let u = GridField::from_fn(&g, Regularity::Smooth, |x| a * x[0].sin() + c).unwrap();
            let v = GridField::from_fn(&g, Regularity::Rough, |x| if x[0] > b { 1.0 } else { 0.0 }).unwrap();
            let m = u.add(&v).unwrap().scale(0.5).unwrap();
            let lhs = tv_dual(&m, 5, 0).unwrap();
            let rhs = 0.5 * (tv_dual(&u, 5, 0).unwrap() + tv_dual(&v, 5, 0).unwrap());
            assert!(lhs <= rhs + 1e-12);
        }
    }

    #[test]
    fn semigroup_examples() {
        let g = Grid::standard(1, 1025, 6.0).unwrap();
        let v = tv_semigroup(&step(&g), &[0.04, 0.02, 0.01]).unwrap();
        assert!(rel(v, INV_SQRT_2PI) < 0.02, "{v}");
        let c = GridField::constant(&g, 1.0).unwrap();
        let d = tv_semigroup_detailed(&c, &DEFAULT_SCHEDULE).unwrap();
        assert!(d.raw.iter().all(|&r| r < 1e-12));
        let x = GridField::from_fn(&g, Regularity::Smooth, |x| x[0]).unwrap();
        assert!(rel(tv_semigroup(&x, &DEFAULT_SCHEDULE).unwrap(), 1.0) < 0.01);
        let hs = tv_semigroup_detailed(&step(&g), &DEFAULT_SCHEDULE).unwrap();
        assert!(hs.monotone);
    }

    #[test]
    fn schedule_validation() {
        let g = Grid::standard(1, 65, 6.0).unwrap();
        let u = step(&g);
        assert!(matches!(tv_semigroup(&u, &[0.01, 0.02]), Err(Error::Schedule(_))));
        assert!(matches!(tv_semigroup(&u, &[]), Err(Error::Schedule(_))));
        // (2h)^2 = (0.375)^2
        assert!(matches!(tv_semigroup(&u, &[0.1, 0.05]), Err(Error::Schedule(_))));
        assert!(matches!(tv_relaxation(&u, &[0.01]), Err(Error::Schedule(_))));
    }

    #[test]
    fn relaxation_examples() {
        let g = Grid::standard(1, 1025, 6.0).unwrap();
        assert!(rel(tv_relaxation(&step(&g), &DEFAULT_SCHEDULE).unwrap(), INV_SQRT_2PI) < 0.02);
        let z = GridField::constant(&g, 0.0).unwrap();
        assert_eq!(tv_relaxation(&z, &DEFAULT_SCHEDULE).unwrap(), 0.0);
        let interval = GridField::from_fn(&g, Regularity::Rough, |x| if x[0].abs() <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        let v = tv_relaxation(&interval, &DEFAULT_SCHEDULE).unwrap();
        assert!(rel(v, 2.0 * normal_pdf(1.0)) < 0.02, "{v}");
    }

    #[test]
    fn smooth_examples() {
        let g = Grid::standard(1, 513, 6.0).unwrap();
        let x = GridField::from_fn(&g, Regularity::Smooth, |x| x[0]).unwrap();
        assert_abs_diff_eq!(tv_smooth(&x).unwrap(), 1.0, epsilon = 1e-6);
        let s = GridField::from_fn(&g, Regularity::Smooth, |x| x[0].sin()).unwrap();
        // oracle: Gauss-Hermite quadrature of |cos x| is poor at the kinks, so
        // use the trapezoid sum of the exact integrand on a fine grid
        let fine = 200_001;
        let h = 16.0 / (fine - 1) as f64;
        let oracle: f64 = (0..fine).map(|i| -8.0 + i as f64 * h).map(|x| x.cos().abs() * normal_pdf(x) * h).sum();
        assert_abs_diff_eq!(tv_smooth(&s).unwrap(), oracle, epsilon = 1e-4);
        assert!(matches!(tv_smooth(&step(&g)), Err(Error::NotSmooth(_))));
        let g2 = Grid::standard(2, 129, 6.0).unwrap();
        let xy = GridField::from_fn(&g2, Regularity::Smooth, |x| x[0] + x[1]).unwrap();
        assert_abs_diff_eq!(tv_smooth(&xy).unwrap(), 2f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn directional_examples() {
        let g = Grid::standard(2, 257, 6.0).unwrap();
        let u = step(&g);
        assert!(rel(tv_directional(&u, &[1.0, 0.0], 10, 0).unwrap(), INV_SQRT_2PI) < 0.01);
        assert!(tv_directional(&u, &[0.0, 1.0], 10, 0).unwrap() < 1e-6);
        let y = GridField::from_fn(&g, Regularity::Smooth, |x| x[1]).unwrap();
        assert!(rel(tv_directional(&y, &[0.0, 1.0], 10, 0).unwrap(), 1.0) < 0.01);
        let s = 0.5f64.sqrt();
        assert!(tv_directional(&u, &[s, s], 10, 0).is_err());
    }
}
