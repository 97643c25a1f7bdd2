use rayon::prelude::*;

use super::{Grid, GridField, HVectorField, Regularity};
use crate::error::{Error, Result};
use crate::quad1d;

/// Partial derivative along `axis`.
///
/// Fourth-order central differences in the interior, second-order central
/// differences one node in from the edge and second-order one-sided
/// differences at the outermost nodes. Quadratics are differentiated exactly.
pub fn gradient_axis(u: &GridField, axis: usize) -> Result<GridField> {
    let grid = u.grid();
    if axis >= grid.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let n = grid.n();
    if n < 3 {
        return Err(Error::GridTooCoarse(format!("{n} nodes per axis, gradient needs 3")));
    }
    let values = derivative_along(grid, u.values(), axis);
    Ok(GridField::from_parts(grid.clone(), values, Regularity::Smooth))
}

pub(crate) fn derivative_along(grid: &Grid, v: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.n();
    let s = grid.stride(axis);
    let h = grid.spacing();
    let inv2h = 0.5 / h;
    let inv12h = 1.0 / (12.0 * h);
    (0..v.len())
        .into_par_iter()
        .map(|idx| {
            let i = (idx / s) % n;
            if i == 0 {
                (3.0 * (v[idx + s] - v[idx]) - (v[idx + 2 * s] - v[idx + s])) * inv2h
            } else if i == n - 1 {
                (3.0 * (v[idx] - v[idx - s]) - (v[idx - s] - v[idx - 2 * s])) * inv2h
            } else if i == 1 || i == n - 2 {
                (v[idx + s] - v[idx - s]) * inv2h
            } else {
                (8.0 * (v[idx + s] - v[idx - s]) - (v[idx + 2 * s] - v[idx - 2 * s])) * inv12h
            }
        })
        .collect()
}

/// `grad_H u`: the partial derivatives along the grid axes.
pub fn gradient(u: &GridField) -> Result<HVectorField> {
    let comps = (0..u.grid().dim())
        .map(|j| gradient_axis(u, j))
        .collect::<Result<Vec<_>>>()?;
    HVectorField::new(comps)
}

/// `h_hat_j(x) = (Q^{-1}(x - a))_j`, which is `x_j` for the standard measure.
fn hat_axis(grid: &Grid, j: usize) -> Result<Vec<f64>> {
    if grid.is_standard() {
        return Ok((0..grid.len()).map(|i| grid.coord(i, j)).collect());
    }
    let measure = grid.measure();
    let p = measure.precision()?;
    let mean = measure.mean();
    let d = grid.dim();
    let mut x = vec![0.0; d];
    Ok((0..grid.len())
        .map(|i| {
            grid.point(i, &mut x);
            (0..d).map(|k| p[(j, k)] * (x[k] - mean[k])).sum()
        })
        .collect())
}

/// `d*_j phi = d_j phi - phi h_hat_j`, minus the formal adjoint of `d_j`
/// in `L^2(gamma)`.
pub fn adjoint_derivative(phi: &GridField, j: usize) -> Result<GridField> {
    let d = gradient_axis(phi, j)?;
    let hat = hat_axis(phi.grid(), j)?;
    let values = d
        .values()
        .iter()
        .zip(phi.values())
        .zip(&hat)
        .map(|((dv, p), x)| dv - p * x)
        .collect();
    Ok(GridField::from_parts(phi.grid().clone(), values, Regularity::Smooth))
}

/// `div_H Phi = sum_j d*_j Phi_j`.
pub fn divergence_h(phi: &HVectorField) -> Result<GridField> {
    let grid = phi.grid();
    let mut acc = vec![0.0; grid.len()];
    for (j, c) in phi.components().iter().enumerate() {
        let dj = adjoint_derivative(c, j)?;
        for (a, v) in acc.iter_mut().zip(dj.values()) {
            *a += v;
        }
    }
    Ok(GridField::from_parts(grid.clone(), acc, Regularity::Smooth))
}

/// `int u d(gamma)` by the grid's Gaussian-weighted trapezoid rule.
pub fn integrate(u: &GridField) -> f64 {
    u.values().iter().zip(u.grid().weights()).map(|(v, w)| v * w).sum()
}

/// `int |V|_H d(gamma)`.
pub fn integrate_h_norm(v: &HVectorField) -> f64 {
    let w = v.grid().weights();
    (0..w.len()).map(|i| w[i] * v.norm_at(i)).sum()
}

/// Young function `A(t) = int_0^t log^{1/2}(1 + s) ds` of the LlogL^{1/2}
/// Orlicz class.
pub fn llogl_young(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    quad1d::integrate(|s| s.ln_1p().sqrt(), 0.0, t, 1e-13)
}

/// `int A(|u|) d(gamma)`.
///
/// `A` is accumulated over the sorted distinct values of `|u|`, so each node
/// costs one short quadrature rather than an integral from zero.
pub fn llogl_gauge(u: &GridField) -> f64 {
    let mut order: Vec<usize> = (0..u.values().len()).collect();
    let abs: Vec<f64> = u.values().iter().map(|v| v.abs()).collect();
    order.sort_by(|&a, &b| abs[a].total_cmp(&abs[b]));
    let w = u.grid().weights();
    let mut prev = 0.0;
    let mut a = 0.0;
    let mut total = 0.0;
    for i in order {
        let t = abs[i];
        if t > prev {
            a += quad1d::integrate(|s| s.ln_1p().sqrt(), prev, t, 1e-14);
            prev = t;
        }
        total += w[i] * a;
    }
    total
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::gauss::GaussianMeasure;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g1(n: usize) -> Arc<Grid> {
        Grid::standard(1, n, 6.0).unwrap()
    }

    #[test]
    fn gradient_examples() {
        let g = g1(513);
        let u = GridField::from_fn(&g, Regularity::Smooth, |x| x[0]).unwrap();
        let du = gradient(&u).unwrap();
        assert!(du.component(0).values().iter().all(|v| (v - 1.0).abs() < 1e-12));

        let q = GridField::from_fn(&g, Regularity::Smooth, |x| x[0] * x[0]).unwrap();
        let dq = gradient_axis(&q, 0).unwrap();
        let err = (0..g.len()).map(|i| (dq.values()[i] - 2.0 * g.axis()[i]).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");

        let g2 = Grid::standard(2, 129, 6.0).unwrap();
        let s = GridField::from_fn(&g2, Regularity::Smooth, |x| x[0].sin()).unwrap();
        let ds = gradient(&s).unwrap();
        let h = g2.spacing();
        let mut x = [0.0; 2];
        for i in 0..g2.len() {
            g2.point(i, &mut x);
            assert!((ds.component(0).values()[i] - x[0].cos()).abs() < h * h);
            assert_eq!(ds.component(1).values()[i], 0.0);
        }
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = Grid::standard(2, 33, 6.0).unwrap();
        let c = GridField::constant(&g, 3.7).unwrap();
        let d = gradient(&c).unwrap();
        assert_eq!(d.max_norm(), 0.0);
    }

    #[test]
    fn gradient_needs_three_nodes() {
        let g = Grid::standard(1, 2, 1.0).unwrap();
        let u = GridField::constant(&g, 1.0).unwrap();
        assert!(matches!(gradient(&u), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn adjoint_examples() {
        let g = g1(257);
        let one = GridField::constant(&g, 1.0).unwrap();
        let a = adjoint_derivative(&one, 0).unwrap();
        for (v, x) in a.values().iter().zip(g.axis()) {
            assert_abs_diff_eq!(*v, -x, epsilon = 1e-12);
        }
        let id = GridField::from_fn(&g, Regularity::Smooth, |x| x[0]).unwrap();
        let b = adjoint_derivative(&id, 0).unwrap();
        for (v, x) in b.values().iter().zip(g.axis()) {
            assert_abs_diff_eq!(*v, 1.0 - x * x, epsilon = 1e-11);
        }
        // int x d*phi = -int phi
        let phi = GridField::from_fn(&g, Regularity::Smooth, |x| (-x[0] * x[0]).exp() * (1.0 + x[0])).unwrap();
        let dphi = adjoint_derivative(&phi, 0).unwrap();
        let lhs = integrate(&id.zip_map(&dphi, |a, b| a * b).unwrap());
        assert_abs_diff_eq!(lhs, -integrate(&phi), epsilon = 1e-6);
    }

    #[test]
    fn divergence_examples() {
        let g = Grid::standard(2, 65, 6.0).unwrap();
        let v = HVectorField::from_fn(&g, |x, out| out.copy_from_slice(x)).unwrap();
        let div = divergence_h(&v).unwrap();
        let mut x = [0.0; 2];
        for i in 0..g.len() {
            g.point(i, &mut x);
            assert_abs_diff_eq!(div.values()[i], 2.0 - x[0] * x[0] - x[1] * x[1], epsilon = 1e-10);
        }
        let g1 = g1(65);
        let c = HVectorField::from_fn(&g1, |_, out| out[0] = 1.0).unwrap();
        let d1 = divergence_h(&c).unwrap();
        for (v, x) in d1.values().iter().zip(g1.axis()) {
            assert_abs_diff_eq!(*v, -x, epsilon = 1e-12);
        }
    }

    #[test]
    fn divergence_duality() {
        let g = Grid::standard(2, 257, 6.0).unwrap();
        let u = GridField::from_fn(&g, Regularity::Smooth, |x| (x[0] - 0.3 * x[1]).sin() + 0.2 * x[1] * x[1]).unwrap();
        let phi = HVectorField::from_fn(&g, |x, out| {
            let bump = (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp();
            out[0] = bump * x[1];
            out[1] = bump * (1.0 + x[0]);
        })
        .unwrap();
        let div = divergence_h(&phi).unwrap();
        let lhs = integrate(&u.zip_map(&div, |a, b| a * b).unwrap());
        let du = gradient(&u).unwrap();
        let w = g.weights();
        let rhs: f64 = (0..g.len())
            .map(|i| {
                w[i] * (du.component(0).values()[i] * phi.component(0).values()[i]
                    + du.component(1).values()[i] * phi.component(1).values()[i])
            })
            .sum();
        assert_abs_diff_eq!(lhs, -rhs, epsilon = 1e-5);
    }

    #[test]
    fn adjoint_for_general_measure() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 0.7]);
        let m = GaussianMeasure::new(vec![0.2, -0.1], cov).unwrap();
        let g = Grid::new(2, 241, 8.0, m).unwrap();
        let u = GridField::from_fn(&g, Regularity::Smooth, |x| x[0] * x[1] + x[0].cos()).unwrap();
        let phi = GridField::from_fn(&g, Regularity::Smooth, |x| 1.0 / (1.0 + x[0] * x[0] + x[1] * x[1])).unwrap();
        for j in 0..2 {
            let du = gradient_axis(&u, j).unwrap();
            let dstar = adjoint_derivative(&phi, j).unwrap();
            let lhs = integrate(&du.zip_map(&phi, |a, b| a * b).unwrap());
            let rhs = -integrate(&u.zip_map(&dstar, |a, b| a * b).unwrap());
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-5);
        }
    }

    #[test]
    fn adjoint_consistency_on_random_pairs() {
        let g = Grid::standard(1, 513, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let u = GridField::from_fn(&g, Regularity::Smooth, |x| c[0] * x[0] + c[1] * (c[2] * x[0]).sin()).unwrap();
            let phi =
                GridField::from_fn(&g, Regularity::Smooth, |x| (c[3] * x[0]).cos() / (1.0 + x[0] * x[0])).unwrap();
            let du = gradient_axis(&u, 0).unwrap();
            let dstar = adjoint_derivative(&phi, 0).unwrap();
            let lhs = integrate(&du.zip_map(&phi, |a, b| a * b).unwrap());
            let rhs = -integrate(&u.zip_map(&dstar, |a, b| a * b).unwrap());
            assert!((lhs - rhs).abs() < 1e-5, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn integration_examples() {
        let g = g1(257);
        assert_abs_diff_eq!(integrate(&GridField::constant(&g, 1.0).unwrap()), 1.0, epsilon = 1e-6);
        let x2 = GridField::from_fn(&g, Regularity::Smooth, |x| x[0] * x[0]).unwrap();
        assert_abs_diff_eq!(integrate(&x2), 1.0, epsilon = 1e-6);
        let g2 = Grid::standard(2, 129, 6.0).unwrap();
        let v = HVectorField::from_fn(&g2, |_, out| out.fill(1.0)).unwrap();
        assert_abs_diff_eq!(integrate_h_norm(&v), 2f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn llogl_values() {
        let g = g1(65);
        assert_eq!(llogl_gauge(&GridField::constant(&g, 0.0).unwrap()), 0.0);
        // oracle: adaptive quadrature of sqrt(log(1+s)) over [0, 1]
        let expected = 0.592_590_422_497_569_3;
        assert_abs_diff_eq!(llogl_young(1.0), expected, epsilon = 1e-10);
        assert_abs_diff_eq!(llogl_gauge(&GridField::constant(&g, 1.0).unwrap()), expected, epsilon = 1e-6);
        assert_abs_diff_eq!(llogl_gauge(&GridField::constant(&g, -1.0).unwrap()), expected, epsilon = 1e-6);
    }

    #[test]
    fn llogl_gauge_matches_direct_evaluation() {
        let g = g1(129);
        let u = GridField::from_fn(&g, Regularity::Smooth, |x| 2.0 * x[0].sin()).unwrap();
        let direct: f64 = u
            .values()
            .iter()
            .zip(g.weights())
            .map(|(v, w)| w * llogl_young(v.abs()))
            .sum();
        assert_abs_diff_eq!(llogl_gauge(&u), direct, epsilon = 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn llogl_is_monotone(a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let g = g1(33);
            let u = GridField::from_fn(&g, Regularity::Smooth, |x| a * x[0].cos()).unwrap();
            let v = GridField::from_fn(&g, Regularity::Smooth, |x| (a + b) * x[0].cos()).unwrap();
            prop_assert!(llogl_gauge(&u) <= llogl_gauge(&v) + 1e-12);
        }

        #[test]
        fn integrate_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let g = g1(65);
            let u = GridField::from_fn(&g, Regularity::Smooth, |x| x[0].sin()).unwrap();
            let v = GridField::from_fn(&g, Regularity::Smooth, |x| x[0] * x[0]).unwrap();
            let lhs = integrate(&u.scale(a).unwrap().add(&v.scale(b).unwrap()).unwrap());
            let rhs = a * integrate(&u) + b * integrate(&v);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
