use rayon::prelude::*;

use super::integrand::ConvexIntegrand;
use crate::error::{Error, Result};
use crate::field::{Grid, GridField, Regularity};
use crate::special::normal_pdf;

pub const DEFAULT_ROF_TOL: f64 = 1e-6;
pub const DEFAULT_ROF_ITERS: usize = 200_000;

/// Iterations between duality-gap evaluations.
const GAP_EVERY: usize = 10;
const POWER_ITERS: usize = 100;
/// Safety factor on the power-iteration estimate of the operator norm.
const NORM_SAFETY: f64 = 1.1;
const PAR_MIN_LEN: usize = 4096;

#[derive(Debug, Clone)]
pub struct VariationalSolution {
    pub minimizer: GridField,
    /// Primal objective at the minimizer.
    pub objective: f64,
    /// Best dual objective seen; a lower bound for the minimum.
    pub dual_bound: f64,
    /// `objective - dual_bound`.
    pub gap: f64,
    pub iterations: usize,
    /// Estimated norm of the discrete gradient.
    pub operator_norm: f64,
    /// Primal objective of the returned iterate at each gap evaluation; never
    /// increases.
    pub history: Vec<f64>,
    /// Primal objective of the current iterate at each gap evaluation.
    pub raw_history: Vec<f64>,
}

/// Forward differences `D+_j u` (zero on the last node of each axis) with the
/// dual space weighted by cell weights `c`, the measure at the cell corner
/// `x + h/2`. The adjoint is exact for the weighted inner products:
/// `<K u, p>_c = <u, K* p>_w`.
struct Discretization {
    n: usize,
    d: usize,
    h: f64,
    strides: Vec<usize>,
    w: Vec<f64>,
    c: Vec<f64>,
}

impl Discretization {
    fn new(grid: &Grid) -> Result<Self> {
        grid.require_standard()?;
        if grid.n() < 3 {
            return Err(Error::GridTooCoarse(format!("{} nodes per axis", grid.n())));
        }
        let d = grid.dim();
        let h = grid.spacing();
        let mut x = vec![0.0; d];
        let c = (0..grid.len())
            .map(|i| {
                grid.point(i, &mut x);
                x.iter().map(|v| h * normal_pdf(v + 0.5 * h)).product()
            })
            .collect();
        Ok(Self {
            n: grid.n(),
            d,
            h,
            strides: (0..d).map(|j| grid.stride(j)).collect(),
            w: grid.weights().to_vec(),
            c,
        })
    }

    fn len(&self) -> usize {
        self.w.len()
    }

    fn axis_index(&self, i: usize, j: usize) -> usize {
        (i / self.strides[j]) % self.n
    }

    /// `(K u)` interleaved node-major: `out[i d + j] = D+_j u (i)`.
    fn forward(&self, u: &[f64], out: &mut [f64]) {
        let d = self.d;
        let body = |(i, o): (usize, &mut [f64])| {
            for j in 0..d {
                let s = self.strides[j];
                o[j] = if self.axis_index(i, j) + 1 < self.n {
                    (u[i + s] - u[i]) / self.h
                } else {
                    0.0
                };
            }
        };
        if u.len() >= PAR_MIN_LEN {
            out.par_chunks_mut(d).enumerate().for_each(body);
        } else {
            out.chunks_mut(d).enumerate().for_each(body);
        }
    }

    /// `K* p = (1/w) sum_j D+_j^T (c p_j)`.
    fn adjoint(&self, p: &[f64], out: &mut [f64]) {
        let d = self.d;
        let body = |(i, o): (usize, &mut f64)| {
            let mut acc = 0.0;
            for j in 0..d {
                let s = self.strides[j];
                let k = self.axis_index(i, j);
                if k > 0 {
                    acc += self.c[i - s] * p[(i - s) * d + j];
                }
                if k + 1 < self.n {
                    acc -= self.c[i] * p[i * d + j];
                }
            }
            *o = acc / (self.h * self.w[i]);
        };
        if out.len() >= PAR_MIN_LEN {
            out.par_iter_mut().enumerate().for_each(body);
        } else {
            out.iter_mut().enumerate().for_each(body);
        }
    }

    fn norm_w(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.w).map(|(a, b)| a * a * b).sum::<f64>().sqrt()
    }

    /// Power iteration on `K* K` in `L^2(w)`, started from a checkerboard.
    fn operator_norm(&self) -> f64 {
        let mut v: Vec<f64> = (0..self.len())
            .map(|i| {
                let parity: usize = (0..self.d).map(|j| self.axis_index(i, j)).sum();
                if parity % 2 == 0 { 1.0 } else { -1.0 }
            })
            .collect();
        let mut kv = vec![0.0; self.len() * self.d];
        let mut est = 0.0;
        for _ in 0..POWER_ITERS {
            let nv = self.norm_w(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            self.forward(&v, &mut kv);
            self.adjoint(&kv, &mut v);
            est = self.norm_w(&v);
        }
        est.sqrt()
    }
}

/// `prox_{sigma F*}` at every node, with `F*` of the result when it is not
/// available in closed form.
struct DualProx<'a> {
    f: &'a ConvexIntegrand,
    d: usize,
}

impl DualProx<'_> {
    /// Writes the prox into `p` and returns `F*(p_i)` per node.
    fn apply(&self, y: &[f64], sigma: f64, p: &mut [f64], conj_vals: &mut [f64]) {
        let d = self.d;
        let body = |((yi, pi), fi): ((&[f64], &mut [f64]), &mut f64)| {
            if let Some(prox) = self.f.prox_conj_fn() {
                prox(yi, sigma, pi);
                *fi = match self.f.conj_fn() {
                    Some(c) => c(pi),
                    None => fenchel_young_conj(self.f, yi, pi, sigma),
                };
            } else {
                // Moreau: prox_{s F*}(y) = y - s prox_{F/s}(y/s)
                let z: Vec<f64> = yi.iter().map(|v| v / sigma).collect();
                let h = prox_primal(self.f, &z, sigma);
                for k in 0..d {
                    pi[k] = yi[k] - sigma * h[k];
                }
                *fi = match self.f.conj_fn() {
                    Some(c) => c(pi),
                    None => pi.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() - self.f.eval(&h),
                };
            }
        };
        if conj_vals.len() >= PAR_MIN_LEN {
            y.par_chunks(d)
                .zip(p.par_chunks_mut(d))
                .zip(conj_vals.par_iter_mut())
                .for_each(body);
        } else {
            y.chunks(d).zip(p.chunks_mut(d)).zip(conj_vals.iter_mut()).for_each(body);
        }
    }
}

/// `F*(q)` at `q = prox_{s F*}(y)` from the Fenchel-Young equality with the
/// primal point `(y - q) / s`.
fn fenchel_young_conj(f: &ConvexIntegrand, y: &[f64], q: &[f64], sigma: f64) -> f64 {
    let h: Vec<f64> = y.iter().zip(q).map(|(a, b)| (a - b) / sigma).collect();
    q.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() - f.eval(&h)
}

/// `argmin_h F(h)/sigma + |h - z|^2 / 2` by compass search from `z`.
fn prox_primal(f: &ConvexIntegrand, z: &[f64], sigma: f64) -> Vec<f64> {
    let obj = |h: &[f64]| f.eval(h) / sigma + 0.5 * h.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let mut x = z.to_vec();
    let mut val = obj(&x);
    let scale = z.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut s = scale;
    while s > 1e-13 * scale {
        let mut moved = false;
        for k in 0..x.len() {
            for sign in [-1.0, 1.0] {
                let mut y = x.clone();
                y[k] += sign * s;
                let v = obj(&y);
                if v < val {
                    val = v;
                    x = y;
                    moved = true;
                }
            }
        }
        if !moved {
            s *= 0.5;
        }
    }
    x
}

/// Unique minimizer of `int F(D u) d(gamma) + 1/2 int (u - g)^2 d(gamma)`,
/// started from `u = g`.
///
/// Accelerated primal-dual (Chambolle-Pock) iteration on the forward
/// difference discretization. Stops once the best primal value minus the
/// best dual value is below `tol`; the returned field is the iterate with the
/// lowest primal value, so the reported objective never increases.
pub fn rof_minimize(f: &ConvexIntegrand, g: &GridField, tol: f64, max_iters: usize) -> Result<VariationalSolution> {
    rof_minimize_from(f, g, g, tol, max_iters)
}

pub fn rof_minimize_from(
    f: &ConvexIntegrand,
    g: &GridField,
    init: &GridField,
    tol: f64,
    max_iters: usize,
) -> Result<VariationalSolution> {
    g.check_same_grid(init)?;
    if !(tol > 0.0) {
        return Err(Error::Domain { what: "tolerance", value: tol });
    }
    for v in [g, init] {
        if let Some(i) = v.values().iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
    }
    let grid = g.grid();
    let disc = Discretization::new(grid)?;
    let (len, d) = (disc.len(), disc.d);
    let gv = g.values();
    let lip = NORM_SAFETY * disc.operator_norm();
    let prox = DualProx { f, d };

    let mut u = init.values().to_vec();
    let mut u_bar = u.clone();
    let mut u_prev = vec![0.0; len];
    let mut p = vec![0.0; len * d];
    let mut y = vec![0.0; len * d];
    let mut kp = vec![0.0; len];
    let mut conj_vals = vec![0.0; len];
    let mut ku = vec![0.0; len * d];
    let mut have_conj = false;

    let primal = |u: &[f64], ku: &mut [f64]| -> f64 {
        disc.forward(u, ku);
        let reg: f64 = (0..len).map(|i| disc.c[i] * f.eval(&ku[i * d..(i + 1) * d])).sum();
        let fid: f64 = (0..len).map(|i| 0.5 * disc.w[i] * (u[i] - gv[i]).powi(2)).sum();
        reg + fid
    };

    let mut tau = 1.0 / lip;
    let mut sigma = 1.0 / (tau * lip * lip);
    let mut best_primal = f64::INFINITY;
    let mut best_u = u.clone();
    let mut best_dual = f64::NEG_INFINITY;
    let mut history = Vec::new();
    let mut raw_history = Vec::new();

    for iter in 0..=max_iters {
        if iter % GAP_EVERY == 0 || iter == max_iters {
            let pv = primal(&u, &mut ku);
            raw_history.push(pv);
            if pv < best_primal {
                best_primal = pv;
                best_u.copy_from_slice(&u);
            }
            history.push(best_primal);
            // D(p) = <g, K*p>_w - |K*p|_w^2 / 2 - sum c F*(p); p = 0 before
            // the first step, where F*(0) = -inf F
            disc.adjoint(&p, &mut kp);
            let lin: f64 = (0..len).map(|i| disc.w[i] * (gv[i] * kp[i] - 0.5 * kp[i] * kp[i])).sum();
            let conj_term: f64 = if have_conj {
                (0..len).map(|i| disc.c[i] * conj_vals[i]).sum()
            } else {
                let zero = vec![0.0; d];
                let c0 = match f.conj_fn() {
                    Some(c) => c(&zero),
                    None => -prox_free_inf(f, d),
                };
                disc.c.iter().sum::<f64>() * c0
            };
            let dv = lin - conj_term;
            if dv.is_finite() && dv > best_dual {
                best_dual = dv;
            }
            let gap = best_primal - best_dual;
            log::trace!("rof iter {iter}: primal {pv:e} dual {dv:e} gap {gap:e}");
            if gap < tol {
                return Ok(VariationalSolution {
                    minimizer: GridField::from_parts(grid.clone(), best_u, Regularity::Rough),
                    objective: best_primal,
                    dual_bound: best_dual,
                    gap,
                    iterations: iter,
                    operator_norm: lip / NORM_SAFETY,
                    history,
                    raw_history,
                });
            }
            if iter == max_iters {
                return Err(Error::NotConverged { iterations: iter, gap });
            }
        }
        // dual step
        disc.forward(&u_bar, &mut ku);
        for k in 0..len * d {
            y[k] = p[k] + sigma * ku[k];
        }
        prox.apply(&y, sigma, &mut p, &mut conj_vals);
        have_conj = true;
        // primal step
        disc.adjoint(&p, &mut kp);
        u_prev.copy_from_slice(&u);
        for i in 0..len {
            u[i] = (u[i] - tau * kp[i] + tau * gv[i]) / (1.0 + tau);
        }
        let theta = 1.0 / (1.0 + 2.0 * tau).sqrt();
        tau *= theta;
        sigma /= theta;
        for i in 0..len {
            u_bar[i] = u[i] + theta * (u[i] - u_prev[i]);
        }
    }
    unreachable!("the loop returns at max_iters")
}

/// `inf F` near the origin, used for `F*(0)` when no closed form exists.
fn prox_free_inf(f: &ConvexIntegrand, d: usize) -> f64 {
    let z = vec![0.0; d];
    let h = prox_primal(f, &z, 1e-8);
    f.eval(&h)
}
