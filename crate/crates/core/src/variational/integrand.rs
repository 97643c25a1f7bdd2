use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrapolate::neville_at_zero;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
/// `prox_{sigma F*}(y)`, written into the output slice.
pub type ProxFn = Arc<dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync>;

/// Growth of `F` at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Growth {
    /// `F(h) <= slope |h| + const`, so `F*` is `+inf` beyond `|Phi| > slope`.
    Linear { slope: f64 },
    /// `alpha1 |h|^p - beta1 <= F(h) <= alpha2 |h|^p + beta2`.
    Power {
        p: f64,
        alpha1: f64,
        beta1: f64,
        alpha2: f64,
        beta2: f64,
    },
    Unspecified,
}

/// A proper, lower semicontinuous convex `F : H -> R u {+inf}` with optional
/// closed forms for its conjugate, recession function, a subgradient and the
/// proximal map of the conjugate.
#[derive(Clone)]
pub struct ConvexIntegrand {
    name: String,
    f: ScalarFn,
    conj: Option<ScalarFn>,
    recession: Option<ScalarFn>,
    subgradient: Option<VectorFn>,
    prox_conj: Option<ProxFn>,
    growth: Growth,
}

impl fmt::Debug for ConvexIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexIntegrand")
            .field("name", &self.name)
            .field("growth", &self.growth)
            .field("conjugate", &self.conj.is_some())
            .field("recession", &self.recession.is_some())
            .finish()
    }
}

fn norm(h: &[f64]) -> f64 {
    h.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ConvexIntegrand {
    pub fn custom<F>(name: &str, f: F, growth: Growth) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            f: Arc::new(f),
            conj: None,
            recession: None,
            subgradient: None,
            prox_conj: None,
            growth,
        }
    }

    pub fn with_conjugate<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(mut self, c: F) -> Self {
        self.conj = Some(Arc::new(c));
        self
    }

    pub fn with_recession<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(mut self, r: F) -> Self {
        self.recession = Some(Arc::new(r));
        self
    }

    pub fn with_subgradient<F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static>(mut self, g: F) -> Self {
        self.subgradient = Some(Arc::new(g));
        self
    }

    pub fn with_prox_conjugate<F: Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static>(mut self, p: F) -> Self {
        self.prox_conj = Some(Arc::new(p));
        self
    }

    /// `F(h) = lambda |h|`.
    pub fn scaled_norm(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Domain {
                what: "norm weight",
                value: lambda,
            });
        }
        Ok(Self::custom("norm", move |h| lambda * norm(h), Growth::Linear { slope: lambda })
            .with_conjugate(move |p| if norm(p) <= lambda * (1.0 + 1e-12) { 0.0 } else { f64::INFINITY })
            .with_recession(move |h| lambda * norm(h))
            .with_subgradient(move |h, out| {
                let n = norm(h);
                for (o, v) in out.iter_mut().zip(h) {
                    *o = if n > 0.0 { lambda * v / n } else { 0.0 };
                }
            })
            .with_prox_conjugate(move |y, _, out| {
                let n = norm(y);
                let s = if n > lambda { lambda / n } else { 1.0 };
                for (o, v) in out.iter_mut().zip(y) {
                    *o = s * v;
                }
            }))
    }

    /// `F(h) = |h|`, whose functional is the total variation.
    pub fn norm() -> Self {
        Self::scaled_norm(1.0).expect("unit weight is valid")
    }

    /// `F(h) = |h|^2 / 2`.
    pub fn half_square() -> Self {
        Self::custom(
            "half-square",
            |h| 0.5 * dot(h, h),
            Growth::Power {
                p: 2.0,
                alpha1: 0.5,
                beta1: 0.0,
                alpha2: 0.5,
                beta2: 0.0,
            },
        )
        .with_conjugate(|p| 0.5 * dot(p, p))
        .with_recession(|h| if norm(h) == 0.0 { 0.0 } else { f64::INFINITY })
        .with_subgradient(|h, out| out.copy_from_slice(h))
        .with_prox_conjugate(|y, sigma, out| {
            for (o, v) in out.iter_mut().zip(y) {
                *o = v / (1.0 + sigma);
            }
        })
    }

    /// `F = 0`.
    pub fn zero() -> Self {
        Self::custom("zero", |_| 0.0, Growth::Linear { slope: 0.0 })
            .with_conjugate(|p| if norm(p) == 0.0 { 0.0 } else { f64::INFINITY })
            .with_recession(|_| 0.0)
            .with_subgradient(|_, out| out.fill(0.0))
            .with_prox_conjugate(|_, _, out| out.fill(0.0))
    }

    /// `F(h) = sqrt(1 + |h|^2)`, the area integrand.
    pub fn area() -> Self {
        Self::custom("area", |h| (1.0 + dot(h, h)).sqrt(), Growth::Linear { slope: 1.0 })
            .with_conjugate(|p| {
                let n2 = dot(p, p);
                if n2 <= 1.0 {
                    -(1.0 - n2).sqrt()
                } else {
                    f64::INFINITY
                }
            })
            .with_recession(norm)
            .with_subgradient(|h, out| {
                let s = (1.0 + dot(h, h)).sqrt();
                for (o, v) in out.iter_mut().zip(h) {
                    *o = v / s;
                }
            })
            .with_prox_conjugate(|y, sigma, out| {
                // q = r y/|y| with r solving r / sqrt(1 - r^2) + (r - |y|) / sigma = 0
                let n = norm(y);
                if n == 0.0 {
                    out.fill(0.0);
                    return;
                }
                let (mut lo, mut hi) = (0.0, n.min(1.0 - 1e-15));
                for _ in 0..100 {
                    let r = 0.5 * (lo + hi);
                    if r / (1.0 - r * r).sqrt() + (r - n) / sigma > 0.0 {
                        hi = r;
                    } else {
                        lo = r;
                    }
                }
                let r = 0.5 * (lo + hi);
                for (o, v) in out.iter_mut().zip(y) {
                    *o = r * v / n;
                }
            })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn eval(&self, h: &[f64]) -> f64 {
        (self.f)(h)
    }

    pub fn has_conjugate(&self) -> bool {
        self.conj.is_some()
    }

    pub(crate) fn conj_fn(&self) -> Option<&ScalarFn> {
        self.conj.as_ref()
    }

    pub(crate) fn subgradient_fn(&self) -> Option<&VectorFn> {
        self.subgradient.as_ref()
    }

    pub(crate) fn prox_conj_fn(&self) -> Option<&ProxFn> {
        self.prox_conj.as_ref()
    }

    /// Samples the defining properties: midpoint convexity, positive
    /// 1-homogeneity of the recession function and, for power growth, the
    /// growth bounds.
    pub fn check(&self, dim: usize, samples: usize, seed: u64) -> Result<IntegrandCheck> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng, scale: f64| -> Vec<f64> { (0..dim).map(|_| rng.random_range(-scale..scale)).collect() };
        let mut convex = true;
        let mut homogeneous = true;
        let mut growth_ok = true;
        for _ in 0..samples {
            let a = draw(&mut rng, 5.0);
            let b = draw(&mut rng, 5.0);
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let (fa, fb, fm) = (self.eval(&a), self.eval(&b), self.eval(&mid));
            if fm > 0.5 * (fa + fb) + 1e-10 * (1.0 + fa.abs() + fb.abs()) {
                convex = false;
            }
            let lam = 0.1 + 4.9 * (rng.random::<f64>());
            let r1 = recession(self, &a)?;
            let scaled: Vec<f64> = a.iter().map(|v| lam * v).collect();
            let r2 = recession(self, &scaled)?;
            if r1.is_finite() != r2.is_finite() || (r1.is_finite() && (r2 - lam * r1).abs() > 1e-8 * (1.0 + r2.abs())) {
                homogeneous = false;
            }
            if let Growth::Power {
                p,
                alpha1,
                beta1,
                alpha2,
                beta2,
            } = self.growth
            {
                let n = norm(&a).powf(p);
                if fa < alpha1 * n - beta1 - 1e-12 || fa > alpha2 * n + beta2 + 1e-12 {
                    growth_ok = false;
                }
            }
        }
        Ok(IntegrandCheck {
            convex,
            recession_homogeneous: homogeneous,
            growth_bounds: growth_ok,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntegrandCheck {
    pub convex: bool,
    pub recession_homogeneous: bool,
    pub growth_bounds: bool,
}

/// Largest value of `[Phi, h] - F(h)` over the cube `[-r, r]^d`: a grid
/// search followed by compass refinement.
fn sup_on_cube(f: &ConvexIntegrand, phi: &[f64], r: f64) -> f64 {
    let d = phi.len();
    let m: usize = match d {
        1 => 4001,
        2 => 301,
        _ => 61,
    };
    let step = 2.0 * r / (m - 1) as f64;
    let total = m.pow(d as u32);
    let mut h = vec![0.0; d];
    let mut best = (f64::NEG_INFINITY, vec![0.0; d]);
    let objective = |h: &[f64]| dot(phi, h) - f.eval(h);
    for idx in 0..total {
        let mut rem = idx;
        for v in h.iter_mut() {
            *v = -r + (rem % m) as f64 * step;
            rem /= m;
        }
        let v = objective(&h);
        if v > best.0 {
            best = (v, h.clone());
        }
    }
    // the origin is always a candidate
    let zero = vec![0.0; d];
    let v0 = objective(&zero);
    if v0 > best.0 {
        best = (v0, zero);
    }
    let (mut val, mut x) = best;
    let mut s = step;
    while s > 1e-10 * r.max(1.0) {
        let mut moved = false;
        for k in 0..d {
            for sign in [-1.0, 1.0] {
                let mut y = x.clone();
                y[k] = (y[k] + sign * s).clamp(-r, r);
                let v = objective(&y);
                if v > val {
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
    val
}

/// `F*(Phi) = sup_h [Phi, h] - F(h)`; `+inf` when the supremum is unbounded.
///
/// Uses the closed form when the integrand carries one. Otherwise the
/// supremum is searched on a cube whose size follows from the growth of
/// `F`, and is declared unbounded when doubling the cube raises it.
pub fn conjugate(f: &ConvexIntegrand, phi: &[f64]) -> Result<f64> {
    if phi.is_empty() || phi.len() > crate::gauss::MAX_GRID_DIM {
        return Err(Error::UnsupportedDimension(phi.len()));
    }
    if let Some(c) = &f.conj {
        return Ok(c(phi));
    }
    numeric_conjugate(f, phi)
}

pub(crate) fn numeric_conjugate(f: &ConvexIntegrand, phi: &[f64]) -> Result<f64> {
    let np = norm(phi);
    let f0 = f.eval(&vec![0.0; phi.len()]);
    if !f0.is_finite() {
        return Err(Error::InvalidArgument("numeric conjugate needs F(0) finite".into()));
    }
    let r = match f.growth {
        Growth::Linear { slope } => {
            if np > slope * (1.0 + 1e-9) + 1e-300 {
                return Ok(f64::INFINITY);
            }
            10.0
        }
        Growth::Power { p, alpha1, beta1, .. } if p > 1.0 && alpha1 > 0.0 => {
            (2.0 * (np + beta1 + f0.abs() + 1.0) / alpha1).powf(1.0 / (p - 1.0)).max(4.0)
        }
        _ => 10.0,
    };
    let s1 = sup_on_cube(f, phi, r);
    let s2 = sup_on_cube(f, phi, 2.0 * r);
    if s2 > s1 + 1e-6 * (1.0 + s1.abs()) {
        return Ok(f64::INFINITY);
    }
    Ok(s1.max(s2))
}

/// `F^inf(h) = lim F(t h) / t`; `+inf` for superlinear growth.
///
/// Without a closed form the quotient is sampled at `t = 10, 100, 1000` along
/// the unit direction of `h` and extrapolated in `1/t`; the result is scaled
/// by `|h|`, so it is exactly positively 1-homogeneous.
pub fn recession(f: &ConvexIntegrand, h: &[f64]) -> Result<f64> {
    if let Some(r) = &f.recession {
        return Ok(r(h));
    }
    numeric_recession(f, h)
}

pub(crate) fn numeric_recession(f: &ConvexIntegrand, h: &[f64]) -> Result<f64> {
    let n = norm(h);
    if n == 0.0 {
        return Ok(0.0);
    }
    let e: Vec<f64> = h.iter().map(|v| v / n).collect();
    let ts = [10.0, 100.0, 1000.0];
    let q: Vec<f64> = ts
        .iter()
        .map(|&t| f.eval(&e.iter().map(|v| t * v).collect::<Vec<_>>()) / t)
        .collect();
    if q.iter().any(|v| !v.is_finite()) || (q[2] > 2.0 * q[1] && q[2] > 1.0) {
        return Ok(f64::INFINITY);
    }
    let inv: Vec<f64> = ts.iter().map(|t| 1.0 / t).collect();
    Ok(n * neville_at_zero(&inv, &q)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bare(f: &ConvexIntegrand) -> ConvexIntegrand {
        let g = f.f.clone();
        ConvexIntegrand::custom(&f.name, move |h| g(h), f.growth)
    }

    #[test]
    fn conjugate_examples() {
        for f in [ConvexIntegrand::norm(), bare(&ConvexIntegrand::norm())] {
            assert_eq!(conjugate(&f, &[0.5, 0.0]).unwrap(), 0.0);
            assert!(conjugate(&f, &[1.5, 0.0]).unwrap().is_infinite());
        }
        for f in [ConvexIntegrand::half_square(), bare(&ConvexIntegrand::half_square())] {
            assert_abs_diff_eq!(conjugate(&f, &[1.0, 0.0]).unwrap(), 0.5, epsilon = 1e-9);
        }
        for f in [ConvexIntegrand::zero(), bare(&ConvexIntegrand::zero())] {
            assert_eq!(conjugate(&f, &[0.0, 0.0]).unwrap(), 0.0);
            assert!(conjugate(&f, &[0.1, 0.0]).unwrap().is_infinite());
        }
        // growth left unspecified: unboundedness is detected by doubling
        let free = ConvexIntegrand::custom("norm", norm, Growth::Unspecified);
        assert!(conjugate(&free, &[1.5]).unwrap().is_infinite());
        assert_abs_diff_eq!(conjugate(&free, &[0.5]).unwrap(), 0.0, epsilon = 1e-12);
        let area = bare(&ConvexIntegrand::area());
        assert_abs_diff_eq!(conjugate(&area, &[0.6]).unwrap(), -0.8, epsilon = 1e-9);
    }

    #[test]
    fn recession_examples() {
        let f = ConvexIntegrand::norm();
        assert_eq!(recession(&f, &[3.0, 4.0]).unwrap(), 5.0);
        assert_abs_diff_eq!(recession(&bare(&f), &[3.0, 4.0]).unwrap(), 5.0, epsilon = 1e-12);
        let area = bare(&ConvexIntegrand::area());
        assert_abs_diff_eq!(recession(&area, &[3.0, 4.0]).unwrap(), 5.0, epsilon = 1e-6);
        let q = bare(&ConvexIntegrand::half_square());
        assert!(recession(&q, &[1.0, 0.0]).unwrap().is_infinite());
        assert_eq!(recession(&q, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn fenchel_young() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for f in [ConvexIntegrand::norm(), ConvexIntegrand::half_square(), ConvexIntegrand::area()] {
            let sub = f.subgradient_fn().unwrap().clone();
            for _ in 0..1000 {
                let h: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
                let p: Vec<f64> = (0..2).map(|_| rng.random_range(-1.2..1.2)).collect();
                assert!(f.eval(&h) + conjugate(&f, &p).unwrap() >= dot(&p, &h) - 1e-12);
                let mut g = vec![0.0; 2];
                sub(&h, &mut g);
                assert_abs_diff_eq!(f.eval(&h) + conjugate(&f, &g).unwrap(), dot(&g, &h), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn prox_of_conjugate_is_moreau_consistent() {
        // prox_{s F*}(y) + s prox_{F/s}(y/s) = y; check the first term is the
        // minimizer of s F*(q) + |q - y|^2 / 2 by comparing with perturbations
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for f in [ConvexIntegrand::norm(), ConvexIntegrand::half_square(), ConvexIntegrand::area()] {
            let prox = f.prox_conj_fn().unwrap().clone();
            let conj = f.conj_fn().unwrap().clone();
            for _ in 0..200 {
                let y: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
                let s = rng.random_range(0.1..3.0);
                let mut q = vec![0.0; 2];
                prox(&y, s, &mut q);
                let obj = |q: &[f64]| s * conj(q) + 0.5 * q.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                let base = obj(&q);
                for _ in 0..20 {
                    let dq: Vec<f64> = q.iter().map(|v| v + rng.random_range(-0.01..0.01)).collect();
                    assert!(obj(&dq) >= base - 1e-9);
                }
            }
        }
    }

    #[test]
    fn sampled_assumptions() {
        for f in [ConvexIntegrand::norm(), ConvexIntegrand::half_square(), ConvexIntegrand::area(), ConvexIntegrand::zero()] {
            let c = f.check(2, 200, 1).unwrap();
            assert!(c.convex && c.recession_homogeneous && c.growth_bounds, "{}: {c:?}", f.name());
        }
        let concave = ConvexIntegrand::custom("concave", |h| -norm(h), Growth::Unspecified);
        assert!(!concave.check(2, 200, 1).unwrap().convex);
    }
}
