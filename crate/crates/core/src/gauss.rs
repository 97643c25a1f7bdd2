//! Gaussian measures on R^d, tensor quadrature rules, sampling and
//! Cameron-Martin densities.

use std::f64::consts::PI;

use gauss_quad::hermite::GaussHermite;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension supported by tensor-grid computations.
pub const MAX_GRID_DIM: usize = 3;

/// A Gaussian measure `N(a, Q)` on R^d.
#[derive(Debug, Clone)]
pub struct GaussianMeasure {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    /// `L` with `L L^T = Q`.
    factor: DMatrix<f64>,
    /// `Q^{-1}` when `Q` is positive definite.
    precision: Option<DMatrix<f64>>,
    log_det: f64,
    standard: bool,
}

impl GaussianMeasure {
    /// Builds `N(mean, covariance)`. The covariance must be symmetric positive
    /// semidefinite; a singular covariance is accepted here but every
    /// operation that needs a density reports [`Error::DegenerateMeasure`].
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: covariance.nrows(),
            });
        }
        let scale = covariance.amax().max(1.0);
        for i in 0..d {
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::DegenerateMeasure("covariance is not symmetric".into()));
                }
            }
        }
        let eig = covariance.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.min();
        if min_eig < -1e-12 * scale {
            return Err(Error::DegenerateMeasure(format!(
                "covariance has negative eigenvalue {min_eig:e}"
            )));
        }
        let (factor, precision, log_det) = match covariance.clone().cholesky() {
            Some(chol) if min_eig > 1e-14 * scale => {
                let l = chol.l();
                let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
                (l, Some(chol.inverse()), log_det)
            }
            _ => {
                let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
                let l = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals);
                (l, None, f64::NEG_INFINITY)
            }
        };
        let standard = mean.iter().all(|&m| m == 0.0) && covariance == DMatrix::identity(d, d);
        Ok(Self {
            mean: DVector::from_vec(mean),
            covariance,
            factor,
            precision,
            log_det,
            standard,
        })
    }

    /// The standard Gaussian `N(0, I_d)`.
    pub fn standard(dim: usize) -> Self {
        Self::new(vec![0.0; dim.max(1)], DMatrix::identity(dim.max(1), dim.max(1)))
            .expect("identity covariance is valid")
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    pub fn is_degenerate(&self) -> bool {
        self.precision.is_none()
    }

    pub fn precision(&self) -> Result<&DMatrix<f64>> {
        self.precision
            .as_ref()
            .ok_or_else(|| Error::DegenerateMeasure("singular covariance".into()))
    }

    /// Lower-triangular square root of the covariance, used to map standard
    /// normal draws and Gauss-Hermite nodes onto this measure.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// `G(x) = (2 pi)^{-d/2} (det Q)^{-1/2} exp(-<x-a, Q^{-1}(x-a)>/2)`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let precision = self.precision()?;
        let d = self.dim();
        if self.standard {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            return Ok((-0.5 * r2).exp() / (2.0 * PI).powf(0.5 * d as f64));
        }
        let diff = DVector::from_iterator(d, x.iter().zip(self.mean.iter()).map(|(a, b)| a - b));
        let q = diff.dot(&(precision * &diff));
        Ok((-0.5 * (q + self.log_det + d as f64 * (2.0 * PI).ln())).exp())
    }

    /// `<x - a, Q^{-1} h>`, the measurable linear functional attached to `h`
    /// in the finite-dimensional identification of the Cameron-Martin space.
    pub fn hat(&self, h: &[f64], x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(h)?;
        let precision = self.precision()?;
        let coeffs = precision * DVector::from_column_slice(h);
        Ok(x.iter()
            .zip(self.mean.iter())
            .zip(coeffs.iter())
            .map(|((xi, ai), ci)| (xi - ai) * ci)
            .sum())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

impl PartialEq for GaussianMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.covariance == other.covariance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    /// Composite trapezoid weights on the box `[-R, R]^d` (Lebesgue weights).
    UniformTruncated,
    /// Tensor Gauss-Hermite rule for the standard Gaussian weight.
    GaussHermite,
}

/// A tensor-product quadrature rule on R^d, `d <= 3`.
///
/// Nodes are not materialized; the rule stores its one-dimensional factor.
/// For [`QuadratureKind::UniformTruncated`] the weights are Lebesgue cell
/// weights and sum to `(2R)^d`; for [`QuadratureKind::GaussHermite`] they are
/// probabilities and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: QuadratureKind,
    dim: usize,
    axis_nodes: Vec<f64>,
    axis_weights: Vec<f64>,
    box_radius: Option<f64>,
}

/// Default half-width of the uniform box, in standard deviations.
pub const DEFAULT_BOX_RADIUS: f64 = 6.0;

impl QuadratureRule {
    pub fn build(dim: usize, kind: QuadratureKind, level: usize, box_radius: Option<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_GRID_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if level < 8 {
            return Err(Error::InvalidArgument(format!("quadrature level {level} < 8")));
        }
        match kind {
            QuadratureKind::GaussHermite => {
                let (axis_nodes, axis_weights) = gauss_hermite_probabilists(level);
                Ok(Self {
                    kind,
                    dim,
                    axis_nodes,
                    axis_weights,
                    box_radius: None,
                })
            }
            QuadratureKind::UniformTruncated => {
                let radius = box_radius.unwrap_or(DEFAULT_BOX_RADIUS);
                if !(radius > 0.0) {
                    return Err(Error::InvalidArgument(format!("box radius {radius}")));
                }
                let h = 2.0 * radius / (level - 1) as f64;
                let axis_nodes = (0..level).map(|i| -radius + i as f64 * h).collect();
                let axis_weights = (0..level)
                    .map(|i| if i == 0 || i == level - 1 { 0.5 * h } else { h })
                    .collect();
                Ok(Self {
                    kind,
                    dim,
                    axis_nodes,
                    axis_weights,
                    box_radius: Some(radius),
                })
            }
        }
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.axis_nodes.len()
    }

    pub fn box_radius(&self) -> Option<f64> {
        self.box_radius
    }

    pub fn axis_nodes(&self) -> &[f64] {
        &self.axis_nodes
    }

    pub fn axis_weights(&self) -> &[f64] {
        &self.axis_weights
    }

    pub fn len(&self) -> usize {
        self.level().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes node `index` into `x` and returns its weight.
    pub fn node(&self, index: usize, x: &mut [f64]) -> f64 {
        let n = self.level();
        let mut rem = index;
        let mut w = 1.0;
        for k in (0..self.dim).rev() {
            let i = rem % n;
            rem /= n;
            x[k] = self.axis_nodes[i];
            w *= self.axis_weights[i];
        }
        w
    }

    /// Sum of all weights.
    pub fn total_weight(&self) -> f64 {
        self.axis_weights.iter().sum::<f64>().powi(self.dim as i32)
    }

    /// `int f d(gamma)` for the given measure.
    ///
    /// Gauss-Hermite nodes are mapped through `x = a + L z`; uniform nodes are
    /// weighted by the density of `measure`.
    pub fn integrate<F>(&self, measure: &GaussianMeasure, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        if measure.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: measure.dim(),
            });
        }
        if self.kind == QuadratureKind::UniformTruncated {
            measure.precision()?;
        }
        let d = self.dim;
        let n = self.level();
        // Parallel over the slowest axis; each chunk is summed in order.
        let partial: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|outer| {
                let inner = n.pow(d as u32 - 1);
                let mut x = vec![0.0; d];
                let mut z = vec![0.0; d];
                let mut s = 0.0;
                for j in 0..inner {
                    let w = self.node(outer * inner + j, &mut z);
                    let value = match self.kind {
                        QuadratureKind::GaussHermite => {
                            if measure.is_standard() {
                                f(&z)
                            } else {
                                let l = measure.factor();
                                for r in 0..d {
                                    x[r] = measure.mean()[r] + (0..d).map(|c| l[(r, c)] * z[c]).sum::<f64>();
                                }
                                f(&x)
                            }
                        }
                        QuadratureKind::UniformTruncated => {
                            let g = measure.density(&z).unwrap_or(0.0);
                            g * f(&z)
                        }
                    };
                    s += w * value;
                }
                s
            })
            .collect();
        Ok(partial.iter().sum())
    }
}

/// Probabilists' Gauss-Hermite rule: nodes and weights for `N(0, 1)`.
pub fn gauss_hermite_probabilists(level: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussHermite::new(level.max(2)).expect("level >= 2");
    let mut pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (x * std::f64::consts::SQRT_2, w / PI.sqrt()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize: the eigen-solver leaves round-off asymmetry in the tails.
    let n = pairs.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    pairs.into_iter().map(|(x, w)| (x, w / total)).unzip()
}

/// Row-major batch of sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointBatch {
    dim: usize,
    data: Vec<f64>,
}

impl PointBatch {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

const SAMPLE_CHUNK: usize = 4096;

/// Deterministic i.i.d. draws from `measure`.
///
/// Draws are produced in fixed-size chunks, each from its own ChaCha stream
/// `(seed, chunk)`, so the output does not depend on the thread count.
pub fn sample_gaussian(measure: &GaussianMeasure, n: usize, seed: u64) -> Result<PointBatch> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let d = measure.dim();
    let l = measure.factor();
    let mean = measure.mean();
    let mut data = vec![0.0; n * d];
    data.par_chunks_mut(SAMPLE_CHUNK * d)
        .enumerate()
        .for_each(|(chunk, out)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let mut z = vec![0.0; d];
            for p in out.chunks_exact_mut(d) {
                for v in z.iter_mut() {
                    *v = StandardNormal.sample(&mut rng);
                }
                for r in 0..d {
                    let mut s = mean[r];
                    for c in 0..=r.min(d - 1) {
                        s += l[(r, c)] * z[c];
                    }
                    // factor may be full when built from an eigen-decomposition
                    for c in r + 1..d {
                        s += l[(r, c)] * z[c];
                    }
                    p[r] = s;
                }
            }
        });
    Ok(PointBatch { dim: d, data })
}

/// A shift `h` in the finite-dimensional Cameron-Martin space of a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct CameronMartinShift {
    h: Vec<f64>,
    /// Coefficients of `hat(h)`: `Q^{-1} h`.
    h_hat: Vec<f64>,
    mean: Vec<f64>,
    h_norm_sq: f64,
}

impl CameronMartinShift {
    pub fn new(measure: &GaussianMeasure, h: Vec<f64>) -> Result<Self> {
        if h.len() != measure.dim() {
            return Err(Error::DimensionMismatch {
                expected: measure.dim(),
                got: h.len(),
            });
        }
        let precision = measure.precision()?;
        let h_hat: Vec<f64> = (precision * DVector::from_column_slice(&h)).iter().copied().collect();
        let h_norm_sq = h.iter().zip(&h_hat).map(|(a, b)| a * b).sum::<f64>().max(0.0);
        Ok(Self {
            h,
            h_hat,
            mean: measure.mean().to_vec(),
            h_norm_sq,
        })
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn h_hat(&self) -> &[f64] {
        &self.h_hat
    }

    /// `|h|_H^2 = <h, Q^{-1} h>`.
    pub fn h_norm_sq(&self) -> f64 {
        self.h_norm_sq
    }

    /// `hat(h)(x) = <x - a, Q^{-1} h>`.
    pub fn hat(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.mean)
            .zip(&self.h_hat)
            .map(|((xi, ai), ci)| (xi - ai) * ci)
            .sum()
    }

    /// Density of the translated measure `gamma(. - h)` with respect to
    /// `gamma`: `exp(hat(h)(x) - |h|_H^2 / 2)`.
    pub fn density(&self, x: &[f64]) -> f64 {
        (self.hat(x) - 0.5 * self.h_norm_sq).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cov(rows: &[&[f64]]) -> DMatrix<f64> {
        let d = rows.len();
        DMatrix::from_fn(d, d, |i, j| rows[i][j])
    }

    #[test]
    fn density_examples() {
        let g1 = GaussianMeasure::standard(1);
        assert_abs_diff_eq!(g1.density(&[0.0]).unwrap(), 0.398_942_280_401_432_7, epsilon = 1e-15);
        let g2 = GaussianMeasure::standard(2);
        assert_abs_diff_eq!(g2.density(&[0.0, 0.0]).unwrap(), 1.0 / (2.0 * PI), epsilon = 1e-15);
        let m = GaussianMeasure::new(vec![1.0], cov(&[&[4.0]])).unwrap();
        assert!(!m.is_standard());
        assert_abs_diff_eq!(m.density(&[1.0]).unwrap(), 1.0 / (8.0 * PI).sqrt(), epsilon = 1e-15);
        // oracle: 1-D formula with q = 4 away from the mean
        let x: f64 = 2.5;
        let oracle = (-(x - 1.0).powi(2) / 8.0).exp() / (8.0 * PI).sqrt();
        assert_abs_diff_eq!(m.density(&[x]).unwrap(), oracle, epsilon = 1e-15);
    }

    #[test]
    fn singular_covariance_has_no_density() {
        let m = GaussianMeasure::new(vec![0.0, 0.0], cov(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert!(m.is_degenerate());
        assert!(matches!(m.density(&[0.0, 0.0]), Err(Error::DegenerateMeasure(_))));
        assert!(GaussianMeasure::new(vec![0.0], cov(&[&[-1.0]])).is_err());
        assert!(GaussianMeasure::new(vec![0.0, 0.0], cov(&[&[1.0, 0.5], &[0.0, 1.0]])).is_err());
    }

    #[test]
    fn hermite_moments() {
        let rule = QuadratureRule::build(1, QuadratureKind::GaussHermite, 64, None).unwrap();
        let g = GaussianMeasure::standard(1);
        assert_abs_diff_eq!(rule.integrate(&g, |x| x[0] * x[0]).unwrap(), 1.0, epsilon = 1e-10);
        // oracle: E[x^{2k}] = (2k-1)!!
        let double_factorial = |k: u32| (1..=k).map(|i| (2 * i - 1) as f64).product::<f64>();
        for k in 1..=5u32 {
            let m = rule.integrate(&g, |x| x[0].powi(2 * k as i32)).unwrap();
            assert!((m - double_factorial(k)).abs() <= 1e-8 * double_factorial(k), "k={k}: {m}");
        }
        assert_abs_diff_eq!(rule.integrate(&g, |x| x[0].powi(4)).unwrap(), 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(rule.integrate(&g, |x| x[0].powi(3)).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn uniform_normalization() {
        let rule = QuadratureRule::build(2, QuadratureKind::UniformTruncated, 257, Some(6.0)).unwrap();
        let g = GaussianMeasure::standard(2);
        assert_abs_diff_eq!(rule.integrate(&g, |_| 1.0).unwrap(), 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(rule.total_weight(), 144.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rule.integrate(&g, |x| x[1] * x[1]).unwrap(), 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(rule.integrate(&g, |x| x[0]).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_arguments_validated() {
        assert!(matches!(
            QuadratureRule::build(4, QuadratureKind::GaussHermite, 16, None),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(QuadratureRule::build(1, QuadratureKind::GaussHermite, 4, None).is_err());
    }

    #[test]
    fn density_normalized_under_every_rule() {
        let m = GaussianMeasure::new(vec![0.3, -0.2], cov(&[&[1.5, 0.4], &[0.4, 0.8]])).unwrap();
        let gh = QuadratureRule::build(2, QuadratureKind::GaussHermite, 32, None).unwrap();
        assert_abs_diff_eq!(gh.integrate(&m, |_| 1.0).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(gh.integrate(&m, |x| x[0]).unwrap(), 0.3, epsilon = 1e-10);
        assert_abs_diff_eq!(
            gh.integrate(&m, |x| (x[0] - 0.3) * (x[1] + 0.2)).unwrap(),
            0.4,
            epsilon = 1e-10
        );
        let uni = QuadratureRule::build(2, QuadratureKind::UniformTruncated, 257, Some(9.0)).unwrap();
        assert_abs_diff_eq!(uni.integrate(&m, |_| 1.0).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn sampling_is_deterministic_and_centered() {
        let g = GaussianMeasure::standard(1);
        let a = sample_gaussian(&g, 1, 7).unwrap();
        let b = sample_gaussian(&g, 1, 7).unwrap();
        assert_eq!(a, b);
        assert!(sample_gaussian(&g, 0, 7).is_err());

        let n = 1_000_000;
        let s = sample_gaussian(&g, n, 11).unwrap();
        let mean = s.iter().map(|p| p[0]).sum::<f64>() / n as f64;
        // CLT: 4 sigma = 4 / sqrt(n) = 0.004
        assert!(mean.abs() < 0.004, "{mean}");

        let g2 = GaussianMeasure::standard(2);
        let s2 = sample_gaussian(&g2, n, 12).unwrap();
        let rho = s2.iter().map(|p| p[0] * p[1]).sum::<f64>() / n as f64;
        assert!(rho.abs() < 0.004, "{rho}");
    }

    #[test]
    fn sampling_general_measure_moments() {
        let m = GaussianMeasure::new(vec![1.0, -2.0], cov(&[&[2.0, 0.6], &[0.6, 1.0]])).unwrap();
        let n = 400_000;
        let s = sample_gaussian(&m, n, 3).unwrap();
        let mx = s.iter().map(|p| p[0]).sum::<f64>() / n as f64;
        let my = s.iter().map(|p| p[1]).sum::<f64>() / n as f64;
        assert!((mx - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
        assert!((my + 2.0).abs() < 4.0 * (1.0 / n as f64).sqrt());
        let cxy = s.iter().map(|p| (p[0] - mx) * (p[1] - my)).sum::<f64>() / n as f64;
        assert!((cxy - 0.6).abs() < 0.02);
    }

    #[test]
    fn cameron_martin_examples() {
        let g = GaussianMeasure::standard(1);
        let zero = CameronMartinShift::new(&g, vec![0.0]).unwrap();
        for x in [-3.0, 0.0, 2.5] {
            assert_eq!(zero.density(&[x]), 1.0);
        }
        let one = CameronMartinShift::new(&g, vec![1.0]).unwrap();
        assert_eq!(one.h_norm_sq(), 1.0);
        let s = sample_gaussian(&g, 1_000_000, 5).unwrap();
        let mc = s.iter().map(|p| one.density(p)).sum::<f64>() / s.len() as f64;
        assert!((mc - 1.0).abs() < 0.01, "{mc}");
        // shifted mean: int x exp(x - 1/2) dgamma = 1
        let gh = QuadratureRule::build(1, QuadratureKind::GaussHermite, 64, None).unwrap();
        let v = gh.integrate(&g, |x| x[0] * one.density(x)).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn cameron_martin_change_of_variables() {
        let m = GaussianMeasure::new(vec![0.0, 0.0], cov(&[&[1.0, 0.3], &[0.3, 0.5]])).unwrap();
        let shift = CameronMartinShift::new(&m, vec![0.4, -0.7]).unwrap();
        let gh = QuadratureRule::build(2, QuadratureKind::GaussHermite, 48, None).unwrap();
        let f = |x: &[f64]| (x[0] - 0.5 * x[1]).sin() + x[0] * x[0] * x[1];
        let lhs = gh.integrate(&m, |x| f(&[x[0] + 0.4, x[1] - 0.7])).unwrap();
        let rhs = gh.integrate(&m, |x| f(x) * shift.density(x)).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-8);
    }

    proptest! {
        #[test]
        fn shift_norm_nonnegative(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let m = GaussianMeasure::new(vec![0.0, 0.0], cov(&[&[2.0, 0.5], &[0.5, 1.0]])).unwrap();
            let s = CameronMartinShift::new(&m, vec![a, b]).unwrap();
            prop_assert!(s.h_norm_sq() >= 0.0);
        }
    }
}
