//! Scalar and H-vector fields on tensor grids over R^d with Gaussian weights.

mod calculus;
mod io;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{GaussianMeasure, QuadratureKind, QuadratureRule, MAX_GRID_DIM};

pub use calculus::{
    adjoint_derivative, divergence_h, gradient, gradient_axis, integrate, integrate_h_norm, llogl_gauge,
    llogl_young,
};
pub use io::{read_csv, write_csv};

/// A uniform tensor grid `[-R, R]^d` with `n` nodes per axis, together with
/// the Gaussian measure it integrates against.
///
/// Nodes are stored row-major with axis 0 slowest. The quadrature weight of a
/// node is its trapezoid cell volume times the density of the measure.
#[derive(Debug)]
pub struct Grid {
    dim: usize,
    n: usize,
    radius: f64,
    spacing: f64,
    axis: Vec<f64>,
    weights: Vec<f64>,
    measure: GaussianMeasure,
}

impl Grid {
    pub fn new(dim: usize, n: usize, radius: f64, measure: GaussianMeasure) -> Result<Arc<Self>> {
        if dim == 0 || dim > MAX_GRID_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if measure.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: measure.dim(),
            });
        }
        if n < 2 {
            return Err(Error::GridTooCoarse(format!("{n} nodes per axis")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid radius {radius}")));
        }
        measure.precision()?;
        let spacing = 2.0 * radius / (n - 1) as f64;
        let axis: Vec<f64> = (0..n).map(|i| -radius + i as f64 * spacing).collect();
        let trap: Vec<f64> = (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * spacing } else { spacing })
            .collect();
        let len = n.pow(dim as u32);
        let mut weights = vec![0.0; len];
        let mut x = vec![0.0; dim];
        for (idx, w) in weights.iter_mut().enumerate() {
            let mut rem = idx;
            let mut cell = 1.0;
            for k in (0..dim).rev() {
                let i = rem % n;
                rem /= n;
                x[k] = axis[i];
                cell *= trap[i];
            }
            *w = cell * measure.density(&x)?;
        }
        Ok(Arc::new(Self {
            dim,
            n,
            radius,
            spacing,
            axis,
            weights,
            measure,
        }))
    }

    /// Grid against the standard Gaussian.
    pub fn standard(dim: usize, n: usize, radius: f64) -> Result<Arc<Self>> {
        if dim == 0 || dim > MAX_GRID_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        Self::new(dim, n, radius, GaussianMeasure::standard(dim))
    }

    /// Grid whose nodes are those of a uniform-truncated quadrature rule.
    pub fn from_rule(rule: &QuadratureRule, measure: GaussianMeasure) -> Result<Arc<Self>> {
        match (rule.kind(), rule.box_radius()) {
            (QuadratureKind::UniformTruncated, Some(r)) => Self::new(rule.dim(), rule.level(), r, measure),
            _ => Err(Error::InvalidArgument("grid fields need a uniform-truncated rule".into())),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Node spacing `h`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn measure(&self) -> &GaussianMeasure {
        &self.measure
    }

    pub fn is_standard(&self) -> bool {
        self.measure.is_standard()
    }

    pub(crate) fn require_standard(&self) -> Result<()> {
        if self.is_standard() {
            Ok(())
        } else {
            Err(Error::NonStandardMeasure)
        }
    }

    /// Index distance between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    /// Per-axis node indices of the flat index `idx`.
    pub fn multi_index(&self, idx: usize, out: &mut [usize]) {
        let mut rem = idx;
        for k in (0..self.dim).rev() {
            out[k] = rem % self.n;
            rem /= self.n;
        }
    }

    /// Coordinates of node `idx`.
    pub fn point(&self, idx: usize, out: &mut [f64]) {
        let mut rem = idx;
        for k in (0..self.dim).rev() {
            out[k] = self.axis[rem % self.n];
            rem /= self.n;
        }
    }

    /// Coordinate `axis` of node `idx`.
    #[inline]
    pub fn coord(&self, idx: usize, axis: usize) -> f64 {
        self.axis[(idx / self.stride(axis)) % self.n]
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other)
            || (self.dim == other.dim && self.n == other.n && self.radius == other.radius && self.measure == other.measure)
    }
}

/// Whether a field may be differentiated pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    /// Samples of a smooth function: finite differences and spline
    /// interpolation are meaningful.
    Smooth,
    /// Possibly discontinuous data such as an indicator.
    Rough,
}

/// A scalar function sampled at the nodes of a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    regularity: Regularity,
}

impl GridField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, regularity: Regularity) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            grid,
            values,
            regularity,
        })
    }

    pub fn from_fn<F>(grid: &Arc<Grid>, regularity: Regularity, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.point(i, &mut x);
                f(&x)
            })
            .collect();
        Self::new(grid.clone(), values, regularity)
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Result<Self> {
        Self::new(grid.clone(), vec![c; grid.len()], Regularity::Smooth)
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<f64>, regularity: Regularity) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            regularity,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    pub fn is_smooth(&self) -> bool {
        self.regularity == Regularity::Smooth
    }

    pub fn with_regularity(mut self, regularity: Regularity) -> Self {
        self.regularity = regularity;
        self
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect(), self.regularity)
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &GridField, f: F) -> Result<Self> {
        self.check_same_grid(other)?;
        let reg = if self.is_smooth() && other.is_smooth() {
            Regularity::Smooth
        } else {
            Regularity::Rough
        };
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.grid.clone(), values, reg)
    }

    pub fn add(&self, other: &GridField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Multilinear interpolation at an arbitrary point, with constant
    /// extension beyond the box.
    pub fn interpolate(&self, x: &[f64]) -> Result<f64> {
        let g = &self.grid;
        if x.len() != g.dim {
            return Err(Error::DimensionMismatch {
                expected: g.dim,
                got: x.len(),
            });
        }
        let mut base = 0;
        let mut frac = [0.0; MAX_GRID_DIM];
        for (k, &xk) in x.iter().enumerate() {
            let s = ((xk.clamp(-g.radius, g.radius) + g.radius) / g.spacing).min((g.n - 1) as f64);
            let i = (s.floor() as usize).min(g.n - 2);
            frac[k] = s - i as f64;
            base += i * g.stride(k);
        }
        let mut v = 0.0;
        for corner in 0..(1usize << g.dim) {
            let mut w = 1.0;
            let mut idx = base;
            for k in 0..g.dim {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    idx += g.stride(k);
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                v += w * self.values[idx];
            }
        }
        Ok(v)
    }

    pub(crate) fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// A `d`-component field on a shared grid: H-gradients and test fields.
#[derive(Debug, Clone)]
pub struct HVectorField {
    components: Vec<GridField>,
}

impl HVectorField {
    pub fn new(components: Vec<GridField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("vector field needs components".into()))?;
        if components.len() != first.grid().dim() {
            return Err(Error::DimensionMismatch {
                expected: first.grid().dim(),
                got: components.len(),
            });
        }
        for c in &components[1..] {
            first.check_same_grid(c)?;
        }
        Ok(Self { components })
    }

    pub fn from_fn<F>(grid: &Arc<Grid>, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &mut [f64]),
    {
        let d = grid.dim();
        let mut comps = vec![Vec::with_capacity(grid.len()); d];
        let mut x = vec![0.0; d];
        let mut v = vec![0.0; d];
        for i in 0..grid.len() {
            grid.point(i, &mut x);
            f(&x, &mut v);
            for k in 0..d {
                comps[k].push(v[k]);
            }
        }
        Self::new(
            comps
                .into_iter()
                .map(|c| GridField::new(grid.clone(), c, Regularity::Smooth))
                .collect::<Result<_>>()?,
        )
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            components: (0..grid.dim())
                .map(|_| GridField::from_parts(grid.clone(), vec![0.0; grid.len()], Regularity::Smooth))
                .collect(),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, j: usize) -> &GridField {
        &self.components[j]
    }

    pub fn components(&self) -> &[GridField] {
        &self.components
    }

    /// Nodewise H-norm. For the standard measure this is the Euclidean norm.
    pub fn norm_at(&self, idx: usize) -> f64 {
        self.components
            .iter()
            .map(|c| c.values()[idx] * c.values()[idx])
            .sum::<f64>()
            .sqrt()
    }

    /// The nodewise norm as a scalar field.
    pub fn norm(&self) -> GridField {
        let values = (0..self.grid().len()).map(|i| self.norm_at(i)).collect();
        GridField::from_parts(self.grid().clone(), values, Regularity::Rough)
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.grid().len()).map(|i| self.norm_at(i)).fold(0.0, f64::max)
    }
}

/// Radon-Nikodym split of a vector measure `D u = (grad u) gamma + D^s u`.
#[derive(Debug, Clone)]
pub struct HMeasureDecomposition {
    /// Density of the absolutely continuous part with respect to the measure.
    pub ac_part: HVectorField,
    /// Total variation of the singular part.
    pub singular_mass: f64,
    /// Polar direction of the singular part; unit-norm where the singular
    /// part is supported and zero elsewhere.
    pub singular_direction: HVectorField,
}

impl HMeasureDecomposition {
    pub fn new(ac_part: HVectorField, singular_mass: f64, singular_direction: HVectorField) -> Result<Self> {
        if !(singular_mass >= 0.0 && singular_mass.is_finite()) {
            return Err(Error::Domain {
                what: "singular mass",
                value: singular_mass,
            });
        }
        if !ac_part.grid().same_as(singular_direction.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            ac_part,
            singular_mass,
            singular_direction,
        })
    }

    /// A purely singular measure with constant polar direction.
    pub fn singular(grid: &Arc<Grid>, mass: f64, direction: &[f64]) -> Result<Self> {
        if direction.len() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: direction.len(),
            });
        }
        let dir = HVectorField::from_fn(grid, |_, v| v.copy_from_slice(direction))?;
        Self::new(HVectorField::zeros(grid), mass, dir)
    }

    /// A purely absolutely continuous measure.
    pub fn absolutely_continuous(ac_part: HVectorField) -> Self {
        let grid = ac_part.grid().clone();
        Self {
            ac_part,
            singular_mass: 0.0,
            singular_direction: HVectorField::zeros(&grid),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn grid_layout_is_row_major() {
        let g = Grid::standard(2, 5, 2.0).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g.stride(0), 5);
        assert_eq!(g.stride(1), 1);
        let mut x = [0.0; 2];
        g.point(7, &mut x);
        assert_eq!(x, [-1.0, 2.0 - 2.0 * 1.0]);
        assert_eq!(g.coord(7, 0), -1.0);
        assert_eq!(g.coord(7, 1), 0.0);
        let mut m = [0usize; 2];
        g.multi_index(7, &mut m);
        assert_eq!(m, [1, 2]);
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(Grid::standard(4, 9, 6.0), Err(Error::UnsupportedDimension(4))));
        assert!(matches!(Grid::standard(1, 1, 6.0), Err(Error::GridTooCoarse(_))));
        assert!(Grid::standard(1, 9, -1.0).is_err());
        let m = GaussianMeasure::new(vec![0.0, 0.0], DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert!(matches!(Grid::new(2, 9, 6.0, m), Err(Error::DegenerateMeasure(_))));
    }

    #[test]
    fn fields_reject_bad_values() {
        let g = Grid::standard(1, 9, 6.0).unwrap();
        assert!(matches!(
            GridField::new(g.clone(), vec![0.0; 8], Regularity::Smooth),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut v = vec![0.0; 9];
        v[3] = f64::NAN;
        assert!(matches!(GridField::new(g.clone(), v, Regularity::Smooth), Err(Error::NonFinite(3))));
        let other = Grid::standard(1, 11, 6.0).unwrap();
        let a = GridField::constant(&g, 1.0).unwrap();
        let b = GridField::constant(&other, 1.0).unwrap();
        assert!(matches!(a.add(&b), Err(Error::GridMismatch)));
    }

    #[test]
    fn rule_backed_grid() {
        let rule = QuadratureRule::build(1, QuadratureKind::UniformTruncated, 65, Some(6.0)).unwrap();
        let g = Grid::from_rule(&rule, GaussianMeasure::standard(1)).unwrap();
        assert_eq!(g.axis(), rule.axis_nodes());
        let gh = QuadratureRule::build(1, QuadratureKind::GaussHermite, 16, None).unwrap();
        assert!(Grid::from_rule(&gh, GaussianMeasure::standard(1)).is_err());
    }

    #[test]
    fn interpolation_is_multilinear() {
        let g = Grid::standard(2, 9, 4.0).unwrap();
        let f = GridField::from_fn(&g, Regularity::Smooth, |x| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1]).unwrap();
        for p in [[0.3, -1.7], [3.9, 2.2], [-4.0, 4.0]] {
            let exact = 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1];
            assert!((f.interpolate(&p).unwrap() - exact).abs() < 1e-12);
        }
        // constant extension beyond the box
        assert_eq!(f.interpolate(&[9.0, 0.0]).unwrap(), f.interpolate(&[4.0, 0.0]).unwrap());
        assert!(f.interpolate(&[0.0]).is_err());
    }
}
