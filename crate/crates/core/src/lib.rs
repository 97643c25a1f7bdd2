//! Numerics for functions of bounded variation on Gaussian spaces.

pub mod bv;
pub mod cylinder;
pub mod error;
pub mod extrapolate;
pub mod field;
pub mod gauss;
pub mod quad1d;
pub mod semigroup;
pub mod special;
pub mod variational;
pub mod wiener;

pub use error::{Error, Result};
pub use gauss::{sample_gaussian, CameronMartinShift, GaussianMeasure, PointBatch, QuadratureKind, QuadratureRule};
pub use field::{Grid, GridField, HMeasureDecomposition, HVectorField, Regularity};
