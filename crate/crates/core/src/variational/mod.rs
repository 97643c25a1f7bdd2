//! Convex functionals of the Gaussian derivative.
//!
//! `ConvexIntegrand` carries `F` together with whatever closed forms are
//! known; conjugates and recession functions fall back to numerics. The
//! solver minimizes `int F(D u) + 1/2 int (u - g)^2` on a grid, and the
//! geometric and relaxed-perimeter functionals are built on top of it.

mod functional;
mod integrand;
mod levelset;
mod relaxed;
mod rof;

pub use functional::{functional_eval, functional_eval_dual, FunctionalInput};
pub use integrand::{conjugate, recession, ConvexIntegrand, Growth, IntegrandCheck, ProxFn, ScalarFn, VectorFn};
pub use levelset::{
    convexity_check, geometric_levelset_check, geometric_levelset_check_with, levelset_objective, levelset_value,
    set_perimeter, ConvexityReport, LevelReport, CONVEXITY_TOL_FACTOR, LEVELSET_TOL,
};
pub use relaxed::{
    relaxed_perimeter, relaxed_perimeter_dual, relaxed_perimeter_report, RangeConvention, RelaxedReport,
    RELAXED_TOL,
};
pub use rof::{rof_minimize, rof_minimize_from, VariationalSolution, DEFAULT_ROF_ITERS, DEFAULT_ROF_TOL};
