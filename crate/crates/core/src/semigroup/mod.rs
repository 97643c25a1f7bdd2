//! Ornstein-Uhlenbeck and heat semigroups on grid fields.
//!
//! Both act on the standard Gaussian grid as tensor products of one-dimensional
//! operators `u -> int u(alpha x + beta y) d(gamma_1)(y)`, with
//! `(alpha, beta) = (e^{-t}, sqrt(1 - e^{-2t}))` for the Mehler formula and
//! `(1, sqrt t)` for the heat semigroup. Smooth fields are interpolated by
//! natural cubic splines, rough fields piecewise linearly; values beyond the
//! box are extended as constants.

pub(crate) mod kernel;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{gradient, integrate, GridField, HVectorField, Regularity};
use crate::special::ou_l1_constant;
use kernel::{Interp, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semigroup {
    OrnsteinUhlenbeck,
    Heat,
}

impl Semigroup {
    /// `(alpha, beta)` such that the semigroup at time `t` averages
    /// `u(alpha x + beta y)` over standard normal `y`.
    pub fn coefficients(self, t: f64) -> (f64, f64) {
        match self {
            Semigroup::OrnsteinUhlenbeck => ((-t).exp(), (-(-2.0 * t).exp_m1()).sqrt()),
            Semigroup::Heat => (1.0, t.sqrt()),
        }
    }

    /// Applies the semigroup at time `t`.
    pub fn apply(self, u: &GridField, t: f64) -> Result<GridField> {
        match self {
            Semigroup::OrnsteinUhlenbeck => ou_apply(u, t),
            Semigroup::Heat => heat_apply(u, t),
        }
    }
}

fn check_time(t: f64, what: &'static str) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain { what, value: t });
    }
    Ok(())
}

fn interp_for(u: &GridField) -> Interp {
    match u.regularity() {
        Regularity::Smooth => Interp::Spline,
        Regularity::Rough => Interp::Linear,
    }
}

/// Tensor application; `deriv_axis` selects the axis that receives the
/// derivative kernel.
fn apply_tensor(u: &GridField, alpha: f64, beta: f64, deriv_axis: Option<usize>) -> GridField {
    let grid = u.grid();
    let interp = interp_for(u);
    let mut v = u.values().to_vec();
    for axis in 0..grid.dim() {
        let weight = if deriv_axis == Some(axis) {
            Weight::Derivative
        } else {
            Weight::Value
        };
        let op = kernel::operator(grid.n(), grid.radius(), alpha, beta, interp, weight);
        v = op.apply_along(&v, grid.stride(axis));
    }
    GridField::from_parts(grid.clone(), v, Regularity::Smooth)
}

/// Mehler formula `T_t u(x) = int u(e^{-t} x + sqrt(1 - e^{-2t}) y) d(gamma)(y)`.
pub fn ou_apply(u: &GridField, t: f64) -> Result<GridField> {
    check_time(t, "Ornstein-Uhlenbeck time")?;
    u.grid().require_standard()?;
    if t == 0.0 {
        return Ok(u.clone());
    }
    let (a, b) = Semigroup::OrnsteinUhlenbeck.coefficients(t);
    Ok(apply_tensor(u, a, b, None))
}

/// Heat semigroup `W_t u(x) = int u(x + sqrt(t) y) d(gamma)(y)`.
///
/// Below `t = h^2` the kernel is narrower than a grid cell and the input is
/// returned unchanged, with a warning.
pub fn heat_apply(u: &GridField, t: f64) -> Result<GridField> {
    check_time(t, "heat time")?;
    u.grid().require_standard()?;
    if t == 0.0 {
        return Ok(u.clone());
    }
    let h = u.grid().spacing();
    if t < h * h {
        log::warn!("heat semigroup at t = {t:e} < h^2 = {:e} is under-resolved; returning the input", h * h);
        return Ok(u.clone());
    }
    let (a, b) = Semigroup::Heat.coefficients(t);
    Ok(apply_tensor(u, a, b, None))
}

/// `grad T_t u`, computed by differentiating the Mehler kernel rather than
/// the smoothed field.
pub fn ou_gradient(u: &GridField, t: f64) -> Result<HVectorField> {
    kernel_gradient(Semigroup::OrnsteinUhlenbeck, u, t)
}

/// `grad W_t u` by the differentiated heat kernel.
pub fn heat_gradient(u: &GridField, t: f64) -> Result<HVectorField> {
    kernel_gradient(Semigroup::Heat, u, t)
}

fn kernel_gradient(kind: Semigroup, u: &GridField, t: f64) -> Result<HVectorField> {
    check_time(t, "semigroup time")?;
    if t == 0.0 {
        return Err(Error::Domain {
            what: "kernel gradient time (must be positive)",
            value: t,
        });
    }
    u.grid().require_standard()?;
    let (a, b) = kind.coefficients(t);
    HVectorField::new((0..u.grid().dim()).map(|j| apply_tensor(u, a, b, Some(j))).collect())
}

/// `int |grad T_t u - e^{-t} T_t grad u|_H d(gamma)`, zero by the commutation
/// relation of the Ornstein-Uhlenbeck semigroup.
pub fn commutation_residual(u: &GridField, t: f64) -> Result<f64> {
    if !u.is_smooth() {
        return Err(Error::NotSmooth("commutation_residual"));
    }
    let lhs = gradient(&ou_apply(u, t)?)?;
    let du = gradient(u)?;
    let decay = (-t).exp();
    let grid = u.grid();
    let rhs: Vec<GridField> = du
        .components()
        .iter()
        .map(|c| ou_apply(c, t))
        .collect::<Result<_>>()?;
    let w = grid.weights();
    let mut total = 0.0;
    for i in 0..grid.len() {
        let mut s = 0.0;
        for j in 0..grid.dim() {
            let r = lhs.component(j).values()[i] - decay * rhs[j].values()[i];
            s += r * r;
        }
        total += w[i] * s.sqrt();
    }
    Ok(total)
}

/// Outcome of the short-time estimate `||T_t chi_E - chi_E||_1 <= c_t P(E)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct L1BoundReport {
    pub lhs: f64,
    pub c_t: f64,
    pub perimeter: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Relative slack allowed on the right-hand side.
pub const L1_BOUND_SLACK: f64 = 0.02;

/// Checks the short-time `L^1` estimate for an indicator field, given its
/// perimeter.
pub fn ou_l1_bound_check(indicator: &GridField, t: f64, perimeter: f64) -> Result<L1BoundReport> {
    if let Some(i) = indicator.values().iter().position(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidArgument(format!("node {i} of an indicator is not 0 or 1")));
    }
    let smoothed = ou_apply(indicator, t)?;
    let diff = smoothed.zip_map(indicator, |a, b| (a - b).abs())?;
    let lhs = integrate(&diff);
    let c_t = ou_l1_constant(t)?;
    let bound = c_t * perimeter;
    Ok(L1BoundReport {
        lhs,
        c_t,
        perimeter,
        bound,
        pass: lhs <= bound * (1.0 + L1_BOUND_SLACK) + 1e-15,
    })
}
