use super::integrand::{recession, ConvexIntegrand};
use crate::bv::tv::adjoint_pairing;
use crate::error::{Error, Result};
use crate::field::{gradient, GridField, HMeasureDecomposition, HVectorField};

/// Argument of `functional_eval`.
#[derive(Debug, Clone, Copy)]
pub enum FunctionalInput<'a> {
    Field(&'a GridField),
    Decomposition(&'a HMeasureDecomposition),
}

impl<'a> From<&'a GridField> for FunctionalInput<'a> {
    fn from(u: &'a GridField) -> Self {
        Self::Field(u)
    }
}

impl<'a> From<&'a HMeasureDecomposition> for FunctionalInput<'a> {
    fn from(m: &'a HMeasureDecomposition) -> Self {
        Self::Decomposition(m)
    }
}

fn integrate_integrand(f: &ConvexIntegrand, v: &HVectorField) -> f64 {
    let w = v.grid().weights();
    let d = v.dim();
    let mut h = vec![0.0; d];
    (0..w.len())
        .map(|i| {
            for (j, c) in v.components().iter().enumerate() {
                h[j] = c.values()[i];
            }
            w[i] * f.eval(&h)
        })
        .sum()
}

/// `int F(D u)`.
///
/// For a smooth field this is `int F(grad_H u) d(gamma)`. For a
/// decomposition it is `int F(ac) d(gamma) + |D^s| F^inf(nu)`, where the
/// recession function of the polar direction `nu` is averaged with the grid
/// weights over the nodes where `nu` is nonzero.
pub fn functional_eval<'a>(f: &ConvexIntegrand, input: impl Into<FunctionalInput<'a>>) -> Result<f64> {
    match input.into() {
        FunctionalInput::Field(u) => {
            if !u.is_smooth() {
                return Err(Error::NotSmooth("functional_eval on a field"));
            }
            Ok(integrate_integrand(f, &gradient(u)?))
        }
        FunctionalInput::Decomposition(m) => {
            let ac = integrate_integrand(f, &m.ac_part);
            if m.singular_mass == 0.0 {
                return Ok(ac);
            }
            let dir = &m.singular_direction;
            let w = dir.grid().weights();
            let mut h = vec![0.0; dir.dim()];
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..w.len() {
                if dir.norm_at(i) == 0.0 {
                    continue;
                }
                for (j, c) in dir.components().iter().enumerate() {
                    h[j] = c.values()[i];
                }
                num += w[i] * recession(f, &h)?;
                den += w[i];
            }
            if den == 0.0 {
                return Err(Error::InvalidArgument("singular part without a direction".into()));
            }
            let rec = num / den;
            if !rec.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "recession of {} is infinite on the singular direction",
                    f.name()
                )));
            }
            Ok(ac + m.singular_mass * rec)
        }
    }
}

/// Dual evaluation `sup_Phi sum_i [c_i . Phi_i - w_i F*(Phi_i)]` of a smooth
/// field, where `c` represents `Phi -> int u div_H Phi d(gamma)` on the
/// grid. The supremum is attained at `Phi_i` in the subdifferential of `F` at
/// `c_i / w_i`, so this needs closed forms for both `F*` and a subgradient.
pub fn functional_eval_dual(f: &ConvexIntegrand, u: &GridField) -> Result<f64> {
    let conj = f.conj_fn().ok_or_else(|| Error::MissingConjugate(f.name().to_string()))?;
    let sub = f
        .subgradient_fn()
        .ok_or_else(|| Error::InvalidArgument(format!("integrand {} has no subgradient", f.name())))?;
    if !u.is_smooth() {
        return Err(Error::NotSmooth("functional_eval_dual"));
    }
    let grid = u.grid();
    let d = grid.dim();
    let axes: Vec<usize> = (0..d).collect();
    let c = adjoint_pairing(u, &axes)?;
    let w = grid.weights();
    let mut ci = vec![0.0; d];
    let mut hi = vec![0.0; d];
    let mut phi = vec![0.0; d];
    let mut total = 0.0;
    for i in 0..grid.len() {
        for j in 0..d {
            ci[j] = c[j][i];
            hi[j] = c[j][i] / w[i];
        }
        sub(&hi, &mut phi);
        let dot: f64 = ci.iter().zip(&phi).map(|(a, b)| a * b).sum();
        total += dot - w[i] * conj(&phi);
    }
    Ok(total)
}
