//! Standard normal density, distribution function and its inverse, and the
//! Gaussian isoperimetric profile.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

use crate::error::{Error, Result};

/// `1 / sqrt(2 pi)`, the standard normal density at the origin.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, computed through `erfc` so that the
/// lower tail keeps full relative precision.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)` without cancellation.
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Inverse of [`normal_cdf`] on `(0, 1)`.
///
/// Newton iteration on the tail that contains the answer, safeguarded by a
/// bracket that shrinks every step; a step that leaves the bracket is
/// replaced by bisection.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "inverse normal cdf",
            value: p,
        });
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Solve in the lower tail; 1 - p is exact for p in [0.5, 1).
    let (q, sign) = if p < 0.5 { (p, 1.0) } else { (1.0 - p, -1.0) };
    Ok(sign * lower_tail_quantile(q))
}

fn lower_tail_quantile(q: f64) -> f64 {
    debug_assert!(q > 0.0 && q < 0.5);
    let mut lo = -40.0_f64;
    let mut hi = 0.0_f64;
    let mut x = initial_quantile_guess(q).clamp(lo, hi);
    for _ in 0..100 {
        let f = normal_cdf(x) - q;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = normal_pdf(x);
        let mut next = if d > 0.0 { x - f / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) || hi - lo <= 1e-15 * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

// Abramowitz & Stegun 26.2.23, absolute error below 4.5e-4.
fn initial_quantile_guess(q: f64) -> f64 {
    let t = (-2.0 * q.ln()).sqrt();
    let num = 2.515_517 + t * (0.802_853 + t * 0.010_328);
    let den = 1.0 + t * (1.432_788 + t * (0.189_269 + t * 0.001_308));
    -(t - num / den)
}

/// Gaussian isoperimetric profile `U(t) = phi(Phi^{-1}(t))`: the perimeter of
/// a halfspace with Gaussian volume `t`.
pub fn isoperimetric_profile(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain {
            what: "isoperimetric profile",
            value: t,
        });
    }
    let m = t.min(1.0 - t);
    if m <= 0.0 {
        return Ok(0.0);
    }
    Ok(normal_pdf(normal_quantile(m)?))
}

/// `c_t = sqrt(2/pi) * int_0^t e^{-s} / sqrt(1 - e^{-2s}) ds`, the constant in
/// the short-time L1 estimate for the Ornstein-Uhlenbeck semigroup.
///
/// The endpoint singularity is removed with `s = r^2`.
pub fn ou_l1_constant(t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain {
            what: "c_t",
            value: t,
        });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let integrand = |r: f64| {
        if r == 0.0 {
            // limit of 2r e^{-r^2} / sqrt(1 - e^{-2 r^2}) as r -> 0
            return std::f64::consts::SQRT_2;
        }
        let s = r * r;
        2.0 * r * (-s).exp() / (-(-2.0 * s).exp_m1()).sqrt()
    };
    let value = crate::quad1d::integrate(integrand, 0.0, t.sqrt(), 1e-13);
    Ok((2.0 / PI).sqrt() * value)
}
