use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_pdf};

/// Largest box dimension accepted by `box_perimeter_growth`.
pub const MAX_BOX_DIM: usize = 25;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Half-width `r_i` of the `i`-th side of the box sequence, the root of
/// `sqrt(2/pi) exp(-r^2/2) / r = 1 / ((i+1) log(i+1)^{3/2})`.
///
/// Solved in log form by Newton's method safeguarded with bisection.
pub fn box_radius(i: usize) -> Result<f64> {
    if i == 0 {
        return Err(Error::InvalidArgument("box sides are numbered from 1".into()));
    }
    let m = (i + 1) as f64;
    let log_target = -(m.ln() + 1.5 * m.ln().ln());
    // decreasing in r
    let g = |r: f64| SQRT_2_OVER_PI.ln() - 0.5 * r * r - r.ln() - log_target;
    let (mut lo, mut hi) = (1e-8, 40.0);
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(Error::RootFinding {
            what: format!("box radius {i}"),
            lo,
            hi,
        });
    }
    let mut r = 1.0;
    for _ in 0..200 {
        let v = g(r);
        if v.abs() < 1e-15 {
            return Ok(r);
        }
        if v > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let step = r - v / (-r - 1.0 / r);
        r = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 * hi {
            return Ok(r);
        }
    }
    Err(Error::RootFinding {
        what: format!("box radius {i}"),
        lo,
        hi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxGrowth {
    pub radii: Vec<f64>,
    /// `P(Q_m)` for `m = 1..=m_max`.
    pub perimeters: Vec<f64>,
    /// Whether the perimeters increase strictly in `m`.
    pub increasing: bool,
}

/// Gaussian perimeters of the boxes `Q_m = prod_{i <= m} [-r_i, r_i]`,
/// `P(Q_m) = sum_i 2 phi(r_i) prod_{j != i} (2 Phi(r_j) - 1)`.
pub fn box_perimeter_growth(m_max: usize) -> Result<BoxGrowth> {
    if m_max == 0 || m_max > MAX_BOX_DIM {
        return Err(Error::InvalidArgument(format!("m_max must lie in 1..={MAX_BOX_DIM}")));
    }
    let radii = (1..=m_max).map(box_radius).collect::<Result<Vec<f64>>>()?;
    let side: Vec<f64> = radii.iter().map(|&r| 2.0 * normal_cdf(r) - 1.0).collect();
    let perimeters: Vec<f64> = (1..=m_max)
        .map(|m| {
            (0..m)
                .map(|i| {
                    let others: f64 = (0..m).filter(|&j| j != i).map(|j| side[j]).product();
                    2.0 * normal_pdf(radii[i]) * others
                })
                .sum()
        })
        .collect();
    let increasing = perimeters.windows(2).all(|w| w[1] > w[0]);
    Ok(BoxGrowth {
        radii,
        perimeters,
        increasing,
    })
}

/// Gaussian perimeter of the disc `B_radius(center)` in the plane, as the
/// boundary integral of the two-dimensional density.
pub fn ball_perimeter_2d(center: [f64; 2], radius: f64) -> Result<f64> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::Domain {
            what: "radius",
            value: radius,
        });
    }
    // periodic trapezoid rule, spectrally accurate for this integrand
    let k = 1024;
    let dtheta = std::f64::consts::TAU / k as f64;
    let s: f64 = (0..k)
        .map(|j| {
            let th = j as f64 * dtheta;
            normal_pdf(center[0] + radius * th.cos()) * normal_pdf(center[1] + radius * th.sin())
        })
        .sum();
    Ok(radius * s * dtheta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn radii_match_oracle() {
        let expect = [0.71379, 1.25463, 1.55498, 1.75285, 1.89749];
        for (i, e) in expect.iter().enumerate() {
            assert_abs_diff_eq!(box_radius(i + 1).unwrap(), e, epsilon = 1e-5);
        }
        let g = box_perimeter_growth(25).unwrap();
        assert!(g.radii.iter().all(|&r| r > 0.0));
        assert!(g.radii.windows(2).all(|w| w[1] > w[0]));
        assert!(box_radius(0).is_err());
    }

    #[test]
    fn perimeters_match_product_formula_oracle() {
        let g = box_perimeter_growth(20).unwrap();
        assert_abs_diff_eq!(g.perimeters[0], 0.6184486777381926, epsilon = 1e-12);
        assert_abs_diff_eq!(g.perimeters[0], 2.0 * normal_pdf(g.radii[0]), epsilon = 1e-15);
        assert_abs_diff_eq!(g.perimeters[18], 0.7133535500829029, epsilon = 1e-12);
        assert_abs_diff_eq!(g.perimeters[19], 0.7133531384408172, epsilon = 1e-12);
        assert!(box_perimeter_growth(0).is_err());
        assert!(box_perimeter_growth(26).is_err());
    }

    #[test]
    fn ball_oracle() {
        // centered disc: r exp(-r^2/2)
        for r in [0.3, 1.0, 2.5] {
            assert_abs_diff_eq!(ball_perimeter_2d([0.0, 0.0], r).unwrap(), r * (-0.5 * r * r).exp(), epsilon = 1e-13);
        }
        assert_eq!(ball_perimeter_2d([1.0, 0.0], 0.0).unwrap(), 0.0);
        assert!(ball_perimeter_2d([0.0, 0.0], -1.0).is_err());
    }
}
