//! Polynomial extrapolation of sampled sequences to a limit point.

use crate::error::{Error, Result};

/// Value at `x = 0` of the interpolating polynomial through `(x_i, f_i)`,
/// evaluated by Neville's scheme.
pub fn neville_at_zero(x: &[f64], f: &[f64]) -> Result<f64> {
    check(x, f)?;
    let n = x.len();
    let mut p = f.to_vec();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    Ok(p[0])
}

/// Derivative at `x = 0` of the interpolating polynomial through `(x_i, f_i)`.
/// Needs at least two samples.
pub fn slope_at_zero(x: &[f64], f: &[f64]) -> Result<f64> {
    check(x, f)?;
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidArgument("a slope needs at least two samples".into()));
    }
    // sum_i f_i L_i'(0) with Lagrange basis polynomials L_i
    let mut slope = 0.0;
    for i in 0..n {
        let mut dl = 0.0;
        for m in (0..n).filter(|&m| m != i) {
            let mut term = 1.0 / (x[i] - x[m]);
            for k in (0..n).filter(|&k| k != i && k != m) {
                term *= -x[k] / (x[i] - x[k]);
            }
            dl += term;
        }
        slope += f[i] * dl;
    }
    Ok(slope)
}

fn check(x: &[f64], f: &[f64]) -> Result<()> {
    if x.len() != f.len() || x.is_empty() {
        return Err(Error::InvalidArgument("extrapolation needs matching, non-empty samples".into()));
    }
    for i in 0..x.len() {
        for j in 0..i {
            if x[i] == x[j] {
                return Err(Error::InvalidArgument("extrapolation abscissae must be distinct".into()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reproduces_polynomials() {
        let x = [0.3, 0.2, 0.1];
        let f: Vec<f64> = x.iter().map(|t| 2.0 - 3.0 * t + 0.5 * t * t).collect();
        assert_abs_diff_eq!(neville_at_zero(&x, &f).unwrap(), 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(neville_at_zero(&[0.5], &[7.0]).unwrap(), 7.0);
        assert!(neville_at_zero(&[0.1, 0.1], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn slope_of_polynomials() {
        let x = [0.3, 0.2, 0.1];
        let f: Vec<f64> = x.iter().map(|t| 2.0 - 3.0 * t + 0.5 * t * t).collect();
        assert_abs_diff_eq!(slope_at_zero(&x, &f).unwrap(), -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(slope_at_zero(&[1.0, 3.0], &[5.0, 9.0]).unwrap(), 2.0, epsilon = 1e-14);
        assert!(slope_at_zero(&[1.0], &[1.0]).is_err());
    }
}
