//! One-dimensional quadrature helpers shared by the grid operators.

use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

/// Adaptive double-exponential quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    quadrature::double_exponential::integrate(f, a, b, abs_tol).integral
}

/// Gauss-Legendre nodes and weights on `[0, 1]` for a handful of fixed orders.
pub(crate) fn legendre_unit(order: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        (0..=MAX_ORDER)
            .map(|n| {
                if n < 2 {
                    return vec![(0.5, 1.0)];
                }
                GaussLegendre::new(n)
                    .expect("order >= 2")
                    .as_node_weight_pairs()
                    .iter()
                    .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
                    .collect()
            })
            .collect()
    });
    &rules[order.min(MAX_ORDER)]
}

const MAX_ORDER: usize = 12;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_integrates_polynomials() {
        for order in [2usize, 3, 5, 8] {
            let rule = legendre_unit(order);
            let deg = 2 * order - 1;
            let s: f64 = rule.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
            assert_abs_diff_eq!(s, 1.0 / (deg as f64 + 1.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn double_exponential_smooth_integrand() {
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-12);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-11);
    }
}
