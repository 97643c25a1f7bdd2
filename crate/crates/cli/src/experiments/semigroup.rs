use gaussbv_core::cylinder::monotonicity_check;
use gaussbv_core::semigroup::{commutation_residual, ou_apply, Semigroup};
use gaussbv_core::{GaussianMeasure, GridField, QuadratureKind, QuadratureRule};

use super::common::{field, grid, key, rng, RandomSines};
use super::Ctx;
use crate::error::{op, CliError};
use crate::report::Outcome;

pub const COMMUTATION_TOL: f64 = 1e-5;

/// Probabilists' Hermite polynomial `He_k`.
fn hermite(k: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if k == 0 {
        return a;
    }
    for j in 1..k {
        (a, b) = (b, x * b - j as f64 * a);
    }
    b
}

/// `T_t cos(x) = exp(-beta^2 / 2) cos(alpha x)`.
fn ou_cos(t: f64, x: f64) -> f64 {
    let (alpha, beta) = Semigroup::OrnsteinUhlenbeck.coefficients(t);
    (-0.5 * beta * beta).exp() * (alpha * x).cos()
}

pub fn mehler_commutation(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let level = ctx.level_or(9);
    let times = ctx.config.times.clone().unwrap_or_else(|| vec![0.1, 0.5, 1.0]);
    let quadrature = ctx.config.quadrature.unwrap_or(QuadratureKind::GaussHermite);
    out.input("level", level);
    out.input("times", &times);
    out.input("quadrature", quadrature);
    let g = grid(1, level)?;

    let mut worst: f64 = 0.0;
    for k in 0..=4 {
        let p = field(&g, |x| hermite(k, x[0]))?;
        for &t in &times {
            let r = op(format!("commutation_residual on He_{k}"), commutation_residual(&p, t))?;
            out.value(format!("He_{k}.{}", key("t", t)), r);
            worst = worst.max(r);
        }
    }
    out.value("commutation_worst", worst);
    out.flag("commutation", worst < COMMUTATION_TOL);

    // semigroup law on cos, errors in L^1(gamma) against the closed form
    let u = field(&g, |x| x[0].cos())?;
    let l1_err = |v: &GridField, t: f64| -> f64 {
        v.values()
            .iter()
            .zip(g.axis())
            .zip(g.weights())
            .map(|((a, &x), w)| w * (a - ou_cos(t, x)).abs())
            .sum()
    };
    let apply = |v: &GridField, t: f64| op("ou_apply", ou_apply(v, t));
    let mut single_tol: f64 = 0.0;
    let mut pairs = Vec::new();
    for (i, &s) in times.iter().enumerate() {
        for &t in &times[i..] {
            pairs.push((s, t));
        }
    }
    for &(s, t) in &pairs {
        for tau in [s, t, s + t] {
            single_tol = single_tol.max(l1_err(&apply(&u, tau)?, tau));
        }
    }
    let mut law_ok = true;
    for &(s, t) in &pairs {
        let two = apply(&apply(&u, t)?, s)?;
        let one = apply(&u, s + t)?;
        let diff = op("difference", two.sub(&one))?;
        let law: f64 = diff.values().iter().zip(g.weights()).map(|(a, w)| w * a.abs()).sum();
        out.value(format!("law.s={s}.t={t}"), law);
        law_ok &= law <= 2.0 * single_tol;
    }
    out.value("single_step_tolerance", single_tol);
    out.flag("semigroup_law", law_ok);

    // the Mehler integral by an explicit quadrature rule against the grid
    // operator
    let (rule_level, radius) = match quadrature {
        QuadratureKind::GaussHermite => (48, None),
        QuadratureKind::UniformTruncated => (801, Some(9.0)),
    };
    let rule = op("quadrature rule", QuadratureRule::build(1, quadrature, rule_level, radius))?;
    let measure = GaussianMeasure::standard(1);
    let (mut vs_grid, mut vs_exact): (f64, f64) = (0.0, 0.0);
    for &t in &times {
        let (alpha, beta) = Semigroup::OrnsteinUhlenbeck.coefficients(t);
        let tu = op("ou_apply", ou_apply(&u, t))?;
        for (i, &x) in g.axis().iter().enumerate().step_by(8) {
            if x.abs() > 4.0 {
                continue;
            }
            let q = op("mehler quadrature", rule.integrate(&measure, |y| (alpha * x + beta * y[0]).cos()))?;
            vs_grid = vs_grid.max((q - tu.values()[i]).abs());
            vs_exact = vs_exact.max((q - ou_cos(t, x)).abs());
        }
    }
    out.value("mehler_quadrature_vs_grid", vs_grid);
    out.value("mehler_quadrature_vs_exact", vs_exact);
    out.flag("mehler_quadrature", vs_grid < 1e-6 && vs_exact < 1e-9);
    Ok(())
}

pub fn cylindrical_monotonicity(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let dims = ctx.dims(&[2, 3])?;
    let times = ctx.config.times.clone().unwrap_or_else(|| vec![0.1]);
    let seed = ctx.seed_or(2024);
    let n_fields = 20;
    out.input("dims", &dims);
    out.input("times", &times);
    out.input("seed", seed);
    out.input("fields", n_fields);
    for d in dims {
        let level = ctx.level_or(if d == 2 { 7 } else { 5 });
        out.input(&format!("level_{d}d"), level);
        let g = grid(d, level)?;
        let mut r = rng(seed.wrapping_add(d as u64));
        let fields: Vec<RandomSines> = (0..n_fields).map(|_| RandomSines::new(d, 4, &mut r)).collect();
        for &t in &times {
            let mut ratios = Vec::new();
            let mut ok = true;
            for f in &fields {
                let u = field(&g, |x| f.eval(x))?;
                for m in 1..=d {
                    let rep = op(format!("monotonicity_check m = {m}"), monotonicity_check(&u, m, t))?;
                    ratios.push(rep.lhs / rep.rhs);
                    ok &= rep.pass;
                }
            }
            let k = format!("d={d}.{}", key("t", t));
            out.value(format!("{k}.worst_ratio"), ratios.iter().copied().fold(0.0, f64::max));
            out.value(format!("{k}.ratios"), ratios);
            out.flag(k, ok);
        }
    }
    Ok(())
}
