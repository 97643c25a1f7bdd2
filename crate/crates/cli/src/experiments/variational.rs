use gaussbv_core::bv::{perimeter, IndicatorSet};
use gaussbv_core::field::write_csv;
use gaussbv_core::special::{normal_cdf, INV_SQRT_2PI};
use gaussbv_core::variational::{
    convexity_check, geometric_levelset_check, relaxed_perimeter_report, rof_minimize,
    ConvexIntegrand, RangeConvention, DEFAULT_ROF_ITERS, DEFAULT_ROF_TOL,
};
use gaussbv_core::GridField;
use serde_json::json;

use super::common::{field, grid, key};
use super::Ctx;
use crate::error::{op, CliError};
use crate::report::Outcome;

/// Stopping tolerance of the quadratic oracle run.
pub const QUADRATIC_TOL: f64 = 1e-8;

fn weighted_l2(u: &GridField) -> f64 {
    u.values()
        .iter()
        .zip(u.grid().weights())
        .map(|(v, w)| w * v * v)
        .sum::<f64>()
        .sqrt()
}

pub fn rof_quadratic(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let level = ctx.level_or(9);
    out.input("level", level);
    out.input("tol", QUADRATIC_TOL);
    out.input("integrand", "half-square");
    let g = grid(1, level)?;
    let data = field(&g, |x| x[0])?;
    let sol = op(
        "rof_minimize",
        rof_minimize(&ConvexIntegrand::half_square(), &data, QUADRATIC_TOL, DEFAULT_ROF_ITERS),
    )?;
    let half = field(&g, |x| 0.5 * x[0])?;
    let diff = op("difference", sol.minimizer.sub(&half))?;
    let rel = weighted_l2(&diff) / weighted_l2(&half);
    out.value("objective", sol.objective);
    out.value("dual_bound", sol.dual_bound);
    out.value("gap", sol.gap);
    out.value("iterations", sol.iterations);
    out.value("relative_l2_error", rel);
    out.flag("minimizer_is_half_x", rel < 0.01);
    out.flag("gap_below_tol", sol.gap < QUADRATIC_TOL);
    op("write minimizer", write_csv(&sol.minimizer, ctx.csv("rof_minimizer.csv")))?;
    out.artifact("rof_minimizer.csv");
    Ok(())
}

pub fn rof_convexity(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let level = ctx.level_or(8);
    out.input("level", level);
    out.input("tol", DEFAULT_ROF_TOL);
    out.input("integrand", "norm");
    let g = grid(1, level)?;
    let f = ConvexIntegrand::norm();
    let cases: [(&str, fn(f64) -> f64, bool); 5] = [
        ("affine", |x| 0.5 * x + 1.0, true),
        ("smoothed-abs", |x| (x * x + 0.1).sqrt(), true),
        ("square", |x| x * x, true),
        ("positive-part", |x| x.max(0.0), true),
        ("negative-control", |x| -x * x + x, false),
    ];
    for (name, data, asserted) in cases {
        let d = field(&g, |x| data(x[0]))?;
        let sol = op(format!("rof_minimize on {name}"), rof_minimize(&f, &d, DEFAULT_ROF_TOL, DEFAULT_ROF_ITERS))?;
        let data_check = op("convexity_check", convexity_check(&d))?;
        let check = op("convexity_check", convexity_check(&sol.minimizer))?;
        out.value(
            name,
            json!({
                "data_convexity": data_check,
                "minimizer_convexity": check,
                "objective": sol.objective,
                "gap": sol.gap,
                "iterations": sol.iterations,
            }),
        );
        if asserted {
            out.flag(format!("{name}.minimizer_convex"), check.pass);
        }
    }
    Ok(())
}

pub fn relaxed_perimeter(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let level = ctx.level_or(8);
    out.input("level_2d", level);
    out.input("level_1d", 9);
    let g2 = grid(2, level)?;
    let half = op("constant", GridField::constant(&g2, 0.5))?;
    let c = op("relaxed_perimeter_report on 1/2", relaxed_perimeter_report(&half, RangeConvention::Unit))?;
    out.value("constant_half", c);
    out.value("inv_sqrt_2pi", INV_SQRT_2PI);
    out.flag("constant_half", (c.primal / INV_SQRT_2PI - 1.0).abs() <= 0.01);

    let g1 = grid(1, 9)?;
    let phi = field(&g1, |x| normal_cdf(x[0]))?;
    let r = op("relaxed_perimeter_report on Phi", relaxed_perimeter_report(&phi, RangeConvention::Unit))?;
    out.value("phi_profile", r);
    out.flag("phi_profile.primal_dual", r.spread < 0.02);

    // halfspaces {x_k < 0} along alternating axes: perimeters constant,
    // weak limit 1/2
    let mut perims = Vec::new();
    for k in 0..4 {
        let mut normal = [0.0, 0.0];
        normal[k % 2] = -1.0;
        let e = op("halfspace", IndicatorSet::halfspace(&g2, &normal, 0.0))?;
        perims.push(op("perimeter", perimeter(&e))?.tv_semigroup);
    }
    let lim_inf = perims.iter().copied().fold(f64::INFINITY, f64::min);
    let limit = c.primal;
    out.value("weak_lsc.perimeters", &perims);
    out.value("weak_lsc.limit", limit);
    out.flag("weak_lsc", limit <= lim_inf * 1.02);
    Ok(())
}

pub fn geometric_levelset(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let level = ctx.level_or(8);
    let levels = ctx.config.levels.clone().unwrap_or_else(|| vec![-0.5, 0.0, 0.5, 1.0]);
    out.input("level", level);
    out.input("levels", &levels);
    out.input("data", "x^2 - 1");
    let g = grid(1, level)?;
    let data = field(&g, |x| x[0] * x[0] - 1.0)?;
    let reports = op("geometric_levelset_check", geometric_levelset_check(&data, &levels))?;
    for r in reports {
        let k = key("t", r.t);
        out.flag(format!("{k}.minimizes"), r.pass);
        out.flag(format!("{k}.sublevel_convex"), r.sublevel_line_convex);
        out.value(k, r);
    }
    Ok(())
}
