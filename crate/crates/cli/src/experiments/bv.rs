use std::sync::Arc;

use gaussbv_core::bv::{
    ball_perimeter_2d, box_perimeter_growth, coarea_check, default_levels, grid_schedule, isoperimetric_check,
    perimeter, slicing_check, tv_report, tv_semigroup, IndicatorSet, SetKind, TVReport, DEFAULT_ASCENT_ITERS,
    DEFAULT_SCHEDULE,
};
use gaussbv_core::semigroup::ou_l1_bound_check;
use gaussbv_core::special::{isoperimetric_profile, normal_cdf, normal_pdf, INV_SQRT_2PI};
use gaussbv_core::{Grid, GridField, Regularity};

use super::common::{field, grid, key, rng, RandomSines};
use super::Ctx;
use crate::error::{op, CliError};
use crate::report::{Outcome, Table};

/// Relative tolerance shared by the perimeter comparisons.
const REL_TOL: f64 = 0.02;

fn rel_err(value: f64, oracle: f64) -> f64 {
    (value - oracle).abs() / oracle.abs()
}

struct TvCase {
    name: &'static str,
    field: GridField,
    oracle: f64,
}

fn tv_cases(dim: usize, grid: &Arc<Grid>) -> Result<Vec<TvCase>, CliError> {
    let set = |e: gaussbv_core::Result<IndicatorSet>| op("indicator", e).map(|e| e.membership().clone());
    Ok(match dim {
        1 => vec![
            TvCase {
                name: "halfspace",
                field: set(IndicatorSet::halfspace(grid, &[1.0], 0.3))?,
                oracle: normal_pdf(0.3),
            },
            TvCase {
                name: "interval",
                field: set(IndicatorSet::from_predicate(grid, SetKind::Custom, |x| x[0] > -0.5 && x[0] < 1.0))?,
                oracle: normal_pdf(0.5) + normal_pdf(1.0),
            },
            TvCase {
                name: "affine",
                field: field(grid, |x| 2.0 * x[0] + 1.0)?,
                oracle: 2.0,
            },
            TvCase {
                name: "sin",
                field: field(grid, |x| (2.0 * x[0]).sin())?,
                oracle: sin_oracle(),
            },
            TvCase {
                name: "phi-profile",
                field: field(grid, |x| normal_cdf(x[0]))?,
                oracle: 0.5 / std::f64::consts::PI.sqrt(),
            },
        ],
        _ => vec![
            TvCase {
                name: "halfspace-2d",
                field: set(IndicatorSet::halfspace(grid, &[0.6, 0.8], 0.3))?,
                oracle: normal_pdf(0.3),
            },
            TvCase {
                name: "ball-2d",
                field: set(IndicatorSet::ball(grid, &[0.5, 0.0], 1.0))?,
                oracle: op("ball_perimeter_2d", ball_perimeter_2d([0.5, 0.0], 1.0))?,
            },
        ],
    })
}

/// `E|2 cos(2x)|` by the midpoint rule in `x` over `[-10, 10]`.
fn sin_oracle() -> f64 {
    let n = 200_000;
    let h = 20.0 / n as f64;
    (0..n)
        .map(|i| {
            let x = -10.0 + (i as f64 + 0.5) * h;
            h * normal_pdf(x) * (2.0 * (2.0 * x).cos()).abs()
        })
        .sum()
}

pub fn tv_equivalence(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let dims = ctx.dims(&[1, 2])?;
    let seed = ctx.seed_or(0);
    out.input("dims", &dims);
    out.input("seed", seed);
    out.input("ascent_iters", DEFAULT_ASCENT_ITERS);
    let mut table = Table::new(&["case", "tv_dual", "tv_semigroup", "tv_relaxation", "tv_smooth", "spread", "oracle"]);
    for d in dims {
        let level = ctx.level_or(9);
        let g = grid(d, level)?;
        let schedule = ctx.config.times.clone().unwrap_or_else(|| grid_schedule(&g).to_vec());
        out.input(&format!("level_{d}d"), level);
        out.input(&format!("times_{d}d"), &schedule);
        for case in tv_cases(d, &g)? {
            let r: TVReport = op(
                format!("tv_report on {}", case.name),
                tv_report(&case.field, &schedule, DEFAULT_ASCENT_ITERS, seed),
            )?;
            let coarse = op("tv_semigroup", tv_semigroup(&case.field, &DEFAULT_SCHEDULE))?;
            out.value(case.name, r);
            out.value(format!("{}.oracle", case.name), case.oracle);
            out.value(format!("{}.tv_semigroup_default_schedule", case.name), coarse);
            out.flag(format!("{}.spread", case.name), r.spread < REL_TOL);
            table.row(
                case.name,
                &[r.tv_dual, r.tv_semigroup, r.tv_relaxation, r.tv_smooth.unwrap_or(f64::NAN), r.spread, case.oracle],
            );
        }
    }
    table.write(&ctx.csv("tv_equivalence.csv"))?;
    out.artifact("tv_equivalence.csv");
    Ok(())
}

pub fn halfspace_perimeter(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let d = ctx.config.dim.unwrap_or(1);
    if d > 2 {
        return Err(CliError::Config(format!("halfspace-perimeter runs in dimension 1 or 2, not {d}")));
    }
    let level = ctx.level_or(if d == 1 { 9 } else { 8 });
    let offsets = ctx.config.levels.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0]);
    out.input("dim", d);
    out.input("level", level);
    out.input("offsets", &offsets);
    let g = grid(d, level)?;
    let normal: &[f64] = if d == 1 { &[1.0] } else { &[0.6, 0.8] };
    for &a in &offsets {
        let e = op("indicator", IndicatorSet::halfspace(&g, normal, a))?;
        let iso = op(format!("isoperimetric_check at a = {a}"), isoperimetric_check(&e))?;
        let p = iso.perimeter;
        let expected = op("isoperimetric_profile", isoperimetric_profile(normal_cdf(-a)))?;
        let k = key("a", a);
        out.value(format!("{k}.perimeter"), p);
        out.value(format!("{k}.expected"), expected);
        out.value(format!("{k}.isoperimetric"), iso);
        out.flag(format!("{k}.perimeter"), rel_err(p, expected) <= REL_TOL);
        out.flag(format!("{k}.equality"), iso.equality);
        if a == 0.0 {
            out.flag(format!("{k}.inv_sqrt_2pi"), rel_err(p, INV_SQRT_2PI) <= REL_TOL);
        }
    }
    Ok(())
}

pub fn isoperimetric(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let level = ctx.level_or(8);
    out.input("level", level);
    let g = grid(2, level)?;
    let ball = op("ball", IndicatorSet::ball(&g, &[0.0, 0.0], 1.0))?;
    let outside = op("complement", ball.membership().map(|v| 1.0 - v))?;
    let outside = op("complement", IndicatorSet::new(outside, SetKind::Custom))?;
    let sets: Vec<(&str, IndicatorSet)> = vec![
        ("halfspace", op("halfspace", IndicatorSet::halfspace(&g, &[0.6, 0.8], 0.3))?),
        (
            "strip",
            op("strip", IndicatorSet::from_predicate(&g, SetKind::Custom, |x| x[0].abs() < 0.75))?,
        ),
        ("ball", ball),
        ("ball-offset", op("ball", IndicatorSet::ball(&g, &[0.5, 0.0], 1.0))?),
        ("ball-complement", outside),
        ("box", op("box", IndicatorSet::centered_box(&g, &[1.0, 0.5]))?),
        (
            "triangle",
            op("triangle", IndicatorSet::polygon(&g, &[[-1.0, -0.5], [1.5, -0.5], [0.0, 1.5]]))?,
        ),
    ];
    for (name, e) in &sets {
        let r = op(format!("isoperimetric_check on {name}"), isoperimetric_check(e))?;
        out.value(*name, r);
        out.flag(format!("{name}.pass"), r.pass);
        if *name == "ball" {
            out.flag("ball.strict", r.perimeter > r.profile * (1.0 + REL_TOL));
        }
    }
    Ok(())
}

pub fn coarea(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let d = ctx.config.dim.unwrap_or(1);
    if d > 2 {
        return Err(CliError::Config(format!("coarea runs in dimension 1 or 2, not {d}")));
    }
    let level = ctx.level_or(if d == 1 { 9 } else { 8 });
    let seed = ctx.seed_or(7);
    out.input("dim", d);
    out.input("level", level);
    out.input("seed", seed);
    let g = grid(d, level)?;
    let sines = RandomSines::new(d, 4, &mut rng(seed));
    let cases = vec![
        ("linear", field(&g, |x| x[0])?),
        (
            "halfspace",
            op("indicator", IndicatorSet::halfspace(&g, &unit(d), 0.0))?.membership().clone(),
        ),
        ("random-smooth", field(&g, |x| sines.eval(x))?),
    ];
    for (name, u) in cases {
        let levels = default_levels(&u);
        let r = op(format!("coarea_check on {name}"), coarea_check(&u, &levels))?;
        out.value(name, r);
        out.flag(format!("{name}.gap"), r.pass);
    }
    Ok(())
}

fn unit(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    v
}

pub fn l1_bound(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let level = ctx.level_or(9);
    let times = ctx.config.times.clone().unwrap_or_else(|| vec![0.01, 0.05]);
    out.input("level", level);
    out.input("times", &times);
    let g = grid(1, level)?;
    let cases = [
        ("halfspace", op("halfspace", IndicatorSet::halfspace(&g, &[1.0], 0.5))?),
        (
            "interval",
            op("interval", IndicatorSet::from_predicate(&g, SetKind::Custom, |x| x[0] > -0.5 && x[0] < 1.0))?,
        ),
    ];
    for (name, e) in &cases {
        let p = op(format!("perimeter of {name}"), perimeter(e))?.tv_semigroup;
        out.value(format!("{name}.perimeter"), p);
        for &t in &times {
            let r = op(format!("ou_l1_bound_check on {name}"), ou_l1_bound_check(e.membership(), t, p))?;
            let k = format!("{name}.{}", key("t", t));
            out.value(&k, r);
            out.flag(k, r.pass);
        }
    }
    Ok(())
}

pub fn box_divergence(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let level = ctx.level_or(8);
    let m_max = 20;
    out.input("m_max", m_max);
    out.input("level", level);
    let growth = op("box_perimeter_growth", box_perimeter_growth(m_max))?;
    let p1 = growth.perimeters[0];
    let last = growth.perimeters[m_max - 1];
    out.value("radii", &growth.radii);
    out.value("perimeters", &growth.perimeters);
    out.value("growth_factor", last / p1);
    out.flag("strictly_increasing", growth.increasing);
    out.flag("exceeds_3x_at_m20", last > 3.0 * p1);
    // the first two boxes on grids, against the closed form
    for m in 1..=2usize {
        let g = grid(m, if m == 1 { 9 } else { level })?;
        let e = op("box", IndicatorSet::centered_box(&g, &growth.radii[..m]))?;
        let p = op(format!("perimeter of Q_{m}"), perimeter(&e))?.tv_semigroup;
        out.value(format!("grid_perimeter_m{m}"), p);
        out.flag(format!("grid_matches_closed_form_m{m}"), rel_err(p, growth.perimeters[m - 1]) <= REL_TOL);
    }
    Ok(())
}

pub fn slicing(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let level = ctx.level_or(9);
    let seed = ctx.seed_or(11);
    out.input("level", level);
    out.input("seed", seed);
    let g = grid(2, level)?;
    let sines = RandomSines::new(2, 3, &mut rng(seed));
    let cases = [
        ("ball", op("ball", IndicatorSet::ball(&g, &[0.5, 0.0], 1.0))?.membership().clone()),
        ("random-smooth", field(&g, |x| sines.eval(x))?),
        (
            "product",
            op("field", GridField::from_fn(&g, Regularity::Smooth, |x| (x[0] * x[1]).tanh()))?,
        ),
    ];
    for (name, u) in &cases {
        for axis in 0..2 {
            let r = op(format!("slicing_check on {name}"), slicing_check(u, axis))?;
            let k = format!("{name}.axis={axis}");
            out.value(&k, r);
            out.flag(k, r.pass);
        }
    }
    Ok(())
}
