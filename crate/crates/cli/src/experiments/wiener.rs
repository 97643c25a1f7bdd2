use gaussbv_core::semigroup::{ou_apply, Semigroup};
use gaussbv_core::wiener::{
    hino_uchida_estimator, marginal_stats, ou_process, running_max_stats, sample_brownian, sample_pinned,
    DomainGeometry, HinoUchidaParams, DEFAULT_PATHS,
};
use serde_json::json;

use super::common::{field, grid};
use super::Ctx;
use crate::error::{op, CliError};
use crate::report::Outcome;

/// Monte Carlo acceptance band in standard errors.
pub const SIGMAS: f64 = 3.0;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

fn within(value: f64, oracle: f64, se: f64) -> bool {
    (value - oracle).abs() <= SIGMAS * se
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `f(x) = cos x + x^2 / 4` and its closed-form `T_t f`.
fn clock_f(x: f64) -> f64 {
    x.cos() + 0.25 * x * x
}

fn clock_tf(t: f64, x: f64) -> f64 {
    let (a, b) = Semigroup::OrnsteinUhlenbeck.coefficients(t);
    (-0.5 * b * b).exp() * (a * x).cos() + 0.25 * (a * a * x * x + b * b)
}

pub fn wiener_mc(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let paths = ctx.config.paths.unwrap_or(DEFAULT_PATHS);
    let steps = ctx.config.steps.unwrap_or(512);
    let seed = ctx.seed_or(1);
    out.input("paths", paths);
    out.input("steps", steps);
    out.input("seed", seed);

    let bm = op("sample_brownian", sample_brownian(paths, steps, 0.0, seed))?;
    let rm = op("running_max_stats", running_max_stats(&bm))?;
    out.value("running_max", rm);
    out.value("running_max.oracle", SQRT_2_OVER_PI);
    out.flag("running_max.mean", within(rm.mean, SQRT_2_OVER_PI, rm.mean_se));

    let bridge = op("sample_pinned", sample_pinned(paths, steps, 0.0, 0.0, seed.wrapping_add(1)))?;
    for q in [1, 2, 3] {
        let k = q * steps / 4;
        let m = op("marginal_stats", marginal_stats(&bridge, k))?;
        let var = m.t * (1.0 - m.t);
        out.value(format!("bridge.t={}", m.t), json!({ "stats": m, "oracle_variance": var }));
        out.flag(format!("bridge.t={}.variance", m.t), within(m.variance, var, m.variance_se));
    }

    let x0 = 1.0;
    let ou = op("ou_process", ou_process(paths, steps, x0, seed.wrapping_add(2)))?;
    for k in [steps / 2, steps] {
        let m = op("marginal_stats", marginal_stats(&ou, k))?;
        let s = m.t;
        let mean = (-0.5 * s).exp() * x0;
        let var = -(-s).exp_m1();
        out.value(
            format!("ou.s={s}"),
            json!({ "stats": m, "oracle_mean": mean, "oracle_variance": var }),
        );
        out.flag(format!("ou.s={s}.mean"), within(m.mean, mean, m.mean_se));
        out.flag(format!("ou.s={s}.variance"), within(m.variance, var, m.variance_se));
    }

    // the process at time 1 has the law of T_{1/2} from x0
    let end = op("ou_process values", ou.values_at(steps))?;
    let fx: Vec<f64> = end.iter().map(|&x| clock_f(x)).collect();
    let (mc, se) = mean_and_se(&fx);
    let g = grid(1, 9)?;
    let f = field(&g, |x| clock_f(x[0]))?;
    let tf = op("ou_apply", ou_apply(&f, 0.5))?;
    let semigroup = op("interpolate", tf.interpolate(&[x0]))?;
    out.value(
        "clock_matched",
        json!({ "mc": mc, "std_err": se, "ou_apply": semigroup, "closed_form": clock_tf(0.5, x0) }),
    );
    out.flag("clock_matched", within(mc, semigroup, se));
    Ok(())
}

pub fn hino_uchida(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let paths = ctx.config.paths.unwrap_or(DEFAULT_PATHS);
    let steps = ctx.config.steps.unwrap_or(1024);
    let seed = ctx.seed_or(5);
    let ns = match &ctx.config.levels {
        Some(v) => v
            .iter()
            .map(|&x| {
                if x >= 1.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(CliError::Config(format!("hino-uchida levels are positive integers n, got {x}")))
                }
            })
            .collect::<Result<Vec<usize>, _>>()?,
        None => vec![4, 8, 16, 32],
    };
    out.input("paths", paths);
    out.input("steps", steps);
    out.input("seed", seed);
    out.input("n", &ns);
    out.input("domain", "(-1, 1)");
    let domain = op("domain", DomainGeometry::interval(-1.0, 1.0))?;
    let params = HinoUchidaParams {
        n_paths: paths,
        n_steps: steps,
        a: vec![0.0],
        b: vec![0.0],
        seed,
    };
    let points = op("hino_uchida_estimator", hino_uchida_estimator(&domain, &ns, &params))?;
    let first = points[0].bound;
    out.value("sequence", &points);
    out.value("max_over_first", points.iter().map(|p| p.bound).fold(0.0, f64::max) / first);
    out.flag("bounded", points.iter().all(|p| p.bound <= 3.0 * first));
    Ok(())
}
