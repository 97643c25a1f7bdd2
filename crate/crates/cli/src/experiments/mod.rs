//! The experiment registry. Each acceptance property is one experiment.

mod bv;
mod common;
mod determinism;
mod semigroup;
mod variational;
mod wiener;

use std::path::Path;
use std::time::Instant;

use crate::config::{ExperimentConfig, Param};
use crate::error::CliError;
use crate::report::{Outcome, Report};

pub use determinism::compare_reruns;

/// Runtime context of one experiment.
pub struct Ctx<'a> {
    pub config: &'a ExperimentConfig,
    pub out_dir: &'a Path,
}

type RunFn = fn(&Ctx, &mut Outcome) -> Result<(), CliError>;

pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [Param],
    run: RunFn,
}

use Param::*;

pub static REGISTRY: &[Experiment] = &[
    Experiment {
        name: "tv-equivalence",
        description: "dual, semigroup, relaxation and smooth total variation agree on the test suite",
        params: &[Dim, Level, Times, Seed],
        run: bv::tv_equivalence,
    },
    Experiment {
        name: "halfspace-perimeter",
        description: "perimeter of {x > a} against U(Phi(-a)) with the isoperimetric equality flag",
        params: &[Dim, Level, Levels],
        run: bv::halfspace_perimeter,
    },
    Experiment {
        name: "isoperimetric",
        description: "P(E) >= U(gamma(E)) on planar sets; strict for the disc",
        params: &[Level],
        run: bv::isoperimetric,
    },
    Experiment {
        name: "coarea",
        description: "total variation against the integral of level-set perimeters",
        params: &[Dim, Level, Seed],
        run: bv::coarea,
    },
    Experiment {
        name: "mehler-commutation",
        description: "commutation residual on Hermite polynomials, semigroup law, Mehler quadrature",
        params: &[Level, Times, Quadrature],
        run: semigroup::mehler_commutation,
    },
    Experiment {
        name: "l1-bound",
        description: "||T_t chi_E - chi_E||_1 <= c_t P(E) for a halfspace and an interval",
        params: &[Level, Times],
        run: bv::l1_bound,
    },
    Experiment {
        name: "cylindrical-monotonicity",
        description: "variation of T_t E_m u is at most that of T_t u on random smooth fields",
        params: &[Dim, Level, Times, Seed],
        run: semigroup::cylindrical_monotonicity,
    },
    Experiment {
        name: "rof-quadratic",
        description: "minimizer of 1/2|Du|^2 + 1/2(u - x)^2 against x/2",
        params: &[Level],
        run: variational::rof_quadratic,
    },
    Experiment {
        name: "rof-convexity",
        description: "total-variation minimizers of convex data are convex",
        params: &[Level],
        run: variational::rof_convexity,
    },
    Experiment {
        name: "relaxed-perimeter",
        description: "relaxed perimeter of the constant 1/2 and primal/dual agreement on Phi",
        params: &[Level],
        run: variational::relaxed_perimeter,
    },
    Experiment {
        name: "box-divergence",
        description: "perimeters of the boxes Q_m, m <= 20",
        params: &[Level],
        run: bv::box_divergence,
    },
    Experiment {
        name: "wiener-mc",
        description: "running maximum, pinned bridge, OU moments and clock matching by Monte Carlo",
        params: &[Paths, Steps, Seed],
        run: wiener::wiener_mc,
    },
    Experiment {
        name: "hino-uchida",
        description: "n P(0 <= F <= 1/n) for paths confined to (-1, 1)",
        params: &[Paths, Steps, Levels, Seed],
        run: wiener::hino_uchida,
    },
    Experiment {
        name: "determinism",
        description: "every other experiment twice with fixed seeds; reports must match",
        params: &[],
        run: determinism::determinism,
    },
    Experiment {
        name: "geometric-levelset",
        description: "level sets of the minimizer for g = x^2 - 1 against competitors",
        params: &[Level, Levels],
        run: variational::geometric_levelset,
    },
    Experiment {
        name: "slicing",
        description: "directional variation against the integral over one-dimensional slices",
        params: &[Level, Seed],
        run: bv::slicing,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// Validates `config`, runs it, and writes the report and artifacts to
/// `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<Report, CliError> {
    let exp = find(&config.experiment).ok_or_else(|| {
        CliError::Config(format!(
            "unknown experiment `{}`; see `gaussbv list`",
            config.experiment
        ))
    })?;
    config.validate(exp.params)?;
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Output {
        path: out_dir.display().to_string(),
        source,
    })?;
    let start = Instant::now();
    let mut outcome = Outcome::default();
    (exp.run)(&Ctx { config, out_dir }, &mut outcome)?;
    let report = Report {
        experiment: exp.name.to_string(),
        inputs: outcome.inputs,
        values: outcome.values,
        pass_flags: outcome.pass_flags,
        artifacts: outcome.artifacts,
        wall_time: start.elapsed().as_secs_f64(),
    };
    report.write(out_dir)?;
    Ok(report)
}
