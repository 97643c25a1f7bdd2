use std::path::Path;

use super::{run, Ctx, REGISTRY};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{Outcome, Report};

/// Reruns `config` into `dir` and compares the canonical report and the CSV
/// artifacts with `first`, which was written to `first_dir`.
pub fn compare_reruns(
    first: &Report,
    first_dir: &Path,
    config: &ExperimentConfig,
    dir: &Path,
) -> Result<bool, CliError> {
    let second = run(config, dir)?;
    let mut same = first.canonical_json() == second.canonical_json();
    for name in &first.artifacts {
        let read = |d: &Path| {
            let p = d.join(name);
            std::fs::read(&p).map_err(|source| CliError::Output {
                path: p.display().to_string(),
                source,
            })
        };
        same &= read(first_dir)? == read(dir)?;
    }
    Ok(same)
}

pub fn determinism(ctx: &Ctx, out: &mut Outcome) -> Result<(), CliError> {
    let names: Vec<&str> = REGISTRY.iter().map(|e| e.name).filter(|&n| n != "determinism").collect();
    out.input("experiments", &names);
    for name in names {
        let config = ExperimentConfig::named(name);
        let base = ctx.out_dir.join("determinism").join(name);
        let first = run(&config, &base.join("a"))?;
        let same = compare_reruns(&first, &base.join("a"), &config, &base.join("b"))?;
        out.flag(name, same);
    }
    Ok(())
}
