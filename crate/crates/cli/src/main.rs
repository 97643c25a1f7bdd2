use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaussbv_cli::{init_threads, output_dir, run, CliError, ExperimentConfig, REGISTRY};

#[derive(Parser)]
#[command(name = "gaussbv", version, about = "Gaussian BV experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config or by name.
    Run {
        /// Path to a JSON experiment config.
        config: Option<PathBuf>,
        /// Experiment name, with its default configuration.
        #[arg(long, conflicts_with = "config")]
        experiment: Option<String>,
        /// Overrides the seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the grid level (2^level + 1 nodes per axis).
        #[arg(long)]
        level: Option<u32>,
        /// Output directory for the report and artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the registered experiments.
    List,
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::List => {
            for e in REGISTRY {
                println!("{:<26} {}", e.name, e.description);
            }
            Ok(true)
        }
        Command::Run {
            config,
            experiment,
            seed,
            level,
            out,
        } => {
            let mut cfg = match (config, experiment) {
                (Some(path), None) => ExperimentConfig::load(&path)?,
                (None, Some(name)) => ExperimentConfig::named(&name),
                _ => return Err(CliError::Config("give a config file or --experiment".into())),
            };
            if seed.is_some() {
                cfg.seed = seed;
            }
            if level.is_some() {
                cfg.level = level;
            }
            init_threads()?;
            let dir = output_dir(&cfg, out.as_deref());
            let report = run(&cfg, &dir)?;
            let path = dir.join(format!("{}.json", report.experiment));
            let failing = report.failing();
            if failing.is_empty() {
                println!("{}: PASS ({:.1} s) -> {}", report.experiment, report.wall_time, path.display());
            } else {
                println!(
                    "{}: FAIL [{}] ({:.1} s) -> {}",
                    report.experiment,
                    failing.join(", "),
                    report.wall_time,
                    path.display()
                );
            }
            Ok(failing.is_empty())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("gaussbv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
