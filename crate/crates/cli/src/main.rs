use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use qms_cli::config::{ExperimentConfig, SolverConfig, Task, SCHEMA_VERSION};
use qms_cli::{execute, parse_config, validate_config, ConfigInvalid, Format};

/// Quantum metric space experiments.
///
/// Exit status: 0 when every check passes, 1 when a check fails or a solver does
/// not converge, 2 on invalid configuration or runtime error.
#[derive(Parser)]
#[command(name = "qms", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; its task must match the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed; required without a config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "qms-out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Enables brute-force validation of small problems.
    #[arg(long, global = true)]
    oracle: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Operator seminorm axioms and kernel dimensions on a fuzzy torus.
    Axioms,
    /// Monge-Kantorovich distance between two states.
    MkDist,
    /// Diameter constant per amplification level.
    Diameter,
    /// Approximation defect per amplification level.
    Defect,
    /// Ergodic Weyl action suite.
    Ergodic,
    /// Noncommutative torus: gauge action against the Dirac seminorm.
    Torus,
    /// External products of random triples, all parity cases.
    Product,
    /// Tensor product certification of two fuzzy tori.
    TensorCertify,
    /// Covering numbers of the seminorm unit ball.
    Covering,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Axioms => "axioms",
            Command::MkDist => "mk-dist",
            Command::Diameter => "diameter",
            Command::Defect => "defect",
            Command::Ergodic => "ergodic",
            Command::Torus => "torus",
            Command::Product => "product",
            Command::TensorCertify => "tensor-certify",
            Command::Covering => "covering",
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("QMS_THREADS") {
        let n: usize = v.parse().map_err(|_| ConfigInvalid(format!("QMS_THREADS={v:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let name = cli.command.name();
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let config = parse_config(&text)?;
            if config.task.command() != name {
                return Err(ConfigInvalid(format!("config describes `{}`, not `{name}`", config.task.command())).into());
            }
            config
        }
        None => {
            let seed = cli.seed.ok_or_else(|| ConfigInvalid("--seed is required without --config".into()))?;
            ExperimentConfig {
                schema: SCHEMA_VERSION,
                experiment_id: name.into(),
                seed,
                solver: SolverConfig::default(),
                task: Task::default_for(name)?,
            }
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.solver.oracle |= cli.oracle;
    validate_config(&config)?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|_| load(&cli)).and_then(|c| execute(&c, &cli.out, cli.format));
    match outcome {
        Ok((report, manifest)) => {
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("FAILED {}: {}", c.name, c.detail);
            }
            let file = &manifest.files[0];
            eprintln!("{} rows -> {}", file.rows, cli.out.join(&file.path).display());
            if manifest.passed {
                ExitCode::SUCCESS
            } else {
                if !manifest.complete {
                    eprintln!("some solvers did not converge; rows are partial");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
