//! Experiment runner for the qms-core workbench: validated JSON configs in,
//! deterministic CSV or JSON tables plus a run manifest out.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use config::{ExperimentConfig, SCHEMA_VERSION};
use report::{sha256_hex, to_csv, to_json, write_atomic, ProducedFile, Report, RunManifest};

/// The configuration was rejected before any computation ran.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigInvalid(pub String);

impl fmt::Display for ConfigInvalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigInvalid {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigInvalid(e.to_string()))?;
    validate_config(&config)?;
    Ok(config)
}

pub fn validate_config(config: &ExperimentConfig) -> Result<()> {
    if config.schema != SCHEMA_VERSION {
        return Err(ConfigInvalid(format!("unsupported schema {} (expected {SCHEMA_VERSION})", config.schema)).into());
    }
    let id = &config.experiment_id;
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) || id.starts_with('.') {
        return Err(ConfigInvalid(format!("experiment_id {id:?} must be a plain file name")).into());
    }
    if !(config.solver.tolerance >= 0.0) || config.solver.restarts == 0 || config.solver.iterations == 0 {
        return Err(ConfigInvalid("solver needs restarts, iterations > 0 and tolerance >= 0".into()).into());
    }
    commands::validate(&config.task)
}

/// Runs the task and collects its rows and checks. Deterministic in the config.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    validate_config(config)?;
    let mut report = Report::new(&config.experiment_id, config.task.command(), config.seed);
    commands::dispatch(&config.task, &mut report, &config.solver)?;
    Ok(report)
}

/// Runs the task, writes `<id>.<format>` and `<id>.manifest.json` into `out`.
pub fn execute(config: &ExperimentConfig, out: &Path, format: Format) -> Result<(Report, RunManifest)> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let report = run(config)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let bytes = match format {
        Format::Csv => to_csv(&report)?,
        Format::Json => to_json(&report)?,
    };
    let name = PathBuf::from(format!("{}.{}", config.experiment_id, format.extension()));
    write_atomic(&out.join(&name), &bytes).with_context(|| format!("writing {}", name.display()))?;
    let manifest = RunManifest {
        experiment_id: config.experiment_id.clone(),
        command: config.task.command().into(),
        seed: config.seed,
        config_sha256: sha256_hex(&serde_json::to_vec(config)?),
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        passed: report.passed(),
        complete: report.complete(),
        checks: report.checks.clone(),
        files: vec![ProducedFile { path: name, sha256: sha256_hex(&bytes), rows: report.rows.len() }],
    };
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest)?;
    manifest_bytes.push(b'\n');
    write_atomic(&out.join(format!("{}.manifest.json", config.experiment_id)), &manifest_bytes)?;
    Ok((report, manifest))
}
