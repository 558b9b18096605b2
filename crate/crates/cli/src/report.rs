//! Run reports, their CSV and JSON forms, and the run manifest.

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qms_core::metrics::SolverReport;

/// Stable CSV column order.
pub const CSV_HEADER: [&str; 7] = ["experiment_id", "level_s", "quantity", "value", "bound", "certificate", "seed"];

/// One measured quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment_id: String,
    pub level_s: Option<usize>,
    pub quantity: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub certificate: String,
    pub seed: u64,
}

/// Pass/fail outcome of one assertion of the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Solver output attached to the row it produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedSolverReport {
    pub quantity: String,
    pub report: SolverReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment_id: String,
    pub command: String,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
    pub solver_reports: Vec<NamedSolverReport>,
}

impl Report {
    pub fn new(experiment_id: &str, command: &str, seed: u64) -> Self {
        Self { experiment_id: experiment_id.into(), command: command.into(), seed, ..Self::default() }
    }

    pub fn row(&mut self, level: Option<usize>, quantity: impl Into<String>, value: f64, bound: Option<f64>, certificate: &str) {
        self.rows.push(Row {
            experiment_id: self.experiment_id.clone(),
            level_s: level,
            quantity: quantity.into(),
            value,
            bound,
            certificate: certificate.into(),
            seed: self.seed,
        });
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    /// Row and convergence check for a solver result; infinite values are
    /// reported by their witness ratio with certificate `infinite`.
    pub fn solver(&mut self, quantity: &str, report: &SolverReport, bound: Option<f64>) {
        let cert = if report.infinite { "infinite".to_string() } else { report.certificate.to_string() };
        self.row(Some(report.level), quantity, report.value, bound, &cert);
        if !report.converged && !report.infinite {
            self.check(format!("{quantity}.converged[s={}]", report.level), false, "ascent still improving when stopped");
        }
        self.solver_reports.push(NamedSolverReport { quantity: quantity.into(), report: report.clone() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// False when some solver did not converge; its rows are still emitted.
    pub fn complete(&self) -> bool {
        !self.checks.iter().any(|c| c.name.contains(".converged[") && !c.passed)
    }
}

/// `v` rounded to 12 significant digits, printed in shortest form.
pub fn fmt12(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

pub fn to_csv(report: &Report) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.experiment_id.clone(),
            r.level_s.map(|s| s.to_string()).unwrap_or_default(),
            r.quantity.clone(),
            fmt12(r.value),
            r.bound.map(fmt12).unwrap_or_default(),
            r.certificate.clone(),
            r.seed.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

pub fn to_json(report: &Report) -> serde_json::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(report)?;
    out.push(b'\n');
    Ok(out)
}

pub fn from_json(bytes: &[u8]) -> serde_json::Result<Report> {
    serde_json::from_slice(bytes)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProducedFile {
    pub path: PathBuf,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment_id: String,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub artifact_version: String,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub passed: bool,
    pub complete: bool,
    pub checks: Vec<Check>,
    pub files: Vec<ProducedFile>,
}
