use std::path::Path;
use std::process::{Command, Output};

use qms_cli::config::{ExperimentConfig, SolverConfig, Task, SCHEMA_VERSION};
use qms_cli::report::{from_json, sha256_hex, to_csv, to_json, RunManifest};
use qms_cli::{execute, parse_config, run, Format};

fn qms(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qms"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("QMS_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn config(id: &str, seed: u64, task: serde_json::Value) -> ExperimentConfig {
    ExperimentConfig {
        schema: SCHEMA_VERSION,
        experiment_id: id.into(),
        seed,
        solver: SolverConfig::default(),
        task: serde_json::from_value(task).unwrap(),
    }
}

#[test]
fn mk_dist_two_point_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = qms(&["mk-dist", "--seed", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("mk-dist.csv"));
    assert_eq!(rows.len(), 1);
    let v: f64 = rows[0][3].parse().unwrap();
    assert!((v - 1.0).abs() <= 1e-3);
    let manifest: RunManifest = serde_json::from_slice(&std::fs::read(dir.path().join("mk-dist.manifest.json")).unwrap()).unwrap();
    assert!(manifest.passed && manifest.complete);
    assert_eq!(manifest.threads, 1);
    let bytes = std::fs::read(dir.path().join("mk-dist.csv")).unwrap();
    assert_eq!(manifest.files[0].sha256, sha256_hex(&bytes));
    assert_eq!(manifest.files[0].rows, 1);
}

#[test]
fn product_reports_sigma_spectrum() {
    let c = config("prod", 5, serde_json::json!({"command": "product", "trials": 20, "max_level": 2}));
    let report = run(&c).unwrap();
    assert!(report.passed(), "{:?}", report.checks);
    let spectrum: Vec<f64> = report.rows.iter().filter(|r| r.quantity == "sigma_spectrum").map(|r| r.value).collect();
    let r2 = 2f64.sqrt();
    assert_eq!(spectrum.len(), 4);
    for (e, want) in spectrum.iter().zip([-r2, -r2, r2, r2]) {
        assert!((e - want).abs() < 1e-10);
    }
    for case in ["eveneven", "evenodd", "oddeven", "oddodd"] {
        assert!(report.rows.iter().any(|r| r.quantity == format!("{case}.left_violation")), "{case}");
    }
}

#[test]
fn axioms_on_fuzzy_torus() {
    let c = config("ax", 1, serde_json::json!({"command": "axioms", "trials": 60}));
    let report = run(&c).unwrap();
    assert!(report.passed(), "{:?}", report.checks);
    for r in report.rows.iter().filter(|r| r.certificate == "residual") {
        assert!(r.value <= 1e-9, "{}: {}", r.quantity, r.value);
    }
}

#[test]
fn defect_has_one_row_per_level() {
    let c = config("def", 2, serde_json::json!({"command": "defect", "max_level": 3}));
    let report = run(&c).unwrap();
    let levels: Vec<Option<usize>> = report.rows.iter().filter(|r| r.quantity == "defect").map(|r| r.level_s).collect();
    assert_eq!(levels, vec![Some(1), Some(2), Some(3)]);
    assert!(report.passed(), "{:?}", report.checks);
}

#[test]
fn json_round_trip_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("rt", 4, serde_json::json!({"command": "diameter", "max_level": 1}));
    let (report, manifest) = execute(&c, dir.path(), Format::Json).unwrap();
    let bytes = std::fs::read(dir.path().join(&manifest.files[0].path)).unwrap();
    let parsed = from_json(&bytes).unwrap();
    assert_eq!(parsed, report);
    assert_eq!(to_json(&parsed).unwrap(), bytes);
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let res = qms(&["covering", "--seed", "11"], out);
        assert!(res.status.success());
    }
    assert_eq!(std::fs::read(a.join("covering.csv")).unwrap(), std::fs::read(b.join("covering.csv")).unwrap());
    let c = config("x", 11, serde_json::json!({"command": "defect"}));
    assert_eq!(to_csv(&run(&c).unwrap()).unwrap(), to_csv(&run(&c).unwrap()).unwrap());
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let unknown = write("u.json", r#"{"schema":1,"experiment_id":"u","seed":1,"task":{"command":"mk-dist","bogus":1}}"#);
    let schema = write("s.json", r#"{"schema":99,"experiment_id":"s","seed":1,"task":{"command":"mk-dist"}}"#);
    let noseed = write("n.json", r#"{"schema":1,"experiment_id":"n","task":{"command":"mk-dist"}}"#);
    let path_id = write("p.json", r#"{"schema":1,"experiment_id":"../x","seed":1,"task":{"command":"mk-dist"}}"#);
    for cfg in [&unknown, &schema, &noseed, &path_id] {
        let out = qms(&["mk-dist", "--config", cfg], dir.path());
        assert_eq!(out.status.code(), Some(2), "{cfg}: {}", String::from_utf8_lossy(&out.stderr));
    }
    // Task and subcommand disagree.
    let ok = write("ok.json", r#"{"schema":1,"experiment_id":"ok","seed":1,"task":{"command":"mk-dist"}}"#);
    assert_eq!(qms(&["diameter", "--config", &ok], dir.path()).status.code(), Some(2));
    // No config and no seed.
    assert_eq!(qms(&["mk-dist"], dir.path()).status.code(), Some(2));
    assert!(parse_config(r#"{"schema":1,"experiment_id":"t","seed":1,"task":{"command":"torus","grid":0}}"#).is_err());
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // A wrong reference value makes the distance check fail.
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"schema":1,"experiment_id":"bad","seed":1,"task":{"command":"mk-dist","expected":0.5}}"#).unwrap();
    let out = qms(&["mk-dist", "--config", p.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("bad.csv").exists());
}

#[test]
fn every_command_has_defaults() {
    for cmd in ["axioms", "mk-dist", "diameter", "defect", "ergodic", "torus", "product", "tensor-certify", "covering"] {
        let task = Task::default_for(cmd).unwrap();
        assert_eq!(task.command(), cmd);
    }
}
