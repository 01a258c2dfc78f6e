//! End-to-end runs of the `dirac-spectra` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_dirac-spectra");

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(dir).env_remove("DIRAC_SPECTRA_THREADS").output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.ini");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn validate(schema: &str, doc: &Value) {
    let raw = std::fs::read_to_string(schema_dir().join(format!("{schema}.schema.json"))).unwrap();
    let schema: Value = serde_json::from_str(&raw).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{schema}: {errors:#?}");
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const SMALL_RADIAL: &str = "\
potential.family = matrix-coulomb
potential.nu = -0.5
mass = 1
grid.radial_n = 256
grid.r_min = 1e-3
grid.r_max = 40
";

#[test]
fn clifford_report_matches_schema() {
    let tmp = tempfile::tempdir().unwrap();
    for d in ["3", "4", "9"] {
        let out = run(&["clifford", "--dim", d], tmp.path());
        assert_eq!(out.status.code(), Some(0));
        let v = stdout_json(&out);
        validate("clifford", &v);
        assert_eq!(v["pass"], Value::Bool(true));
    }
}

#[test]
fn check_verdict_drives_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["check", "--theorem", "general"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    validate("check", &stdout_json(&out));

    let cfg = write_config(tmp.path(), SMALL_RADIAL);
    let out = run(&["--config", &cfg, "check", "--theorem", "electric"], tmp.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    validate("check", &v);
    assert_eq!(v["verdict"], "fails");
}

#[test]
fn threshold_report_matches_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["threshold", "--json"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    validate("threshold", &stdout_json(&out));
}

#[test]
fn identities_report_is_valid_and_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "grid.n = 64\ngrid.L = 8\nidentities.spinors = 1\nseed = 5\n");
    let a = run(&["--config", &cfg, "verify-identities", "--out", "a"], tmp.path());
    let b = run(&["--config", &cfg, "verify-identities", "--out", "b"], tmp.path());
    assert!(matches!(a.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    validate("identities", &v);
    assert_eq!(v["seed"], 5);
    let fa = std::fs::read(tmp.path().join("a/identities.json")).unwrap();
    let fb = std::fs::read(tmp.path().join("b/identities.json")).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn spectrum_writes_json_and_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL_RADIAL);
    let out = run(&["--config", &cfg, "spectrum", "--kappa", "-1", "--out", "o"], tmp.path());
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    validate("spectrum", &v);
    let json_file: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("o/spectrum.json")).unwrap()).unwrap();
    assert_eq!(json_file, v);
    let csv = std::fs::read_to_string(tmp.path().join("o/spectrum.csv")).unwrap();
    assert!(csv.starts_with("kappa,nu,mu,delta,m,n,r_max,lambda,residual,localization,persistent\n"));
    assert!(csv.lines().count() > 1);

    let again = run(&["--config", &cfg, "spectrum", "--kappa", "-1", "--csv"], tmp.path());
    assert_eq!(String::from_utf8(again.stdout).unwrap(), csv);
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{SMALL_RADIAL}sweep.kappa = -1, 1\nsweep.nu = -0.5, -0.3\n"));
    let one = Command::new(BIN).args(["--config", &cfg, "sweep"]).env("DIRAC_SPECTRA_THREADS", "1").output().unwrap();
    let many = Command::new(BIN).args(["--config", &cfg, "sweep"]).env("DIRAC_SPECTRA_THREADS", "4").output().unwrap();
    assert!(matches!(one.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, many.stdout);
    let v = stdout_json(&one);
    validate("sweep", &v);
    assert_eq!(v["jobs"].as_array().unwrap().len(), 4);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(BIN).args(["threshold"]).env("DIRAC_SPECTRA_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn config_errors_name_line_and_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "mass = 1\n[grid]\nradial_n = lots\n");
    let out = run(&["--config", &cfg, "spectrum"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("grid.radial_n"), "{err}");

    let cfg = write_config(tmp.path(), "potential.colour = red\n");
    let out = run(&["--config", &cfg, "check"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("potential.colour"));
}

#[test]
fn usage_errors_and_help() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["--help"], tmp.path()).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"], tmp.path()).status.code(), Some(4));
    assert_eq!(run(&["threshold", "--json", "--csv"], tmp.path()).status.code(), Some(4));
    assert_eq!(run(&["--config", "/nonexistent/run.ini", "check"], tmp.path()).status.code(), Some(4));
}
