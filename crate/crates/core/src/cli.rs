//! Command-line front end: argument parsing, subcommand dispatch and report files.
//!
//! Exit status: 0 when the check passes or the hypothesis holds, 1 when it fails, 2 when it cannot
//! be certified, 3 on a runtime error and 4 on a usage or configuration error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::clifford::{self, DiracRep};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fields;
use crate::hardy::{self, Family, Method};
use crate::identities::{run_suite, SuiteOptions};
use crate::radial3d::{self, compare_with_oracle, refinement_study, RadialProblem, RefinementStudy, SolveOptions};

pub const EXIT_ERROR: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

/// Environment variable that caps the worker threads used by sweeps and gridded checks.
pub const THREADS_ENV: &str = "DIRAC_SPECTRA_THREADS";

/// Note attached to every spectrum report without persistent eigenvalues.
pub const ABSENCE_NOTE: &str = "no persistent eigenvalue found; numerics cannot prove absence";

#[derive(Debug, Parser)]
#[command(name = "dirac-spectra", version, about = "Dirac representations, smallness checks, identity verification and radial spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// Run configuration (INI-style `key = value`).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Theorem selector (general, electric, massless-electric, scalar, anomalous, anomalous-3d).
    #[arg(long, global = true, value_name = "NAME")]
    pub theorem: Option<String>,
    /// Space dimension.
    #[arg(long, global = true, value_name = "D")]
    pub dim: Option<usize>,
    /// Partial-wave index for `spectrum` (and the only index for `sweep`).
    #[arg(long, global = true, value_name = "K", allow_hyphen_values = true)]
    pub kappa: Option<i32>,
    /// Random seed.
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<u64>,
    /// Directory for report files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Print the JSON report on stdout (default).
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Print CSV on stdout where a table exists (`spectrum`, `sweep`).
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the Dirac matrices, verify every relation exactly and emit them.
    Clifford,
    /// Derive the epsilon constants and evaluate the selected theorem.
    Check,
    /// Critical coupling of a one-parameter family.
    Threshold {
        /// coulomb-electric, coulomb-scalar, coulomb-anomalous or magnetic-inverse-square.
        #[arg(long)]
        family: Option<String>,
        /// auto, closed-form or bisection.
        #[arg(long)]
        method: Option<String>,
    },
    /// Run the operator and matrix identity suite with seeded random spinors.
    VerifyIdentities,
    /// Radial solve, refinement study and oracle comparison for one partial wave.
    Spectrum,
    /// Refinement studies over grids of couplings and partial waves.
    Sweep,
}

/// Result of a subcommand: exit status, stdout text and report files.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub files: Vec<(String, String)>,
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Loads the configuration and applies the command-line overrides.
pub fn resolve_config(flags: &Flags) -> Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = &flags.theorem {
        cfg.theorem = t.parse()?;
    }
    if let Some(d) = flags.dim {
        if !(clifford::MIN_DIM..=clifford::MAX_DIM).contains(&d) {
            return Err(Error::DimensionOutOfRange { d, min: clifford::MIN_DIM, max: clifford::MAX_DIM });
        }
        cfg.dimension = d;
    }
    if let Some(k) = flags.kappa {
        if k == 0 {
            return Err(Error::InvalidProblem("kappa must be nonzero".into()));
        }
        cfg.spectrum.kappa = k;
        cfg.sweep.kappa = vec![k];
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(o) = &flags.out {
        cfg.output_dir = Some(o.clone());
    }
    Ok(cfg)
}

/// Runs one subcommand against a resolved configuration.
pub fn run(command: &Command, cfg: &RunConfig, csv_stdout: bool) -> Result<Outcome> {
    match command {
        Command::Clifford => run_clifford(cfg),
        Command::Check => run_check(cfg),
        Command::Threshold { family, method } => run_threshold(cfg, family.as_deref(), method.as_deref()),
        Command::VerifyIdentities => run_identities(cfg),
        Command::Spectrum => run_spectrum(cfg, csv_stdout),
        Command::Sweep => run_sweep(cfg, csv_stdout),
    }
}

fn json_outcome(code: i32, name: &str, report: Value) -> Outcome {
    let text = pretty(&report);
    Outcome { code, stdout: text.clone(), files: vec![(format!("{name}.json"), text)] }
}

fn run_clifford(cfg: &RunConfig) -> Result<Outcome> {
    let rep = DiracRep::new(cfg.dimension)?;
    let mut violations = rep.verify();
    let spin = if cfg.dimension == 3 {
        let set = clifford::spin_and_t(&rep)?;
        violations.extend(set.verify(&rep));
        json!({ "S": set.s.iter().map(|m| m.to_json()).collect::<Vec<_>>(), "T": set.t.to_json() })
    } else {
        Value::Null
    };
    let pass = violations.is_empty();
    let report = json!({
        "command": "clifford",
        "d": cfg.dimension,
        "N": rep.spinor_size(),
        "representation": rep.to_json(),
        "spin": spin,
        "violations": violations,
        "pass": pass,
    });
    Ok(json_outcome(if pass { 0 } else { 1 }, "clifford", report))
}

fn run_check(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.dimension;
    let bundle = match cfg.supplied_eps()? {
        Some(b) => b,
        None => {
            let rep = DiracRep::new(d)?.to_numeric();
            let weights = fields::sup_weights(&cfg.potential_spec()?, &cfg.magnetic_spec()?, &rep)?;
            hardy::derive_epsilons(&weights, d, cfg.theorem)?
        }
    };
    let report = hardy::check_theorem(&bundle, d, cfg.mass, cfg.theorem)?;
    let mut v = report.to_json();
    v["command"] = json!("check");
    v["potential"] = json!(cfg.potential.family);
    v["magnetic"] = json!(cfg.magnetic.family);
    Ok(json_outcome(report.verdict.exit_code(), "check", v))
}

fn run_threshold(cfg: &RunConfig, family: Option<&str>, method: Option<&str>) -> Result<Outcome> {
    let name = family.unwrap_or(&cfg.threshold_family);
    let method: Method = match method {
        Some(m) => m.parse()?,
        None => cfg.threshold_method,
    };
    let fam = Family::named(name, cfg.dimension, cfg.theorem)?;
    let c = hardy::critical_coupling(cfg.theorem, cfg.dimension, cfg.mass, &fam, method)?;
    let mut v = c.to_json();
    v["command"] = json!("threshold");
    Ok(json_outcome(0, "threshold", v))
}

fn run_identities(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.dimension != 3 {
        return Err(Error::Mismatch(format!("the identity suite runs in dimension 3 (got {})", cfg.dimension)));
    }
    let opts = SuiteOptions { seed: cfg.seed, l: cfg.box_l, n: cfg.box_n, spinors: cfg.spinors };
    let reports = run_suite(&opts)?;
    let all_pass = reports.iter().all(|r| r.pass);
    let report = json!({
        "command": "verify-identities",
        "seed": cfg.seed,
        "L": cfg.box_l,
        "n": cfg.box_n,
        "spinors": cfg.spinors,
        "reports": reports,
        "all_pass": all_pass,
    });
    Ok(json_outcome(if all_pass { 0 } else { 1 }, "identities", report))
}

fn radial_problem(cfg: &RunConfig, kappa: i32, nu: f64, mu: f64, delta: f64) -> Result<RadialProblem> {
    match cfg.potential.family.as_str() {
        "zero" | "matrix-coulomb" => {}
        other => return Err(Error::Mismatch(format!("radial spectra need potential.family = matrix-coulomb or zero (got {other})"))),
    }
    if cfg.dimension != 3 {
        return Err(Error::Mismatch(format!("radial spectra are computed in dimension 3 (got {})", cfg.dimension)));
    }
    RadialProblem::new(nu, mu, delta, cfg.mass, kappa, cfg.radial)
}

fn couplings(cfg: &RunConfig) -> (f64, f64, f64) {
    if cfg.potential.family == "zero" {
        (0.0, 0.0, 0.0)
    } else {
        (cfg.potential.nu, cfg.potential.mu, cfg.potential.delta)
    }
}

/// Oracle comparison and consistency flag; `None` when the closed form does not apply.
fn oracle_section(study: &RefinementStudy, tolerance: f64) -> Result<Option<(Value, bool)>> {
    let p = &study.problem;
    let applies = p.m > 0.0 && p.nu < 0.0 && p.mu == 0.0 && p.delta == 0.0 && p.nu.abs() < (p.kappa as f64).abs();
    if !applies {
        return Ok(None);
    }
    let eig: Vec<f64> = study.verdicts.iter().map(|v| v.lambda).collect();
    let persistent: Vec<bool> = study.verdicts.iter().map(|v| v.persistent).collect();
    let matches = compare_with_oracle(p.nu, p.kappa, p.m, study.window.1, &eig, &persistent)?;
    let levels = radial3d::sommerfeld_levels(p.nu, p.kappa, p.m, study.window.1)?;
    // Every persistent in-gap eigenvalue must sit on an oracle level.
    let consistent = study.verdicts.iter().filter(|v| v.persistent && v.in_gap).all(|v| {
        levels.iter().any(|(_, e)| (v.lambda - e).abs() / e.abs() <= tolerance)
    });
    Ok(Some((json!({ "tolerance": tolerance, "levels": matches, "consistent": consistent }), consistent)))
}

fn study_json(study: &RefinementStudy, oracle: Option<Value>) -> Value {
    let persistent = study.persistent_in_gap();
    let mut notes = Vec::new();
    if study.persistent().count() == 0 {
        notes.push(ABSENCE_NOTE.to_string());
    }
    json!({
        "problem": study.problem,
        "window": [study.window.0, study.window.1],
        "criteria": study.criteria,
        "verdicts": study.verdicts,
        "persistent_in_gap": persistent,
        "oracle": oracle,
        "notes": notes,
    })
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions { method: cfg.spectrum.method, ..SolveOptions::default() }
}

fn run_spectrum(cfg: &RunConfig, csv_stdout: bool) -> Result<Outcome> {
    let (nu, mu, delta) = couplings(cfg);
    let p = radial_problem(cfg, cfg.spectrum.kappa, nu, mu, delta)?;
    let window = cfg.spectrum.window.unwrap_or_else(|| p.gap_window());
    let study = refinement_study(&p, window, &cfg.spectrum.criteria, &solve_options(cfg))?;
    let oracle = oracle_section(&study, cfg.spectrum.oracle_tolerance)?;
    let consistent = oracle.as_ref().is_none_or(|o| o.1);
    let mut report = study_json(&study, oracle.map(|o| o.0));
    report["command"] = json!("spectrum");
    let mut csv = Vec::new();
    radial3d::write_csv(&study.rows(), &mut csv)?;
    let csv = String::from_utf8(csv).expect("CSV is UTF-8");
    let json_text = pretty(&report);
    Ok(Outcome {
        code: if consistent { 0 } else { 1 },
        stdout: if csv_stdout { csv.clone() } else { json_text.clone() },
        files: vec![("spectrum.json".into(), json_text), ("spectrum.csv".into(), csv)],
    })
}

fn run_sweep(cfg: &RunConfig, csv_stdout: bool) -> Result<Outcome> {
    let s = &cfg.sweep;
    let mut jobs = Vec::new();
    for &k in &s.kappa {
        for &nu in &s.nu {
            for &mu in &s.mu {
                for &delta in &s.delta {
                    let p = if cfg.potential.family == "zero" { radial_problem(cfg, k, 0.0, 0.0, 0.0)? } else { radial_problem(cfg, k, nu, mu, delta)? };
                    let w = cfg.spectrum.window.unwrap_or_else(|| p.gap_window());
                    jobs.push((p, w));
                }
            }
        }
    }
    let results = radial3d::sweep(&jobs, &cfg.spectrum.criteria, &solve_options(cfg));
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut code = 0;
    for ((p, _), r) in jobs.iter().zip(results) {
        match r {
            Ok(study) => {
                rows.extend(study.rows());
                let oracle = oracle_section(&study, cfg.spectrum.oracle_tolerance)?;
                if oracle.as_ref().is_some_and(|o| !o.1) && code == 0 {
                    code = 1;
                }
                let mut e = study_json(&study, oracle.map(|o| o.0));
                e["error"] = Value::Null;
                entries.push(e);
            }
            Err(err) => {
                code = EXIT_ERROR;
                entries.push(json!({ "problem": p, "error": err.to_string() }));
            }
        }
    }
    let report = json!({ "command": "sweep", "jobs": entries });
    let mut csv = Vec::new();
    radial3d::write_csv(&rows, &mut csv)?;
    let csv = String::from_utf8(csv).expect("CSV is UTF-8");
    let json_text = pretty(&report);
    Ok(Outcome {
        code,
        stdout: if csv_stdout { csv.clone() } else { json_text.clone() },
        files: vec![("sweep.json".into(), json_text), ("sweep.csv".into(), csv)],
    })
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| Error::Parse(format!("{THREADS_ENV} must be a positive integer (got `{v}`)")))?;
    if n == 0 {
        return Err(Error::Parse(format!("{THREADS_ENV} must be a positive integer (got 0)")));
    }
    // A pool that already exists (for example in tests) keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn is_usage_error(e: &Error) -> bool {
    matches!(e, Error::Config { .. } | Error::Parse(_) | Error::DimensionOutOfRange { .. })
}

/// Parses `args`, runs the subcommand, writes report files and returns the exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let fail = |stderr: &mut dyn std::io::Write, e: &Error| {
        let _ = writeln!(stderr, "error: {e}");
        if is_usage_error(e) {
            EXIT_USAGE
        } else {
            EXIT_ERROR
        }
    };
    if let Err(e) = configure_threads() {
        return fail(stderr, &e);
    }
    let cfg = match resolve_config(&cli.flags) {
        Ok(c) => c,
        Err(e) => return fail(stderr, &e),
    };
    let outcome = match run(&cli.command, &cfg, cli.flags.csv) {
        Ok(o) => o,
        Err(e) => return fail(stderr, &e),
    };
    if let Some(dir) = &cfg.output_dir {
        let written = std::fs::create_dir_all(dir).and_then(|_| outcome.files.iter().try_for_each(|(name, text)| std::fs::write(dir.join(name), text)));
        if let Err(e) = written {
            return fail(stderr, &Error::Io(e));
        }
    }
    let _ = stdout.write_all(outcome.stdout.as_bytes());
    outcome.code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(std::iter::once("dirac-spectra").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn zero_potential_check_holds() {
        let (code, out, _) = run_args(&["check"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "holds");
    }

    #[test]
    fn threshold_prints_closed_form() {
        let (code, out, _) = run_args(&["threshold", "--theorem", "massless-electric", "--dim", "3", "--family", "coulomb-electric"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!((v["critical"].as_f64().unwrap() - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn usage_errors_exit_above_two() {
        assert_eq!(run_args(&["no-such-command"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["check", "--theorem", "bogus"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["clifford", "--dim", "12"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, 0);
    }

    #[test]
    fn clifford_passes_in_every_dimension() {
        for d in 3..=9 {
            let (code, out, _) = run_args(&["clifford", "--dim", &d.to_string()]);
            assert_eq!(code, 0, "d = {d}");
            let v: Value = serde_json::from_str(&out).unwrap();
            assert_eq!(v["pass"], true);
        }
    }
}
