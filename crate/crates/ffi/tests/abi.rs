use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use dirac_spectra_ffi::*;

fn last_error() -> String {
    let p = ds_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn representation_round_trip() {
    unsafe {
        let mut rep = ptr::null_mut();
        assert_eq!(ds_dirac_rep_new(5, &mut rep), DsStatus::DsOk);
        let (mut n, mut ok) = (0usize, false);
        assert_eq!(ds_dirac_rep_info(rep, &mut n, &mut ok), DsStatus::DsOk);
        assert_eq!(n, 8);
        assert!(ok);
        let (mut re, mut im) = (vec![0.0; 64], vec![0.0; 64]);
        assert_eq!(ds_dirac_rep_matrix(rep, 5, re.as_mut_ptr(), im.as_mut_ptr(), 64), DsStatus::DsOk);
        // β is diagonal with entries ±1.
        for i in 0..8 {
            for j in 0..8 {
                let expect_mag = if i == j { 1.0 } else { 0.0 };
                assert_eq!(re[i * 8 + j].abs(), expect_mag);
                assert_eq!(im[i * 8 + j], 0.0);
            }
        }
        assert_eq!(ds_dirac_rep_matrix(rep, 6, re.as_mut_ptr(), im.as_mut_ptr(), 64), DsStatus::DsErrInvalidArgument);
        assert_eq!(ds_dirac_rep_matrix(rep, 0, re.as_mut_ptr(), im.as_mut_ptr(), 10), DsStatus::DsErrInvalidArgument);
        ds_dirac_rep_free(rep);
    }
}

#[test]
fn errors_are_reported_per_thread() {
    unsafe {
        let mut rep = ptr::null_mut();
        assert_eq!(ds_dirac_rep_new(12, &mut rep), DsStatus::DsErrInvalidArgument);
        assert!(rep.is_null());
        assert!(last_error().contains("d=12"));
        assert_eq!(ds_dirac_rep_new(3, ptr::null_mut()), DsStatus::DsErrNullPointer);
        assert!(last_error().contains("out"));
        let other = std::thread::spawn(|| ds_last_error_message().is_null()).join().unwrap();
        assert!(other);
    }
}

#[test]
fn theorem_check_and_threshold() {
    let theorem = CString::new("massless-electric").unwrap();
    let family = CString::new("coulomb-electric").unwrap();
    unsafe {
        let mut c = 0.0;
        assert_eq!(ds_critical_coupling(theorem.as_ptr(), family.as_ptr(), 3, 0.0, ptr::null(), &mut c), DsStatus::DsOk);
        assert!((c - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        let bisect = CString::new("bisection").unwrap();
        let mut b = 0.0;
        assert_eq!(ds_critical_coupling(theorem.as_ptr(), family.as_ptr(), 3, 0.0, bisect.as_ptr(), &mut b), DsStatus::DsOk);
        assert!((b - c).abs() < 1e-9);

        // ν = 0.1: ε₂ = 0.2, ε₃ = 0.1, ε₄ = ∞, ε₁ = ε₅ = 0.
        let eps = [0.0, 0.2, 0.1, f64::INFINITY, 0.0];
        let mut out = DsCheckResult::default();
        assert_eq!(ds_check_theorem(theorem.as_ptr(), 3, 0.0, eps.as_ptr(), &mut out), DsStatus::DsOk);
        assert_eq!(out.verdict, DsVerdict::DsHolds);
        assert!((out.lhs - 0.44).abs() < 1e-12, "{}", out.lhs);

        let bogus = CString::new("no-such-theorem").unwrap();
        assert_eq!(ds_check_theorem(bogus.as_ptr(), 3, 0.0, eps.as_ptr(), &mut out), DsStatus::DsErrInvalidArgument);
    }
}

#[test]
fn sommerfeld_domain() {
    unsafe {
        let mut e = 0.0;
        assert_eq!(ds_sommerfeld(-0.5, -1, 0, 1.0, &mut e), DsStatus::DsOk);
        assert!((e - 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(ds_sommerfeld(-1.5, -1, 0, 1.0, &mut e), DsStatus::DsErrDomain);
    }
}

#[test]
fn refinement_study_through_handles() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(ds_radial_problem_new(-0.5, 0.0, 0.0, 1.0, -1, 1e-4, 60.0, 1024, &mut p), DsStatus::DsOk);
        let mut s = ptr::null_mut();
        assert_eq!(ds_refinement_study(p, f64::NAN, f64::NAN, &mut s), DsStatus::DsOk);
        let mut len = 0;
        assert_eq!(ds_spectrum_len(s, &mut len), DsStatus::DsOk);
        assert!(len >= 2);
        let mut ev = DsEigenvalue::default();
        assert_eq!(ds_spectrum_get(s, 0, &mut ev), DsStatus::DsOk);
        assert!(ev.persistent && ev.in_gap);
        assert!((ev.lambda - 0.75f64.sqrt()).abs() < 1e-4);
        assert_eq!(ds_spectrum_get(s, len, &mut ev), DsStatus::DsErrInvalidArgument);
        let mut json = ptr::null_mut();
        assert_eq!(ds_spectrum_to_json(s, &mut json), DsStatus::DsOk);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["verdicts"].as_array().unwrap().len(), len);
        ds_string_free(json);
        ds_spectrum_free(s);
        ds_radial_problem_free(p);

        let mut bad = ptr::null_mut();
        assert_eq!(ds_radial_problem_new(0.0, 0.0, 0.0, 1.0, 0, 1e-4, 60.0, 1024, &mut bad), DsStatus::DsErrInvalidArgument);
    }
}

fn target_dir() -> PathBuf {
    // tests run from <target>/<profile>/deps/abi-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_header() {
    let lib = target_dir().join("libdirac_spectra_ffi.a");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: C compiler or static library unavailable");
        return;
    }
    let tmp = std::env::temp_dir().join(format!("ds_ffi_{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let src = tmp.join("probe.c");
    std::fs::write(
        &src,
        r#"#include <math.h>
#include <stdio.h>
#include "dirac_spectra.h"
int main(void) {
    double e = 0.0;
    if (ds_sommerfeld(-0.5, -1, 0, 1.0, &e) != DS_OK) return 1;
    if (fabs(e - sqrt(0.75)) > 1e-15) return 2;
    DsDiracRep *rep = NULL;
    if (ds_dirac_rep_new(42, &rep) != DS_ERR_INVALID_ARGUMENT) return 3;
    if (ds_last_error_message() == NULL) return 4;
    if (ds_dirac_rep_new(3, &rep) != DS_OK) return 5;
    size_t n = 0; bool ok = false;
    if (ds_dirac_rep_info(rep, &n, &ok) != DS_OK || n != 4 || !ok) return 6;
    ds_dirac_rep_free(rep);
    printf("%s\n", ds_version());
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.join("probe");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C probe failed to compile");
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), env!("CARGO_PKG_VERSION"));
    let _ = std::fs::remove_dir_all(&tmp);
}
