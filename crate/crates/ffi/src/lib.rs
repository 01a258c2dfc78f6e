//! C ABI for `dirac-spectra`.
//!
//! Every fallible function returns a [`DsStatus`]. On failure a message is kept per thread and can be
//! read with [`ds_last_error_message`]. Objects cross the boundary as opaque handles that the caller
//! releases with the matching `*_free` function; strings returned by the library are released with
//! [`ds_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dirac_spectra::clifford::{DiracRep, NumericRep};
use dirac_spectra::error::Error;
use dirac_spectra::hardy::{self, EpsilonBundle, Family, Method, Theorem, Verdict};
use dirac_spectra::radial3d::{self, PersistenceCriteria, RadialGrid, RadialProblem, RefinementStudy, SolveOptions};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DsStatus {
    DsOk = 0,
    /// A required pointer argument was null.
    DsErrNullPointer = 1,
    /// An argument was malformed or out of range.
    DsErrInvalidArgument = 2,
    /// The request is outside the mathematical domain of the routine.
    DsErrDomain = 3,
    /// An iterative solver did not reach its tolerance.
    DsErrNoConvergence = 4,
    DsErrInternal = 5,
    /// A Rust panic was caught at the boundary.
    DsErrPanic = 6,
}

/// Outcome of a hypothesis check.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DsVerdict {
    DsHolds = 0,
    DsFails = 1,
    #[default]
    DsNotCertifiable = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DsCheckResult {
    pub verdict: DsVerdict,
    pub lhs: f64,
    pub bound: f64,
    pub margin: f64,
}

/// One base-resolution eigenvalue of a refinement study.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DsEigenvalue {
    pub lambda: f64,
    pub residual: f64,
    pub localization: f64,
    pub persistent: bool,
    pub in_gap: bool,
}

/// Dirac matrices `α_1..α_d, β` in dimension `d`.
pub struct DsDiracRep {
    numeric: NumericRep,
    exact_ok: bool,
}

/// Radial channel problem on a staggered logarithmic grid.
pub struct DsRadialProblem(RadialProblem);

/// Result of a refinement study.
pub struct DsSpectrum(RefinementStudy);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(DsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::OracleDomain(_) | Error::NeverHolds { .. } | Error::NonMonotone(_) | Error::Singularity { .. } | Error::OutsideSamples { .. } => {
                DsStatus::DsErrDomain
            }
            Error::NoConvergence(_) => DsStatus::DsErrNoConvergence,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => DsStatus::DsErrInternal,
            _ => DsStatus::DsErrInvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(DsStatus::DsErrInvalidArgument, msg.into())
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsStatus::DsOk,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            DsStatus::DsErrPanic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(DsStatus::DsErrNullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `s` must be null or point to a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, name: &str) -> Result<&'a str, Failure> {
    non_null(s, name)?;
    CStr::from_ptr(s).to_str().map_err(|_| invalid(format!("`{name}` is not valid UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| Failure(DsStatus::DsErrInternal, "string contains NUL".into()))
}

/// Message of the most recent failure on the calling thread, or null if there was none.
///
/// The pointer stays valid until the next failing call on the same thread. Do not free it.
#[no_mangle]
pub extern "C" fn ds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ds_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the representation in dimension `d` (3..=9) and verifies it in exact arithmetic.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_dirac_rep_new(d: usize, out: *mut *mut DsDiracRep) -> DsStatus {
    guard(|| {
        non_null(out, "out")?;
        let exact = DiracRep::new(d)?;
        let exact_ok = exact.verify().is_empty();
        *out = Box::into_raw(Box::new(DsDiracRep { numeric: exact.to_numeric(), exact_ok }));
        Ok(())
    })
}

/// # Safety
/// `rep` must be null or a handle from [`ds_dirac_rep_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ds_dirac_rep_free(rep: *mut DsDiracRep) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// Writes the spinor dimension `N` and whether every Clifford relation held exactly.
///
/// # Safety
/// `rep` must be a live handle; `size` and `exact_ok` must be valid writable pointers.
#[no_mangle]
pub unsafe extern "C" fn ds_dirac_rep_info(rep: *const DsDiracRep, size: *mut usize, exact_ok: *mut bool) -> DsStatus {
    guard(|| {
        non_null(rep, "rep")?;
        non_null(size, "size")?;
        non_null(exact_ok, "exact_ok")?;
        let rep = &*rep;
        *size = rep.numeric.spinor_size();
        *exact_ok = rep.exact_ok;
        Ok(())
    })
}

/// Copies one matrix in row-major order: `index < d` selects `α_{index+1}`, `index == d` selects `β`.
///
/// `re` and `im` must each hold `len >= N*N` doubles.
///
/// # Safety
/// `rep` must be a live handle; `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ds_dirac_rep_matrix(rep: *const DsDiracRep, index: usize, re: *mut f64, im: *mut f64, len: usize) -> DsStatus {
    guard(|| {
        non_null(rep, "rep")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        let r = &(*rep).numeric;
        let m = match index {
            i if i < r.d => &r.alphas[i],
            i if i == r.d => &r.beta,
            i => return Err(invalid(format!("matrix index {i} exceeds d = {}", r.d))),
        };
        let n = m.nrows();
        if len < n * n {
            return Err(invalid(format!("buffer holds {len} entries, need {}", n * n)));
        }
        let re = std::slice::from_raw_parts_mut(re, n * n);
        let im = std::slice::from_raw_parts_mut(im, n * n);
        for i in 0..n {
            for j in 0..n {
                re[i * n + j] = m[(i, j)].re;
                im[i * n + j] = m[(i, j)].im;
            }
        }
        Ok(())
    })
}

fn to_verdict(v: Verdict) -> DsVerdict {
    match v {
        Verdict::Holds => DsVerdict::DsHolds,
        Verdict::Fails => DsVerdict::DsFails,
        Verdict::NotCertifiable => DsVerdict::DsNotCertifiable,
    }
}

/// Checks the smallness hypothesis of `theorem` for the constants `eps[0..5]`.
///
/// A NaN entry means "not supplied"; `INFINITY` is accepted.
///
/// # Safety
/// `theorem` must be a NUL-terminated string, `eps` must point to 5 doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_check_theorem(theorem: *const c_char, d: usize, m: f64, eps: *const f64, out: *mut DsCheckResult) -> DsStatus {
    guard(|| {
        let theorem: Theorem = read_str(theorem, "theorem")?.parse()?;
        non_null(eps, "eps")?;
        non_null(out, "out")?;
        let raw = std::slice::from_raw_parts(eps, 5);
        let values: [Option<f64>; 5] = std::array::from_fn(|i| (!raw[i].is_nan()).then_some(raw[i]));
        let report = hardy::check_theorem(&EpsilonBundle::supplied(values)?, d, m, theorem)?;
        *out = DsCheckResult { verdict: to_verdict(report.verdict), lhs: report.lhs, bound: report.bound, margin: report.margin };
        Ok(())
    })
}

/// Critical coupling of a named family under `theorem`. `method` may be null (automatic choice),
/// `"closed-form"` or `"bisection"`.
///
/// # Safety
/// `theorem` and `family` must be NUL-terminated strings, `method` null or NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_critical_coupling(theorem: *const c_char, family: *const c_char, d: usize, m: f64, method: *const c_char, out: *mut f64) -> DsStatus {
    guard(|| {
        let theorem: Theorem = read_str(theorem, "theorem")?.parse()?;
        let family = Family::named(read_str(family, "family")?, d, theorem)?;
        let method: Method = if method.is_null() { Method::Auto } else { read_str(method, "method")?.parse()? };
        non_null(out, "out")?;
        *out = hardy::critical_coupling(theorem, d, m, &family, method)?.value;
        Ok(())
    })
}

/// Closed-form Coulomb level for `ν < 0`, `|ν| < |κ|`, `m > 0`.
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_sommerfeld(nu: f64, kappa: i32, n_r: u32, m: f64, out: *mut f64) -> DsStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = radial3d::sommerfeld(nu, kappa, n_r, m)?;
        Ok(())
    })
}

/// Radial problem for `V = νI + μβ + iδβ(α·x/|x|)` in channel `κ`, on a staggered grid with `n` cells
/// over `[r_min, r_max]`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_radial_problem_new(
    nu: f64,
    mu: f64,
    delta: f64,
    m: f64,
    kappa: i32,
    r_min: f64,
    r_max: f64,
    n: usize,
    out: *mut *mut DsRadialProblem,
) -> DsStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = RadialProblem::new(nu, mu, delta, m, kappa, RadialGrid { r_min, r_max, n, staggered: true })?;
        *out = Box::into_raw(Box::new(DsRadialProblem(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`ds_radial_problem_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ds_radial_problem_free(p: *mut DsRadialProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Runs the grid- and domain-doubling study on `[lo, hi]`. Passing NaN for both bounds selects the
/// spectral gap (shrunk by a small margin), or `(-1, 1)` when `m = 0`.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_refinement_study(p: *const DsRadialProblem, lo: f64, hi: f64, out: *mut *mut DsSpectrum) -> DsStatus {
    guard(|| {
        non_null(p, "p")?;
        non_null(out, "out")?;
        let p = &(*p).0;
        let window = if lo.is_nan() && hi.is_nan() { p.gap_window() } else { (lo, hi) };
        let study = radial3d::refinement_study(p, window, &PersistenceCriteria::default(), &SolveOptions::default())?;
        *out = Box::into_raw(Box::new(DsSpectrum(study)));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from [`ds_refinement_study`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ds_spectrum_free(s: *mut DsSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of base-resolution eigenvalues in the study window.
///
/// # Safety
/// `s` must be a live handle and `len` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_spectrum_len(s: *const DsSpectrum, len: *mut usize) -> DsStatus {
    guard(|| {
        non_null(s, "s")?;
        non_null(len, "len")?;
        let study = &(*s).0;
        *len = study.verdicts.len();
        Ok(())
    })
}

/// Copies eigenvalue `i` (ascending order).
///
/// # Safety
/// `s` must be a live handle and `out` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_spectrum_get(s: *const DsSpectrum, i: usize, out: *mut DsEigenvalue) -> DsStatus {
    guard(|| {
        non_null(s, "s")?;
        non_null(out, "out")?;
        let study = &(*s).0;
        let v = study.verdicts.get(i).ok_or_else(|| invalid(format!("index {i} out of range")))?;
        *out = DsEigenvalue { lambda: v.lambda, residual: v.residual, localization: v.localization, persistent: v.persistent, in_gap: v.in_gap };
        Ok(())
    })
}

/// Serializes the whole study as JSON. Release the string with [`ds_string_free`].
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer to writable storage for one string pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_spectrum_to_json(s: *const DsSpectrum, out: *mut *mut c_char) -> DsStatus {
    guard(|| {
        non_null(s, "s")?;
        non_null(out, "out")?;
        let text = serde_json::to_string(&(*s).0).map_err(Error::from)?;
        *out = into_c_string(text)?;
        Ok(())
    })
}
