//! Eigenpairs of a radial matrix inside a spectral window.

use serde::{Deserialize, Serialize};

use super::problem::{RadialMatrix, GAP_MARGIN};
use crate::error::{Error, Result};

/// Which eigensolver to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    /// Sturm bisection for tridiagonal matrices, dense otherwise.
    #[default]
    Auto,
    /// Full dense symmetric eigendecomposition; limited to [`DENSE_LIMIT`] unknowns.
    Dense,
    /// Sturm-sequence bisection followed by inverse iteration; tridiagonal matrices only.
    Sturm,
}

/// Largest matrix the dense path accepts.
pub const DENSE_LIMIT: usize = 4096;

/// Residual bound relative to `‖H‖` below which an eigenpair is accepted.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: SolveMethod,
    pub keep_vectors: bool,
    /// Returns at most this many eigenpairs (the lowest in the window).
    pub count: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { method: SolveMethod::Auto, keep_vectors: false, count: None }
    }
}

/// Eigenpairs found in a window with their quality metadata.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub window: (f64, f64),
    /// Sorted ascending.
    pub eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    /// Eigenvalues with `|λ| < m − 1e-3·m`; empty when `m = 0`.
    pub in_gap: Vec<f64>,
    /// Fraction of each eigenvector's mass in `r < r_max/2`.
    pub localization: Vec<f64>,
    /// `‖Hv − λv‖/‖v‖`.
    pub residuals: Vec<f64>,
    /// Maximum absolute row sum of `H`.
    pub norm: f64,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(h: &RadialMatrix, v: &[f64]) -> (f64, f64) {
    let hv = h.h.matvec(v);
    let nv2: f64 = v.iter().map(|x| x * x).sum();
    let lambda = v.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>() / nv2;
    let r = hv.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt() / nv2.sqrt();
    (lambda, r)
}

fn localization(h: &RadialMatrix, v: &[f64]) -> f64 {
    let total: f64 = v.iter().map(|x| x * x).sum();
    let inner: f64 = v.iter().zip(&h.radii).filter(|(_, &r)| r < 0.5 * h.r_max).map(|(x, _)| x * x).sum();
    inner / total
}

/// Eigenpairs of `h` with eigenvalue in `[window.0, window.1)`.
pub fn solve(h: &RadialMatrix, window: (f64, f64), opts: &SolveOptions) -> Result<SpectrumResult> {
    let (lo, hi) = window;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidProblem(format!("empty or non-finite window ({lo}, {hi})")));
    }
    let method = match opts.method {
        SolveMethod::Auto if h.h.bandwidth() == 1 => SolveMethod::Sturm,
        SolveMethod::Auto => SolveMethod::Dense,
        m => m,
    };
    let pairs = match method {
        SolveMethod::Dense => dense_pairs(h, lo, hi)?,
        _ => sturm_pairs(h, lo, hi, opts.count)?,
    };
    let norm = h.h.norm_inf();
    let limit = opts.count.unwrap_or(usize::MAX);
    let mut out = SpectrumResult {
        window,
        eigenvalues: Vec::new(),
        eigenvectors: opts.keep_vectors.then(Vec::new),
        in_gap: Vec::new(),
        localization: Vec::new(),
        residuals: Vec::new(),
        norm,
    };
    for (lambda, v) in pairs.into_iter().take(limit) {
        let (_, res) = residual(h, &v);
        if !(res <= RESIDUAL_LIMIT * norm) {
            return Err(Error::NoConvergence(format!("residual {res:e} for eigenvalue {lambda} exceeds {:e}·‖H‖ (‖H‖ = {norm:e})", RESIDUAL_LIMIT)));
        }
        if h.m > 0.0 && lambda.abs() < h.m * (1.0 - GAP_MARGIN) {
            out.in_gap.push(lambda);
        }
        out.eigenvalues.push(lambda);
        out.localization.push(localization(h, &v));
        out.residuals.push(res);
        if let Some(vs) = out.eigenvectors.as_mut() {
            let n = norm2(&v);
            vs.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    Ok(out)
}

fn dense_pairs(h: &RadialMatrix, lo: f64, hi: f64) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = h.h.dim();
    if n > DENSE_LIMIT {
        return Err(Error::InvalidProblem(format!("dense path is limited to {DENSE_LIMIT} unknowns (got {n})")));
    }
    let eig = h.h.to_dense().symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<f64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l >= lo && l < hi)
        .map(|(j, &l)| (l, eig.eigenvectors.column(j).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

/// Deterministic start vector with no special structure.
fn start_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract()).collect()
}

fn sturm_pairs(h: &RadialMatrix, lo: f64, hi: f64, count: Option<usize>) -> Result<Vec<(f64, Vec<f64>)>> {
    let m = &h.h;
    let (glo, ghi) = m.gershgorin();
    let lo_c = lo.max(glo - 1.0);
    let hi_c = hi.min(ghi + 1.0);
    if lo_c >= hi_c {
        return Ok(Vec::new());
    }
    let first = m.count_below(lo_c)?;
    let last = m.count_below(hi_c)?;
    let last = count.map_or(last, |c| last.min(first + c));
    let mut pairs = Vec::with_capacity(last - first);
    let mut bracket_lo = lo_c;
    for k in first..last {
        // Bisection for the k-th eigenvalue (0-based, ascending).
        let (mut a, mut b) = (bracket_lo, hi_c);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b || b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
                break;
            }
            if m.count_below(mid)? > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        bracket_lo = a;
        let shift = 0.5 * (a + b);
        pairs.push(inverse_iteration(h, shift, k)?);
    }
    Ok(pairs)
}

fn inverse_iteration(h: &RadialMatrix, shift: f64, k: usize) -> Result<(f64, Vec<f64>)> {
    let norm = h.h.norm_inf();
    let mut v = start_vector(h.h.dim());
    let mut best = (f64::NAN, f64::INFINITY);
    for _ in 0..8 {
        let mut w = h.h.shifted_solve(shift, &v)?;
        let n = norm2(&w);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NoConvergence(format!("inverse iteration broke down for eigenvalue #{k} near {shift}")));
        }
        w.iter_mut().for_each(|x| *x /= n);
        v = w;
        let (lambda, r) = residual(h, &v);
        best = (lambda, r);
        if r <= 1e-3 * RESIDUAL_LIMIT * norm {
            break;
        }
    }
    if !(best.1 <= RESIDUAL_LIMIT * norm) {
        return Err(Error::NoConvergence(format!("inverse iteration for eigenvalue #{k} near {shift} stalled at residual {:e}", best.1)));
    }
    Ok((best.0, v))
}

#[cfg(test)]
mod tests {
    use super::super::problem::{assemble, RadialGrid, RadialProblem};
    use super::*;

    fn problem(nu: f64, m: f64, kappa: i32, n: usize) -> RadialProblem {
        RadialProblem::new(nu, 0.0, 0.0, m, kappa, RadialGrid { r_min: 1e-4, r_max: 60.0, n, staggered: true }).unwrap()
    }

    #[test]
    fn dense_and_sturm_paths_agree() {
        let h = assemble(&problem(-0.5, 1.0, -1, 256)).unwrap();
        let w = (-3.0, 3.0);
        let d = solve(&h, w, &SolveOptions { method: SolveMethod::Dense, ..Default::default() }).unwrap();
        let s = solve(&h, w, &SolveOptions { method: SolveMethod::Sturm, ..Default::default() }).unwrap();
        assert_eq!(d.len(), s.len());
        for (a, b) in d.eigenvalues.iter().zip(&s.eigenvalues) {
            assert!((a - b).abs() < 1e-9 * d.norm, "{a} vs {b}");
        }
    }

    #[test]
    fn residuals_are_small() {
        let h = assemble(&problem(-0.5, 1.0, -1, 512)).unwrap();
        let s = solve(&h, (-0.999, 0.999), &SolveOptions::default()).unwrap();
        assert!(!s.is_empty());
        assert!(s.residuals.iter().all(|r| *r <= RESIDUAL_LIMIT * s.norm));
        assert_eq!(s.in_gap.len(), s.len());
    }

    #[test]
    fn count_limits_output() {
        let h = assemble(&problem(-0.5, 1.0, -1, 256)).unwrap();
        let s = solve(&h, (-0.999, 0.999), &SolveOptions { count: Some(1), keep_vectors: true, ..Default::default() }).unwrap();
        assert_eq!(s.len(), 1);
        let v = &s.eigenvectors.as_ref().unwrap()[0];
        assert!((norm2(v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_window_is_rejected() {
        let h = assemble(&problem(0.0, 1.0, 1, 64)).unwrap();
        assert!(solve(&h, (0.5, 0.5), &SolveOptions::default()).is_err());
    }

    #[test]
    fn free_massive_operator_has_no_localized_gap_states() {
        let h = assemble(&problem(0.0, 1.0, -1, 512)).unwrap();
        let s = solve(&h, (-0.99, 0.99), &SolveOptions::default()).unwrap();
        assert!(s.is_empty(), "{:?}", s.eigenvalues);
    }
}
