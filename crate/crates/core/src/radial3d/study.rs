//! Refinement studies, CSV rows, sweeps and the conjugation-invariance check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::banded::BandedSymmetric;
use super::problem::{assemble, RadialProblem};
use super::solve::{solve, SolveOptions, SpectrumResult};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Thresholds that decide whether an eigenvalue is persistent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceCriteria {
    /// Largest relative drift allowed under grid doubling and under domain doubling.
    pub drift: f64,
    /// Smallest fraction of mass in `r < r_max/2`, required on both domains.
    pub localization: f64,
}

impl Default for PersistenceCriteria {
    fn default() -> Self {
        PersistenceCriteria { drift: 1e-4, localization: 0.99 }
    }
}

/// Fate of one base-resolution eigenvalue under refinement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RefinementVerdict {
    pub lambda: f64,
    pub residual: f64,
    /// Relative change to the nearest eigenvalue at `2n` (same `r_max`).
    pub drift_grid: Option<f64>,
    /// Relative change to the nearest eigenvalue at `2·r_max` (same `n`).
    pub drift_domain: Option<f64>,
    pub localization: f64,
    /// Localization of the partner on the doubled domain.
    pub localization_domain: Option<f64>,
    pub stable: bool,
    pub localized: bool,
    pub persistent: bool,
    pub in_gap: bool,
}

/// Solves at `(n, r_max)`, `(2n, r_max)` and `(n, 2r_max)` and classifies every base eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementStudy {
    pub problem: RadialProblem,
    pub window: (f64, f64),
    pub criteria: PersistenceCriteria,
    pub verdicts: Vec<RefinementVerdict>,
}

impl RefinementStudy {
    pub fn persistent(&self) -> impl Iterator<Item = &RefinementVerdict> {
        self.verdicts.iter().filter(|v| v.persistent)
    }

    pub fn persistent_in_gap(&self) -> Vec<f64> {
        self.verdicts.iter().filter(|v| v.persistent && v.in_gap).map(|v| v.lambda).collect()
    }
}

fn nearest(target: f64, spectrum: &SpectrumResult) -> Option<(f64, f64)> {
    spectrum
        .eigenvalues
        .iter()
        .zip(&spectrum.localization)
        .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()))
        .map(|(l, loc)| (*l, *loc))
}

fn rel_drift(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(f64::MIN_POSITIVE)
}

pub fn refinement_study(p: &RadialProblem, window: (f64, f64), criteria: &PersistenceCriteria, opts: &SolveOptions) -> Result<RefinementStudy> {
    p.validate()?;
    let fine = p.with_grid(p.grid.with_n(2 * p.grid.n))?;
    let wide = p.with_grid(p.grid.with_r_max(2.0 * p.grid.r_max))?;
    let opts = SolveOptions { keep_vectors: false, count: None, ..*opts };
    let run = |q: &RadialProblem| -> Result<SpectrumResult> { solve(&assemble(q)?, window, &opts) };
    let (base, (fine_s, wide_s)) = rayon::join(|| run(p), || rayon::join(|| run(&fine), || run(&wide)));
    let (base, fine_s, wide_s) = (base?, fine_s?, wide_s?);
    let gap = p.m * (1.0 - super::problem::GAP_MARGIN);
    let verdicts = base
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let g = nearest(lambda, &fine_s);
            let w = nearest(lambda, &wide_s);
            let drift_grid = g.map(|(l, _)| rel_drift(lambda, l));
            let drift_domain = w.map(|(l, _)| rel_drift(lambda, l));
            let localization = base.localization[i];
            let localization_domain = w.map(|(_, loc)| loc);
            let stable = matches!((drift_grid, drift_domain), (Some(a), Some(b)) if a <= criteria.drift && b <= criteria.drift);
            let localized = localization >= criteria.localization && localization_domain.is_some_and(|l| l >= criteria.localization);
            RefinementVerdict {
                lambda,
                residual: base.residuals[i],
                drift_grid,
                drift_domain,
                localization,
                localization_domain,
                stable,
                localized,
                persistent: stable && localized,
                in_gap: p.m > 0.0 && lambda.abs() < gap,
            }
        })
        .collect();
    Ok(RefinementStudy { problem: *p, window, criteria: *criteria, verdicts })
}

/// Runs independent refinement studies concurrently on the current rayon pool.
pub fn sweep(jobs: &[(RadialProblem, (f64, f64))], criteria: &PersistenceCriteria, opts: &SolveOptions) -> Vec<Result<RefinementStudy>> {
    jobs.par_iter().map(|(p, w)| refinement_study(p, *w, criteria, opts)).collect()
}

/// One CSV line of spectrum output.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub kappa: i32,
    pub nu: f64,
    pub mu: f64,
    pub delta: f64,
    pub m: f64,
    pub n: usize,
    pub r_max: f64,
    pub lambda: f64,
    pub residual: f64,
    pub localization: f64,
    pub persistent: bool,
}

impl RefinementStudy {
    pub fn rows(&self) -> Vec<SpectrumRow> {
        let p = &self.problem;
        self.verdicts
            .iter()
            .map(|v| SpectrumRow {
                kappa: p.kappa,
                nu: p.nu,
                mu: p.mu,
                delta: p.delta,
                m: p.m,
                n: p.grid.n,
                r_max: p.grid.r_max,
                lambda: v.lambda,
                residual: v.residual,
                localization: v.localization,
                persistent: v.persistent,
            })
            .collect()
    }
}

/// Writes rows with the header `kappa,nu,mu,delta,m,n,r_max,lambda,residual,localization,persistent`.
pub fn write_csv<W: std::io::Write>(rows: &[SpectrumRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["kappa", "nu", "mu", "delta", "m", "n", "r_max", "lambda", "residual", "localization", "persistent"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Tolerance on `‖PP* − I‖` for conjugation checks.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

/// Largest change of the sorted eigenvalues of `H` under `H ↦ PHP*`.
pub fn conjugation_invariance_check(h: &BandedSymmetric, p: &CMatrix) -> Result<f64> {
    let n = h.dim();
    if p.nrows() != n || p.ncols() != n {
        return Err(Error::SizeMismatch { left: p.nrows(), right: n });
    }
    let dev = linalg::unitarity_deviation(p);
    if !(dev <= UNITARY_TOLERANCE) {
        return Err(Error::NotUnitary { deviation: dev, tolerance: UNITARY_TOLERANCE });
    }
    let dense = h.to_dense();
    let hc: CMatrix = dense.map(|v| Complex64::new(v, 0.0));
    let mut conj = p * hc * p.adjoint();
    // Remove the rounding-level anti-Hermitian part before the Hermitian eigensolver sees it.
    conj = (&conj + conj.adjoint()) * Complex64::new(0.5, 0.0);
    let mut before: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
    before.sort_by(f64::total_cmp);
    let after = linalg::hermitian_eigenvalues(&conj);
    Ok(before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Block-diagonal `I_n ⊗ U` for a 2×2 unitary `U` acting on each (upper, lower) pair of unknowns.
pub fn block_unitary(u: &CMatrix, blocks: usize) -> CMatrix {
    let mut p = CMatrix::zeros(2 * blocks, 2 * blocks);
    for b in 0..blocks {
        for i in 0..2 {
            for j in 0..2 {
                p[(2 * b + i, 2 * b + j)] = u[(i, j)];
            }
        }
    }
    p
}

/// Exchanges the two components at every node.
pub fn component_swap(blocks: usize) -> CMatrix {
    let sx = DMatrix::from_row_slice(2, 2, &[linalg::C0, linalg::C1, linalg::C1, linalg::C0]);
    block_unitary(&sx, blocks)
}

#[cfg(test)]
mod tests {
    use super::super::problem::RadialGrid;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small(nu: f64, mu: f64, delta: f64, m: f64, kappa: i32) -> RadialProblem {
        RadialProblem::new(nu, mu, delta, m, kappa, RadialGrid { r_min: 1e-2, r_max: 20.0, n: 64, staggered: true }).unwrap()
    }

    #[test]
    fn conjugations_preserve_the_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = assemble(&small(-0.4, 0.1, 0.2, 1.0, -1)).unwrap().h;
        let n = h.dim();
        assert_eq!(conjugation_invariance_check(&h, &linalg::identity(n)).unwrap(), 0.0);
        let dense = linalg::random_unitary(&mut rng, n);
        assert!(conjugation_invariance_check(&h, &dense).unwrap() <= 1e-10);
        let block = block_unitary(&linalg::random_unitary(&mut rng, 2), n / 2);
        assert!(conjugation_invariance_check(&h, &block).unwrap() <= 1e-10);
        assert!(conjugation_invariance_check(&h, &component_swap(n / 2)).unwrap() <= 1e-10);
    }

    #[test]
    fn non_unitary_conjugation_is_rejected() {
        let h = assemble(&small(0.0, 0.0, 0.0, 1.0, 1)).unwrap().h;
        let p = linalg::identity(h.dim()) * Complex64::new(1.0 + 1e-9, 0.0);
        assert!(matches!(conjugation_invariance_check(&h, &p), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn csv_header_and_rows() {
        let study = RefinementStudy {
            problem: small(-0.5, 0.0, 0.0, 1.0, -1),
            window: (-0.999, 0.999),
            criteria: PersistenceCriteria::default(),
            verdicts: vec![RefinementVerdict {
                lambda: 0.866,
                residual: 1e-12,
                drift_grid: Some(1e-6),
                drift_domain: Some(0.0),
                localization: 1.0,
                localization_domain: Some(1.0),
                stable: true,
                localized: true,
                persistent: true,
                in_gap: true,
            }],
        };
        let mut buf = Vec::new();
        write_csv(&study.rows(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "kappa,nu,mu,delta,m,n,r_max,lambda,residual,localization,persistent");
        assert!(lines.next().unwrap().starts_with("-1,-0.5,0.0,0.0,1.0,64,20.0,0.866,"));
        let mut empty = Vec::new();
        write_csv(&[], &mut empty).unwrap();
        assert!(String::from_utf8(empty).unwrap().starts_with("kappa,nu"));
    }
}
