//! Real symmetric banded matrices, stored by diagonals.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `bands[k][i] = H[i, i + k]` for `k = 0..=bandwidth`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedSymmetric {
    bands: Vec<Vec<f64>>,
}

impl BandedSymmetric {
    /// Builds from the main diagonal and the upper diagonals; band `k` must have `dim − k` entries.
    pub fn from_bands(bands: Vec<Vec<f64>>) -> Self {
        let dim = bands[0].len();
        for (k, b) in bands.iter().enumerate() {
            assert_eq!(b.len(), dim - k, "band {k} has the wrong length");
        }
        BandedSymmetric { bands }
    }

    pub fn dim(&self) -> usize {
        self.bands[0].len()
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn band(&self, k: usize) -> &[f64] {
        &self.bands[k]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let k = b - a;
        if k > self.bandwidth() {
            0.0
        } else {
            self.bands[k][a]
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = (0..n).map(|i| self.bands[0][i] * x[i]).collect();
        for (k, band) in self.bands.iter().enumerate().skip(1) {
            for (i, &v) in band.iter().enumerate() {
                y[i] += v * x[i + k];
                y[i + k] += v * x[i];
            }
        }
        y
    }

    /// Maximum absolute row sum, an upper bound for the spectral norm.
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        let mut rows: Vec<f64> = self.bands[0].iter().map(|v| v.abs()).collect();
        for (k, band) in self.bands.iter().enumerate().skip(1) {
            for (i, &v) in band.iter().enumerate() {
                rows[i] += v.abs();
                rows[i + k] += v.abs();
            }
        }
        debug_assert_eq!(rows.len(), n);
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.dim()];
        for (k, band) in self.bands.iter().enumerate().skip(1) {
            for (i, &v) in band.iter().enumerate() {
                radius[i] += v.abs();
                radius[i + k] += v.abs();
            }
        }
        self.bands[0].iter().zip(&radius).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&d, &r)| (lo.min(d - r), hi.max(d + r)))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let w = self.bandwidth();
        DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) <= w { self.get(i, j) } else { 0.0 })
    }

    fn require_tridiagonal(&self) -> Result<()> {
        if self.bandwidth() != 1 {
            return Err(Error::InvalidProblem(format!("the iterative path needs a tridiagonal matrix (bandwidth {})", self.bandwidth())));
        }
        Ok(())
    }

    /// Number of eigenvalues strictly below `sigma`, by the Sturm sequence of the `LDLᵀ` factors of
    /// `H − σI`. Only defined for tridiagonal matrices.
    pub fn count_below(&self, sigma: f64) -> Result<usize> {
        self.require_tridiagonal()?;
        let d = &self.bands[0];
        let e = &self.bands[1];
        let tiny = f64::MIN_POSITIVE.sqrt() * self.norm_inf().max(1.0);
        let mut count = 0;
        let mut q = d[0] - sigma;
        for i in 0..d.len() {
            if i > 0 {
                q = d[i] - sigma - e[i - 1] * e[i - 1] / q;
            }
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Solves `(H − σI)x = b` for tridiagonal `H` by Gaussian elimination with partial pivoting.
    /// Exactly singular pivots are replaced by a tiny value, as inverse iteration requires.
    pub fn shifted_solve(&self, sigma: f64, b: &[f64]) -> Result<Vec<f64>> {
        self.require_tridiagonal()?;
        let n = self.dim();
        let tiny = f64::EPSILON * self.norm_inf().max(1.0);
        // Row i of U holds u0 (diagonal), u1, u2 (second superdiagonal created by pivoting).
        let mut u0: Vec<f64> = self.bands[0].iter().map(|v| v - sigma).collect();
        let mut u1: Vec<f64> = self.bands[1].clone();
        u1.push(0.0);
        let mut u2 = vec![0.0; n];
        let mut lower = self.bands[1].clone();
        lower.push(0.0);
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            // Rows i and i + 1 hold (u0[i], u1[i], u2[i]) and (lower[i], u0[i+1], u1[i+1]).
            if lower[i].abs() > u0[i].abs() {
                let f = u0[i] / lower[i];
                let (a1, a2) = (u1[i], u2[i]);
                u0[i] = lower[i];
                u1[i] = u0[i + 1];
                u2[i] = u1[i + 1];
                u0[i + 1] = a1 - f * u1[i];
                u1[i + 1] = a2 - f * u2[i];
                x.swap(i, i + 1);
                x[i + 1] -= f * x[i];
            } else {
                if u0[i] == 0.0 {
                    u0[i] = tiny;
                }
                let f = lower[i] / u0[i];
                u0[i + 1] -= f * u1[i];
                u1[i + 1] -= f * u2[i];
                x[i + 1] -= f * x[i];
            }
            lower[i] = 0.0;
        }
        if u0[n - 1] == 0.0 {
            u0[n - 1] = tiny;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * x[i + 2];
            }
            x[i] = s / u0[i];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BandedSymmetric {
        BandedSymmetric::from_bands(vec![vec![2.0, -1.0, 0.5, 3.0, 0.0], vec![1.0, 0.3, -2.0, 0.7]])
    }

    #[test]
    fn dense_roundtrip_and_matvec() {
        let h = sample();
        let dense = h.to_dense();
        assert_eq!(dense, dense.transpose());
        let x = [1.0, -2.0, 0.5, 0.25, 3.0];
        let y = h.matvec(&x);
        let yd = &dense * nalgebra::DVector::from_column_slice(&x);
        for i in 0..5 {
            assert!((y[i] - yd[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn sturm_count_matches_dense_eigenvalues() {
        let h = sample();
        let ev = h.to_dense().symmetric_eigenvalues();
        for sigma in [-5.0, -1.3, 0.0, 0.9, 2.2, 10.0] {
            let expect = ev.iter().filter(|&&l| l < sigma).count();
            assert_eq!(h.count_below(sigma).unwrap(), expect, "sigma = {sigma}");
        }
    }

    #[test]
    fn shifted_solve_inverts() {
        let h = sample();
        let b = [1.0, 0.0, -1.0, 2.0, 0.5];
        for sigma in [0.0, 0.4, -2.5] {
            let x = h.shifted_solve(sigma, &b).unwrap();
            let hx = h.matvec(&x);
            for i in 0..5 {
                assert!((hx[i] - sigma * x[i] - b[i]).abs() < 1e-12, "sigma = {sigma}");
            }
        }
    }

    #[test]
    fn gershgorin_contains_spectrum() {
        let h = sample();
        let (lo, hi) = h.gershgorin();
        for l in h.to_dense().symmetric_eigenvalues().iter() {
            assert!(*l >= lo && *l <= hi);
        }
    }
}
