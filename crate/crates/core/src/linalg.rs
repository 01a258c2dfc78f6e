//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngExt};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);
pub const CI: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn require_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::SizeMismatch { left: m.nrows(), right: m.ncols() });
    }
    Ok(m.nrows())
}

/// Eigenvalues of a Hermitian matrix, sorted ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Maximum of `|P P* - I|` entrywise.
pub fn unitarity_deviation(p: &CMatrix) -> f64 {
    let n = p.nrows();
    max_abs_diff(&(p * p.adjoint()), &identity(n))
}

/// Haar-distributed random unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the phases so the distribution is Haar
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C1 };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniform random unit vector in ℝ^d.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform random real in `[lo, hi)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 4, 8] {
            let p = random_unitary(&mut rng, n);
            assert!(unitarity_deviation(&p) < 1e-13);
        }
    }

    #[test]
    fn eigenvalues_sorted() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        assert_eq!(hermitian_eigenvalues(&m), vec![-1.0, 3.0]);
    }
}
