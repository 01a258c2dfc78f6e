//! Dirac matrices in dimension `3 ≤ d ≤ 9` and the d=3 spin operators.
//!
//! The construction starts from the standard 4×4 Dirac representation at d=3
//! and doubles the spinor size every two dimensions:
//!
//! * odd `d → d+2`: `α'_j = σ₁⊗α_j`, `α'_{d+1} = σ₁⊗β`, `α'_{d+2} = σ₂⊗I`, `β' = σ₃⊗I`;
//! * even `d`: the `d−1` matrices plus `α_d = c·α₁⋯α_{d−1}β`, with the phase
//!   `c ∈ {1, i}` picked so that `α_d` is Hermitian.

use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::exact::{Dyadic, ExactMatrix};
use crate::linalg::{self, CMatrix};

pub const MIN_DIM: usize = 3;
pub const MAX_DIM: usize = 9;

/// Spinor size for spatial dimension `d`.
pub fn spinor_size(d: usize) -> usize {
    1 << d.div_ceil(2)
}

/// Exact Dirac matrices `α₁…α_d, β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiracRep {
    d: usize,
    alphas: Vec<ExactMatrix>,
    beta: ExactMatrix,
}

impl DiracRep {
    /// Builds the representation for `d` in `3..=9`. Same `d` always yields identical matrices.
    pub fn new(d: usize) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&d) {
            return Err(Error::DimensionOutOfRange { d, min: MIN_DIM, max: MAX_DIM });
        }
        let odd = if d % 2 == 1 { d } else { d - 1 };
        let mut rep = Self::base3();
        while rep.d < odd {
            rep = rep.double();
        }
        if d.is_multiple_of(2) {
            rep = rep.extend_even();
        }
        Ok(rep)
    }

    fn base3() -> Self {
        let s1 = ExactMatrix::pauli(1);
        let alphas = (1..=3).map(|j| s1.kron(&ExactMatrix::pauli(j))).collect();
        let beta = ExactMatrix::pauli(3).kron(&ExactMatrix::identity(2));
        DiracRep { d: 3, alphas, beta }
    }

    fn double(&self) -> Self {
        let n = self.spinor_size();
        let s1 = ExactMatrix::pauli(1);
        let mut alphas: Vec<ExactMatrix> = self.alphas.iter().map(|a| s1.kron(a)).collect();
        alphas.push(s1.kron(&self.beta));
        alphas.push(ExactMatrix::pauli(2).kron(&ExactMatrix::identity(n)));
        let beta = ExactMatrix::pauli(3).kron(&ExactMatrix::identity(n));
        DiracRep { d: self.d + 2, alphas, beta }
    }

    fn extend_even(&self) -> Self {
        let mut product = ExactMatrix::identity(self.spinor_size());
        for a in self.alphas.iter().chain(std::iter::once(&self.beta)) {
            product = product.checked_mul(a).expect("equal sizes");
        }
        let extra = if product.is_hermitian() { product } else { product.scale(Dyadic::I) };
        debug_assert!(extra.is_hermitian());
        let mut alphas = self.alphas.clone();
        alphas.push(extra);
        DiracRep { d: self.d + 1, alphas, beta: self.beta.clone() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn spinor_size(&self) -> usize {
        self.beta.size()
    }

    pub fn alphas(&self) -> &[ExactMatrix] {
        &self.alphas
    }

    pub fn alpha(&self, j: usize) -> &ExactMatrix {
        &self.alphas[j]
    }

    pub fn beta(&self) -> &ExactMatrix {
        &self.beta
    }

    /// Checks every Clifford relation, Hermiticity and unitarity with exact arithmetic.
    /// Returns the list of violated relations (empty when the representation is valid).
    pub fn verify(&self) -> Vec<String> {
        let n = self.spinor_size();
        let id = ExactMatrix::identity(n);
        let two_id = id.scale(Dyadic::from_int(2));
        let zero = ExactMatrix::zeros(n);
        let mut failures = Vec::new();
        for (j, aj) in self.alphas.iter().enumerate() {
            for (k, ak) in self.alphas.iter().enumerate().skip(j) {
                let expected = if j == k { &two_id } else { &zero };
                if &anticommutator(aj, ak).expect("equal sizes") != expected {
                    failures.push(format!("{{alpha_{}, alpha_{}}}", j + 1, k + 1));
                }
            }
            if !anticommutator(aj, &self.beta).expect("equal sizes").is_zero() {
                failures.push(format!("{{alpha_{}, beta}}", j + 1));
            }
        }
        if self.beta.checked_mul(&self.beta).expect("equal sizes") != id {
            failures.push("beta^2".into());
        }
        for (name, m) in self.named_matrices() {
            if !m.is_hermitian() {
                failures.push(format!("{name} not Hermitian"));
            }
            if m.checked_mul(&m.adjoint()).expect("equal sizes") != id {
                failures.push(format!("{name} not unitary"));
            }
        }
        failures
    }

    fn named_matrices(&self) -> Vec<(String, &ExactMatrix)> {
        let mut out: Vec<(String, &ExactMatrix)> =
            self.alphas.iter().enumerate().map(|(j, a)| (format!("alpha_{}", j + 1), a)).collect();
        out.push(("beta".into(), &self.beta));
        out
    }

    pub fn to_numeric(&self) -> NumericRep {
        NumericRep {
            d: self.d,
            alphas: self.alphas.iter().map(ExactMatrix::to_cmatrix).collect(),
            beta: self.beta.to_cmatrix(),
        }
    }

    /// `{"d", "N", "alphas": [...], "beta": ...}` with exact decimal entries.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "d": self.d,
            "N": self.spinor_size(),
            "alphas": self.alphas.iter().map(ExactMatrix::to_json).collect::<Vec<_>>(),
            "beta": self.beta.to_json(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let bad = |w: &str| Error::Parse(format!("representation JSON: {w}"));
        let d = value["d"].as_u64().ok_or_else(|| bad("missing d"))? as usize;
        let alphas = value["alphas"]
            .as_array()
            .ok_or_else(|| bad("missing alphas"))?
            .iter()
            .map(ExactMatrix::from_json)
            .collect::<Result<Vec<_>>>()?;
        let beta = ExactMatrix::from_json(&value["beta"])?;
        if alphas.len() != d {
            return Err(bad("number of alphas differs from d"));
        }
        Ok(DiracRep { d, alphas, beta })
    }
}

/// Floating-point copy of a representation, possibly conjugated by a unitary.
#[derive(Clone, Debug)]
pub struct NumericRep {
    pub d: usize,
    pub alphas: Vec<CMatrix>,
    pub beta: CMatrix,
}

impl NumericRep {
    pub fn spinor_size(&self) -> usize {
        self.beta.nrows()
    }

    /// Returns `P M P*` for every matrix; `P` must be unitary to 1e-12.
    pub fn conjugate(&self, p: &CMatrix) -> Result<NumericRep> {
        let n = linalg::require_square(p)?;
        if n != self.spinor_size() {
            return Err(Error::SizeMismatch { left: n, right: self.spinor_size() });
        }
        let deviation = linalg::unitarity_deviation(p);
        if deviation > 1e-12 {
            return Err(Error::NotUnitary { deviation, tolerance: 1e-12 });
        }
        let pa = p.adjoint();
        Ok(NumericRep {
            d: self.d,
            alphas: self.alphas.iter().map(|a| p * a * &pa).collect(),
            beta: p * &self.beta * &pa,
        })
    }

    /// Largest entrywise violation of the Clifford relations.
    pub fn clifford_defect(&self) -> f64 {
        let n = self.spinor_size();
        let id = linalg::identity(n);
        let mut worst: f64 = 0.0;
        for (j, aj) in self.alphas.iter().enumerate() {
            for (k, ak) in self.alphas.iter().enumerate() {
                let target = if j == k { &id * Complex64::from(2.0) } else { CMatrix::zeros(n, n) };
                worst = worst.max(linalg::max_abs_diff(&(aj * ak + ak * aj), &target));
            }
            worst = worst.max(linalg::max_abs(&(aj * &self.beta + &self.beta * aj)));
        }
        worst.max(linalg::max_abs_diff(&(&self.beta * &self.beta), &id))
    }

    /// `Σ_j v_j α_j`.
    pub fn alpha_dot(&self, v: &[f64]) -> CMatrix {
        let n = self.spinor_size();
        let mut out = CMatrix::zeros(n, n);
        for (a, &c) in self.alphas.iter().zip(v) {
            out += a * Complex64::from(c);
        }
        out
    }
}

/// Spin operators `S_j = ½ diag(σ_j, σ_j)` and the block swap `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinSet {
    pub s: [ExactMatrix; 3],
    pub t: ExactMatrix,
}

impl SpinSet {
    /// Returns the violated relations against `rep` (empty when all hold exactly).
    pub fn verify(&self, rep: &DiracRep) -> Vec<String> {
        let id = ExactMatrix::identity(4);
        let two = Dyadic::from_int(2);
        let mut failures = Vec::new();
        for j in 0..3 {
            let st = self.s[j].checked_mul(&self.t).expect("4x4").scale(two);
            let ts = self.t.checked_mul(&self.s[j]).expect("4x4").scale(two);
            if &st != rep.alpha(j) {
                failures.push(format!("2 S_{} T != alpha_{}", j + 1, j + 1));
            }
            if &ts != rep.alpha(j) {
                failures.push(format!("2 T S_{} != alpha_{}", j + 1, j + 1));
            }
            if !self.s[j].is_hermitian() {
                failures.push(format!("S_{} not Hermitian", j + 1));
            }
        }
        if !anticommutator(&self.t, rep.beta()).expect("4x4").is_zero() {
            failures.push("T beta != -beta T".into());
        }
        if self.t.checked_mul(&self.t).expect("4x4") != id {
            failures.push("T^2 != I".into());
        }
        if !self.t.is_hermitian() {
            failures.push("T not Hermitian".into());
        }
        failures
    }

    pub fn to_numeric(&self) -> ([CMatrix; 3], CMatrix) {
        (
            [self.s[0].to_cmatrix(), self.s[1].to_cmatrix(), self.s[2].to_cmatrix()],
            self.t.to_cmatrix(),
        )
    }
}

/// Spin operators and `T` for the d=3 representation.
pub fn spin_and_t(rep: &DiracRep) -> Result<SpinSet> {
    if rep.dim() != 3 {
        return Err(Error::Mismatch(format!("spin operators need d = 3, got d = {}", rep.dim())));
    }
    let half_id = ExactMatrix::identity(2).scale(Dyadic::HALF);
    let s = [1, 2, 3].map(|j| half_id.kron(&ExactMatrix::pauli(j)));
    let t = ExactMatrix::pauli(1).kron(&ExactMatrix::identity(2));
    Ok(SpinSet { s, t })
}

/// `M1 M2 + M2 M1` over exact entries.
pub fn anticommutator(m1: &ExactMatrix, m2: &ExactMatrix) -> Result<ExactMatrix> {
    m1.checked_mul(m2)?.checked_add(&m2.checked_mul(m1)?)
}

/// `M1 M2 + M2 M1` in floating point.
pub fn anticommutator_numeric(m1: &CMatrix, m2: &CMatrix) -> Result<CMatrix> {
    let a = linalg::require_square(m1)?;
    let b = linalg::require_square(m2)?;
    if a != b {
        return Err(Error::SizeMismatch { left: a, right: b });
    }
    Ok(m1 * m2 + m2 * m1)
}

/// Spectral norm of a Hermitian matrix (largest absolute eigenvalue).
///
/// Inputs whose Hermitian defect exceeds `1e-12·max(1, max|M_ij|)` are rejected.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    linalg::require_square(m)?;
    let scale = linalg::max_abs(m).max(1.0);
    let deviation = linalg::hermitian_deviation(m);
    let tolerance = 1e-12 * scale;
    if deviation > tolerance {
        return Err(Error::NotHermitian { deviation, tolerance });
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let herm = (m + m.adjoint()) * Complex64::from(0.5);
    Ok(herm.symmetric_eigenvalues().iter().map(|v| v.abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_follow_formula() {
        for d in MIN_DIM..=MAX_DIM {
            let rep = DiracRep::new(d).unwrap();
            assert_eq!(rep.spinor_size(), spinor_size(d));
            assert_eq!(rep.alphas().len(), d);
        }
        assert_eq!(spinor_size(3), 4);
        assert_eq!(spinor_size(5), 8);
    }

    #[test]
    fn out_of_range_dimensions_rejected() {
        assert!(matches!(DiracRep::new(2), Err(Error::DimensionOutOfRange { .. })));
        assert!(matches!(DiracRep::new(10), Err(Error::DimensionOutOfRange { .. })));
    }

    #[test]
    fn d3_is_standard_dirac() {
        let rep = DiracRep::new(3).unwrap();
        let o = Dyadic::ONE;
        let z = Dyadic::ZERO;
        let beta = ExactMatrix::from_rows(&[&[o, z, z, z], &[z, o, z, z], &[z, z, -o, z], &[z, z, z, -o]]);
        assert_eq!(rep.beta(), &beta);
        assert!(rep.verify().is_empty());
    }

    #[test]
    fn anticommutator_examples() {
        let rep = DiracRep::new(3).unwrap();
        let b = rep.beta();
        assert_eq!(anticommutator(b, b).unwrap(), ExactMatrix::identity(4).scale(Dyadic::from_int(2)));
        assert!(anticommutator(rep.alpha(0), rep.alpha(1)).unwrap().is_zero());
        assert!(anticommutator(b, rep.alpha(2)).unwrap().is_zero());
        let small = ExactMatrix::identity(2);
        assert!(matches!(anticommutator(&small, b), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn spin_set_relations() {
        let rep = DiracRep::new(3).unwrap();
        let spin = spin_and_t(&rep).unwrap();
        assert!(spin.verify(&rep).is_empty());
        assert!(spin_and_t(&DiracRep::new(4).unwrap()).is_err());
    }

    #[test]
    fn operator_norm_basics() {
        let rep = DiracRep::new(3).unwrap().to_numeric();
        assert!((operator_norm(&linalg::identity(4)).unwrap() - 1.0).abs() < 1e-15);
        assert!((operator_norm(&rep.beta).unwrap() - 1.0).abs() < 1e-15);
        let mut m = linalg::identity(2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(operator_norm(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn json_round_trip() {
        let rep = DiracRep::new(6).unwrap();
        let back = DiracRep::from_json(&rep.to_json()).unwrap();
        assert_eq!(rep, back);
    }
}
