//! Exact dyadic Gaussian numbers and small dense matrices over them.
//!
//! Every entry of the Dirac and spin matrices built in [`crate::clifford`] is of
//! the form `(a + i b) / 2^k` with integers `a`, `b`. Products and sums of such
//! numbers stay in the same set, so the Clifford relations can be checked with
//! zero tolerance.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// A number `(re + i im) / 2^shift`, kept in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Dyadic {
    re: i64,
    im: i64,
    shift: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { re: 0, im: 0, shift: 0 };
    pub const ONE: Dyadic = Dyadic { re: 1, im: 0, shift: 0 };
    pub const I: Dyadic = Dyadic { re: 0, im: 1, shift: 0 };
    pub const HALF: Dyadic = Dyadic { re: 1, im: 0, shift: 1 };

    pub fn new(re: i64, im: i64, shift: u32) -> Self {
        Dyadic { re, im, shift }.normalized()
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic { re: v, im: 0, shift: 0 }
    }

    fn normalized(mut self) -> Self {
        if self.re == 0 && self.im == 0 {
            return Self::ZERO;
        }
        while self.shift > 0 && self.re % 2 == 0 && self.im % 2 == 0 {
            self.re /= 2;
            self.im /= 2;
            self.shift -= 1;
        }
        self
    }

    fn aligned(self, shift: u32) -> (i64, i64) {
        let up = shift - self.shift;
        (self.re << up, self.im << up)
    }

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn conj(self) -> Self {
        Dyadic { im: -self.im, ..self }
    }

    pub fn to_complex(self) -> Complex64 {
        let scale = (-(self.shift as f64)).exp2();
        Complex64::new(self.re as f64 * scale, self.im as f64 * scale)
    }

    /// Numerators and the power-of-two denominator exponent.
    pub fn parts(self) -> (i64, i64, u32) {
        (self.re, self.im, self.shift)
    }

    /// Exact decimal rendering of `(re, im)`.
    pub fn decimal_parts(self) -> (String, String) {
        (dyadic_decimal(self.re, self.shift), dyadic_decimal(self.im, self.shift))
    }

    /// Parses the exact decimal pair produced by [`Dyadic::decimal_parts`].
    pub fn parse_decimal(re: &str, im: &str) -> Result<Self> {
        let (a, sa) = parse_dyadic_decimal(re)?;
        let (b, sb) = parse_dyadic_decimal(im)?;
        let shift = sa.max(sb);
        Ok(Dyadic::new(a << (shift - sa), b << (shift - sb), shift))
    }
}

fn dyadic_decimal(num: i64, shift: u32) -> String {
    if shift == 0 {
        return num.to_string();
    }
    // num / 2^k = num * 5^k / 10^k
    let scaled = (num as i128) * 5_i128.pow(shift);
    let neg = scaled < 0;
    let digits = scaled.unsigned_abs().to_string();
    let k = shift as usize;
    let padded = if digits.len() <= k {
        format!("{}{}", "0".repeat(k + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = padded.split_at(padded.len() - k);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

fn parse_dyadic_decimal(s: &str) -> Result<(i64, u32)> {
    let bad = || Error::Parse(format!("not an exact dyadic decimal: {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let k = frac_part.len() as u32;
    let all: i128 = format!("{int_part}{frac_part}").parse().map_err(|_| bad())?;
    // all / 10^k must equal m / 2^k, i.e. all divisible by 5^k
    let five = 5_i128.pow(k);
    if all % five != 0 {
        return Err(bad());
    }
    let m = i64::try_from(all / five).map_err(|_| bad())?;
    Ok((if neg { -m } else { m }, k))
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let shift = self.shift.max(rhs.shift);
        let (a, b) = self.aligned(shift);
        let (c, d) = rhs.aligned(shift);
        Dyadic::new(a + c, b + d, shift)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        self + (-rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { re: -self.re, im: -self.im, shift: self.shift }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        Dyadic::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
            self.shift + rhs.shift,
        )
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.decimal_parts();
        write!(f, "({re}, {im})")
    }
}

/// Row-major square matrix of [`Dyadic`] entries.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactMatrix {
    n: usize,
    data: Vec<Dyadic>,
}

impl ExactMatrix {
    pub fn zeros(n: usize) -> Self {
        ExactMatrix { n, data: vec![Dyadic::ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Dyadic::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[Dyadic]]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square matrix");
        ExactMatrix { n, data: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    /// Pauli matrices σ₁, σ₂, σ₃ (index 1..=3) and the 2×2 identity (index 0).
    pub fn pauli(index: usize) -> Self {
        let (o, z, i) = (Dyadic::ONE, Dyadic::ZERO, Dyadic::I);
        match index {
            0 => Self::from_rows(&[&[o, z], &[z, o]]),
            1 => Self::from_rows(&[&[z, o], &[o, z]]),
            2 => Self::from_rows(&[&[z, -i], &[i, z]]),
            3 => Self::from_rows(&[&[o, z], &[z, -o]]),
            _ => panic!("pauli index must be 0..=3"),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Dyadic {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Dyadic) {
        self.data[row * self.n + col] = v;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Dyadic]> {
        self.data.chunks(self.n)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn scale(&self, s: Dyadic) -> Self {
        ExactMatrix { n: self.n, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.adjoint()
    }

    pub fn kron(&self, other: &ExactMatrix) -> Self {
        let (n, m) = (self.n, other.n);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out.set(i * m + k, j * m + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn checked_mul(&self, rhs: &ExactMatrix) -> Result<Self> {
        self.same_size(rhs)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * n + j] = out.data[i * n + j] + a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, rhs: &ExactMatrix) -> Result<Self> {
        self.same_size(rhs)?;
        Ok(ExactMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, rhs: &ExactMatrix) -> Result<Self> {
        self.checked_add(&rhs.scale(-Dyadic::ONE))
    }

    fn same_size(&self, rhs: &ExactMatrix) -> Result<()> {
        if self.n != rhs.n {
            return Err(Error::SizeMismatch { left: self.n, right: rhs.n });
        }
        Ok(())
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |r, c| self.get(r, c).to_complex())
    }

    /// JSON array-of-arrays of `["re","im"]` exact decimal strings.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.rows()
                .map(|row| {
                    serde_json::Value::Array(
                        row.iter()
                            .map(|v| {
                                let (re, im) = v.decimal_parts();
                                serde_json::json!([re, im])
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("matrix JSON: {what}"));
        let rows = value.as_array().ok_or_else(|| bad("expected an array of rows"))?;
        let n = rows.len();
        let mut out = Self::zeros(n);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_array().filter(|a| a.len() == n).ok_or_else(|| bad("ragged row"))?;
            for (c, entry) in row.iter().enumerate() {
                let pair = entry
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| bad("entry is not a [re, im] pair"))?;
                let re = pair[0].as_str().ok_or_else(|| bad("re is not a string"))?;
                let im = pair[1].as_str().ok_or_else(|| bad("im is not a string"))?;
                out.set(r, c, Dyadic::parse_decimal(re, im)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_common_powers_of_two() {
        assert_eq!(Dyadic::new(2, 4, 1), Dyadic::new(1, 2, 0));
        assert_eq!(Dyadic::HALF + Dyadic::HALF, Dyadic::ONE);
        assert_eq!(Dyadic::I * Dyadic::I, -Dyadic::ONE);
        assert!(Dyadic::new(0, 0, 5) == Dyadic::ZERO);
    }

    #[test]
    fn decimal_rendering_is_exact() {
        assert_eq!(Dyadic::new(-1, 3, 2).decimal_parts(), ("-0.25".into(), "0.75".into()));
        assert_eq!(Dyadic::from_int(-7).decimal_parts(), ("-7".into(), "0".into()));
        let v = Dyadic::new(-5, 1, 3);
        let (re, im) = v.decimal_parts();
        assert_eq!(Dyadic::parse_decimal(&re, &im).unwrap(), v);
        assert!(Dyadic::parse_decimal("0.1", "0").is_err());
    }

    #[test]
    fn pauli_algebra() {
        let s1 = ExactMatrix::pauli(1);
        let s2 = ExactMatrix::pauli(2);
        let s3 = ExactMatrix::pauli(3);
        // σ₁σ₂ = iσ₃
        assert_eq!(s1.checked_mul(&s2).unwrap(), s3.scale(Dyadic::I));
        assert!(s2.is_hermitian());
        assert_eq!(s1.kron(&s3).size(), 4);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let a = ExactMatrix::identity(2);
        let b = ExactMatrix::identity(4);
        assert!(matches!(a.checked_mul(&b), Err(Error::SizeMismatch { .. })));
    }
}
