//! Potential and magnetic-field families.
//!
//! Potentials are Hermitian-matrix valued functions on ℝ^d \ {0}; magnetic
//! potentials are real vector fields whose curl `B_jk = ∂_jA_k − ∂_kA_j` is
//! returned as an antisymmetric matrix. Each family also reports the
//! suprema of the radial weights the smallness hypotheses are built from.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::clifford::{self, NumericRep};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CI};

/// Relative finite-difference step used for sampled data.
pub const FD_STEP: f64 = 1e-5;
/// Radial scan density for grid suprema (points per decade).
pub const SCAN_PER_DECADE: usize = 1000;
/// Radial scan range for grid suprema.
pub const SCAN_RANGE: (f64, f64) = (1e-6, 1e6);
/// Largest spacing in `ln r` a sampled profile may have where it is differentiated.
pub const MAX_LOG_SPACING: f64 = 0.05;
/// Largest lattice spacing relative to `|x|` for differencing custom lattice data.
pub const MAX_LATTICE_SPACING: f64 = 0.05;

/// How a number was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    GridEstimate,
    UserSupplied,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn require_nonzero(x: &[f64]) -> Result<f64> {
    let r = norm(x);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::Singularity { norm: r });
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Radial profiles

/// Natural cubic spline of `value` against `t = ln r`.
#[derive(Clone, Debug)]
pub struct SampledProfile {
    t: Vec<f64>,
    v: Vec<f64>,
    m: Vec<f64>,
}

impl SampledProfile {
    /// Requires at least 4 samples with strictly increasing positive radii.
    pub fn new(r: &[f64], v: &[f64]) -> Result<Self> {
        if r.len() != v.len() {
            return Err(Error::SizeMismatch { left: r.len(), right: v.len() });
        }
        if r.len() < 4 {
            return Err(Error::InvalidProblem("sampled profile needs at least 4 samples".into()));
        }
        if r[0] <= 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProblem("sampled radii must be positive and strictly increasing".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidProblem("sampled values must be finite".into()));
        }
        let t: Vec<f64> = r.iter().map(|x| x.ln()).collect();
        let m = natural_spline_moments(&t, v);
        Ok(SampledProfile { t, v: v.to_vec(), m })
    }

    /// Reads a two-column CSV with header `r,value`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let (ir, iv) = (column(&headers, "r")?, column(&headers, "value")?);
        let (mut r, mut v) = (Vec::new(), Vec::new());
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            r.push(parse_cell(&rec, ir, line + 2)?);
            v.push(parse_cell(&rec, iv, line + 2)?);
        }
        Self::new(&r, &v)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.t[0].exp(), self.t[self.t.len() - 1].exp())
    }

    fn locate(&self, r: f64) -> Result<(usize, f64)> {
        let (lo, hi) = self.range();
        if !(r >= lo && r <= hi) {
            return Err(Error::OutsideSamples { radius: r, lo, hi });
        }
        let t = r.ln();
        let i = match self.t.partition_point(|&s| s <= t) {
            0 => 0,
            k => (k - 1).min(self.t.len() - 2),
        };
        Ok((i, t))
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        let (i, t) = self.locate(r)?;
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - t) / h;
        let b = (t - self.t[i]) / h;
        Ok(a * self.v[i]
            + b * self.v[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0)
    }

    /// Central difference with step `FD_STEP·r`; rejects sparse regions.
    pub fn derivative(&self, r: f64) -> Result<f64> {
        let (i, _) = self.locate(r)?;
        let spacing = self.t[i + 1] - self.t[i];
        if spacing > MAX_LOG_SPACING {
            return Err(Error::SparseSamples { radius: r, spacing, limit: MAX_LOG_SPACING });
        }
        let h = FD_STEP * r;
        let (lo, hi) = self.range();
        let (a, b) = ((r - h).max(lo), (r + h).min(hi));
        Ok((self.value(b)? - self.value(a)?) / (b - a))
    }
}

fn natural_spline_moments(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm for interior moments.
    let k = n - 2;
    let (mut diag, mut upper, mut rhs) = (vec![0.0; k], vec![0.0; k], vec![0.0; k]);
    for i in 1..n - 1 {
        let h0 = t[i] - t[i - 1];
        let h1 = t[i + 1] - t[i];
        diag[i - 1] = (h0 + h1) / 3.0;
        upper[i - 1] = h1 / 6.0;
        rhs[i - 1] = (v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0;
    }
    for i in 1..k {
        let lower = (t[i + 1] - t[i]) / 6.0;
        let w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut x = vec![0.0; k];
    x[k - 1] = rhs[k - 1] / diag[k - 1];
    for i in (0..k - 1).rev() {
        x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    }
    m[1..n - 1].copy_from_slice(&x);
    m
}

/// Scalar radial profile `v(r)`.
#[derive(Clone, Debug)]
pub enum RadialProfile {
    /// `c·r^{−σ}` with `σ ≥ 0`.
    PowerLaw { c: f64, sigma: f64 },
    Sampled(SampledProfile),
}

impl RadialProfile {
    pub fn power_law(c: f64, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !c.is_finite() || !sigma.is_finite() {
            return Err(Error::InvalidProblem(format!("power law needs finite c and sigma >= 0 (sigma = {sigma})")));
        }
        Ok(RadialProfile::PowerLaw { c, sigma })
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, RadialProfile::Sampled(_))
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        match self {
            RadialProfile::PowerLaw { c, sigma } => Ok(c * r.powf(-sigma)),
            RadialProfile::Sampled(s) => s.value(r),
        }
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        match self {
            RadialProfile::PowerLaw { c, sigma } => Ok(-sigma * c * r.powf(-sigma - 1.0)),
            RadialProfile::Sampled(s) => s.derivative(r),
        }
    }

    /// Radii at which a grid supremum of a sampled profile is taken.
    fn scan_radii(&self) -> Vec<f64> {
        let (mut lo, mut hi) = SCAN_RANGE;
        if let RadialProfile::Sampled(s) = self {
            let (a, b) = s.range();
            lo = lo.max(a);
            hi = hi.min(b);
        }
        log_radii(lo, hi)
    }
}

/// Logarithmic grid with `SCAN_PER_DECADE` points per decade, endpoints included.
pub fn log_radii(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let decades = (hi / lo).log10();
    let n = ((decades * SCAN_PER_DECADE as f64).ceil() as usize).max(1);
    (0..=n).map(|i| lo * 10f64.powf(decades * i as f64 / n as f64)).collect()
}

// ---------------------------------------------------------------------------
// Custom lattice data (d = 3)

/// Regular 3D lattice used for custom sampled fields.
#[derive(Clone, Debug)]
pub struct Lattice {
    origin: [f64; 3],
    spacing: [f64; 3],
    dims: [usize; 3],
}

impl Lattice {
    fn from_points(points: &[[f64; 3]]) -> Result<Self> {
        let mut origin = [0.0; 3];
        let mut spacing = [0.0; 3];
        let mut dims = [0usize; 3];
        for a in 0..3 {
            let mut c: Vec<f64> = points.iter().map(|p| p[a]).collect();
            c.sort_by(f64::total_cmp);
            c.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
            if c.len() < 2 {
                return Err(Error::InvalidProblem("custom lattice needs at least 2 nodes per axis".into()));
            }
            let h = (c[c.len() - 1] - c[0]) / (c.len() - 1) as f64;
            if c.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
                return Err(Error::InvalidProblem("custom lattice must be uniformly spaced".into()));
            }
            origin[a] = c[0];
            spacing[a] = h;
            dims[a] = c.len();
        }
        if dims.iter().product::<usize>() != points.len() {
            return Err(Error::InvalidProblem(format!(
                "custom lattice has {} distinct points, expected {}",
                points.len(),
                dims.iter().product::<usize>()
            )));
        }
        Ok(Lattice { origin, spacing, dims })
    }

    fn index_of(&self, p: &[f64; 3]) -> usize {
        let mut idx = [0usize; 3];
        for a in 0..3 {
            idx[a] = ((p[a] - self.origin[a]) / self.spacing[a]).round() as usize;
        }
        (idx[0] * self.dims[1] + idx[1]) * self.dims[2] + idx[2]
    }

    fn node(&self, flat: usize) -> [f64; 3] {
        let k = flat % self.dims[2];
        let j = (flat / self.dims[2]) % self.dims[1];
        let i = flat / (self.dims[1] * self.dims[2]);
        [
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
            self.origin[2] + k as f64 * self.spacing[2],
        ]
    }

    fn len(&self) -> usize {
        self.dims.iter().product()
    }

    /// Trilinear weights `(flat index, weight)` for `x`.
    fn weights(&self, x: &[f64]) -> Result<Vec<(usize, f64)>> {
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let s = (x[a] - self.origin[a]) / self.spacing[a];
            let max = (self.dims[a] - 1) as f64;
            if !(s >= -1e-12 && s <= max + 1e-12) {
                let hi = self.origin[a] + max * self.spacing[a];
                return Err(Error::OutsideSamples { radius: x[a], lo: self.origin[a], hi });
            }
            let s = s.clamp(0.0, max);
            let i = (s.floor() as usize).min(self.dims[a] - 2);
            base[a] = i;
            frac[a] = s - i as f64;
        }
        let mut out = Vec::with_capacity(8);
        for c in 0..8 {
            let bits = [c >> 2 & 1, c >> 1 & 1, c & 1];
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            for a in 0..3 {
                idx[a] = base[a] + bits[a];
                w *= if bits[a] == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            out.push(((idx[0] * self.dims[1] + idx[1]) * self.dims[2] + idx[2], w));
        }
        Ok(out)
    }

    fn check_spacing(&self, x: &[f64]) -> Result<()> {
        let r = norm(x);
        let spacing = self.spacing.iter().copied().fold(0.0, f64::max);
        let limit = MAX_LATTICE_SPACING * r;
        if spacing > limit {
            return Err(Error::SparseSamples { radius: r, spacing, limit });
        }
        Ok(())
    }
}

/// Matrix-valued field sampled on a lattice (d = 3), trilinearly interpolated.
#[derive(Clone, Debug)]
pub struct LatticeMatrixField {
    lattice: Lattice,
    n: usize,
    values: Vec<CMatrix>,
}

impl LatticeMatrixField {
    /// Long-format CSV with header `x,y,z,row,col,re,im`; every node must carry all `N×N` entries.
    pub fn from_csv(path: &Path, n: usize) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let cols: Vec<usize> = ["x", "y", "z", "row", "col", "re", "im"]
            .iter()
            .map(|c| column(&headers, c))
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            let f: Vec<f64> = cols.iter().map(|&c| parse_cell(&rec, c, line + 2)).collect::<Result<_>>()?;
            rows.push(f);
        }
        let mut points: Vec<[f64; 3]> = rows.iter().map(|f| [f[0], f[1], f[2]]).collect();
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        points.dedup();
        let lattice = Lattice::from_points(&points)?;
        let mut values = vec![CMatrix::zeros(n, n); lattice.len()];
        let mut seen = vec![0usize; lattice.len()];
        for f in &rows {
            let (r, c) = (f[3] as usize, f[4] as usize);
            if r >= n || c >= n || f[3].fract() != 0.0 || f[4].fract() != 0.0 {
                return Err(Error::InvalidProblem(format!("matrix index ({}, {}) outside {n}x{n}", f[3], f[4])));
            }
            let idx = lattice.index_of(&[f[0], f[1], f[2]]);
            values[idx][(r, c)] = Complex64::new(f[5], f[6]);
            seen[idx] += 1;
        }
        if seen.iter().any(|&s| s != n * n) {
            return Err(Error::InvalidProblem(format!("every lattice node needs all {} matrix entries", n * n)));
        }
        Self::new_checked(lattice, n, values)
    }

    /// Samples a closed-form field on a lattice (useful for tests and synthetic inputs).
    pub fn from_fn(
        origin: [f64; 3],
        spacing: [f64; 3],
        dims: [usize; 3],
        n: usize,
        f: impl Fn(&[f64]) -> CMatrix,
    ) -> Result<Self> {
        let lattice = Lattice { origin, spacing, dims };
        let values = (0..lattice.len()).map(|i| f(&lattice.node(i))).collect();
        Self::new_checked(lattice, n, values)
    }

    fn new_checked(lattice: Lattice, n: usize, values: Vec<CMatrix>) -> Result<Self> {
        for v in &values {
            let deviation = linalg::hermitian_deviation(v);
            if deviation > 1e-12 {
                return Err(Error::NotHermitian { deviation, tolerance: 1e-12 });
            }
        }
        Ok(LatticeMatrixField { lattice, n, values })
    }

    fn eval(&self, x: &[f64]) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.n, self.n);
        for (i, w) in self.lattice.weights(x)? {
            out += &self.values[i] * Complex64::from(w);
        }
        Ok(out)
    }
}

/// Vector potential sampled on a lattice (d = 3), trilinearly interpolated.
#[derive(Clone, Debug)]
pub struct LatticeVectorField {
    lattice: Lattice,
    values: Vec<[f64; 3]>,
}

impl LatticeVectorField {
    /// CSV with header `x,y,z,ax,ay,az`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let cols: Vec<usize> = ["x", "y", "z", "ax", "ay", "az"]
            .iter()
            .map(|c| column(&headers, c))
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            let f: Vec<f64> = cols.iter().map(|&c| parse_cell(&rec, c, line + 2)).collect::<Result<_>>()?;
            rows.push(f);
        }
        let points: Vec<[f64; 3]> = rows.iter().map(|f| [f[0], f[1], f[2]]).collect();
        let lattice = Lattice::from_points(&points)?;
        let mut values = vec![[0.0; 3]; lattice.len()];
        for f in &rows {
            values[lattice.index_of(&[f[0], f[1], f[2]])] = [f[3], f[4], f[5]];
        }
        Ok(LatticeVectorField { lattice, values })
    }

    pub fn from_fn(origin: [f64; 3], spacing: [f64; 3], dims: [usize; 3], f: impl Fn(&[f64]) -> [f64; 3]) -> Self {
        let lattice = Lattice { origin, spacing, dims };
        let values = (0..lattice.len()).map(|i| f(&lattice.node(i))).collect();
        LatticeVectorField { lattice, values }
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; 3];
        for (i, w) in self.lattice.weights(x)? {
            for a in 0..3 {
                out[a] += w * self.values[i][a];
            }
        }
        Ok(out)
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Parse(format!("CSV is missing column `{name}`")))
}

fn parse_cell(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<f64> {
    let cell = rec.get(idx).unwrap_or("").trim();
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse(format!("CSV line {line}: `{cell}` is not a finite number")))
}

// ---------------------------------------------------------------------------
// Magnetic potentials

/// Pure-gauge term `χ(x) = amp·sin(k·x) + quad·|x|²/2`, added to `A` as `∇χ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTerm {
    pub amp: f64,
    pub k: Vec<f64>,
    pub quad: f64,
}

impl GaugeTerm {
    pub fn chi(&self, x: &[f64]) -> f64 {
        let kx: f64 = self.k.iter().zip(x).map(|(a, b)| a * b).sum();
        self.amp * kx.sin() + 0.5 * self.quad * x.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn grad_chi(&self, x: &[f64]) -> Vec<f64> {
        let kx: f64 = self.k.iter().zip(x).map(|(a, b)| a * b).sum();
        let c = self.amp * kx.cos();
        x.iter().enumerate().map(|(j, &xj)| c * self.k.get(j).copied().unwrap_or(0.0) + self.quad * xj).collect()
    }

    pub fn laplacian_chi(&self, x: &[f64]) -> f64 {
        let kx: f64 = self.k.iter().zip(x).map(|(a, b)| a * b).sum();
        let k2: f64 = self.k.iter().map(|v| v * v).sum();
        -self.amp * k2 * kx.sin() + self.quad * x.len() as f64
    }
}

/// Vector-potential catalog.
#[derive(Clone, Debug)]
pub enum MagneticKind {
    Zero,
    /// d = 3: `A = a·r^{−p}·(−y, x, 0)`.
    Rotational { a: f64, p: f64 },
    /// d = 3 lattice data; `B` by central differences.
    Custom(LatticeVectorField),
}

#[derive(Clone, Debug)]
pub struct MagneticSpec {
    pub d: usize,
    pub kind: MagneticKind,
    pub gauge: Option<GaugeTerm>,
}

impl MagneticSpec {
    pub fn zero(d: usize) -> Self {
        MagneticSpec { d, kind: MagneticKind::Zero, gauge: None }
    }

    pub fn rotational(a: f64, p: f64) -> Result<Self> {
        if !a.is_finite() || !(p >= 0.0) {
            return Err(Error::InvalidProblem(format!("rotational field needs finite a and p >= 0 (p = {p})")));
        }
        Ok(MagneticSpec { d: 3, kind: MagneticKind::Rotational { a, p }, gauge: None })
    }

    pub fn with_gauge(mut self, gauge: GaugeTerm) -> Result<Self> {
        if gauge.k.len() != self.d {
            return Err(Error::SizeMismatch { left: gauge.k.len(), right: self.d });
        }
        self.gauge = Some(gauge);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            MagneticKind::Zero => Ok(()),
            _ if self.d != 3 => Err(Error::Mismatch(format!("non-zero magnetic catalog entries need d = 3, got {}", self.d))),
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, MagneticKind::Zero) || matches!(self.kind, MagneticKind::Rotational { a, .. } if a == 0.0)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::SizeMismatch { left: x.len(), right: self.d });
        }
        Ok(())
    }

    fn needs_nonzero(&self) -> bool {
        matches!(self.kind, MagneticKind::Rotational { p, .. } if p > 0.0)
    }

    /// Vector potential `A(x)`.
    pub fn a(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut out = match &self.kind {
            MagneticKind::Zero => vec![0.0; self.d],
            MagneticKind::Rotational { a, p } => {
                let g = if *p == 0.0 { *a } else { a * require_nonzero(x)?.powf(-p) };
                vec![-g * x[1], g * x[0], 0.0]
            }
            MagneticKind::Custom(f) => f.eval(x)?,
        };
        if let Some(g) = &self.gauge {
            for (o, v) in out.iter_mut().zip(g.grad_chi(x)) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// `div A(x)`; the rotational family is divergence free.
    pub fn div_a(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let base = match &self.kind {
            MagneticKind::Zero | MagneticKind::Rotational { .. } => 0.0,
            MagneticKind::Custom(_) => {
                let h = FD_STEP * require_nonzero(x)?;
                let mut s = 0.0;
                for j in 0..3 {
                    let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
                    xp[j] += h;
                    xm[j] -= h;
                    s += (self.a(&xp)?[j] - self.a(&xm)?[j]) / (2.0 * h);
                }
                return Ok(s);
            }
        };
        Ok(base + self.gauge.as_ref().map_or(0.0, |g| g.laplacian_chi(x)))
    }

    /// Antisymmetric `B_jk = ∂_jA_k − ∂_kA_j` (analytic for the catalog).
    pub fn b(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        match &self.kind {
            MagneticKind::Zero => Ok(DMatrix::zeros(self.d, self.d)),
            MagneticKind::Rotational { .. } => {
                if self.needs_nonzero() {
                    require_nonzero(x)?;
                }
                Ok(vector_to_b(&self.rotational_b(x)))
            }
            MagneticKind::Custom(f) => {
                f.lattice.check_spacing(x)?;
                self.b_fd(x)
            }
        }
    }

    /// `B` by central differences of `A` with step `FD_STEP·|x|`.
    pub fn b_fd(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let h = FD_STEP * require_nonzero(x)?;
        let d = self.d;
        let mut jac = DMatrix::zeros(d, d); // jac[(j,k)] = ∂_j A_k
        for j in 0..d {
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            xp[j] += h;
            xm[j] -= h;
            let (ap, am) = (self.a(&xp)?, self.a(&xm)?);
            for k in 0..d {
                jac[(j, k)] = (ap[k] - am[k]) / (2.0 * h);
            }
        }
        Ok(&jac - jac.transpose())
    }

    /// d = 3 vector identification `B = (B_23, B_31, B_12)`.
    pub fn b_vector(&self, x: &[f64]) -> Result<[f64; 3]> {
        if self.d != 3 {
            return Err(Error::Mismatch("vector form of B needs d = 3".into()));
        }
        let b = self.b(x)?;
        Ok(b_to_vector(&b))
    }

    fn rotational_parts(&self, x: &[f64]) -> (f64, f64, f64, f64, f64) {
        let MagneticKind::Rotational { a, p } = self.kind else { unreachable!() };
        let r = norm(x);
        if p == 0.0 {
            return (a, 0.0, 0.0, 0.0, r);
        }
        let g = a * r.powf(-p);
        let g1 = -p * g / r;
        let g2 = p * (p + 1.0) * g / (r * r);
        let q = g1 / r;
        let q1 = g2 / r - g1 / (r * r);
        (g, g1, q, q1, r)
    }

    fn rotational_b(&self, x: &[f64]) -> [f64; 3] {
        let (g, _, q, _, _) = self.rotational_parts(x);
        let rho2 = x[0] * x[0] + x[1] * x[1];
        [-x[0] * x[2] * q, -x[1] * x[2] * q, 2.0 * g + rho2 * q]
    }

    /// d = 3 Jacobian `J[j][k] = ∂_k B_j` of the vector field `B`.
    pub fn grad_b(&self, x: &[f64]) -> Result<[[f64; 3]; 3]> {
        if self.d != 3 {
            return Err(Error::Mismatch("gradient of B needs d = 3".into()));
        }
        self.check_point(x)?;
        match &self.kind {
            MagneticKind::Zero => Ok([[0.0; 3]; 3]),
            MagneticKind::Rotational { p, .. } => {
                if *p == 0.0 {
                    return Ok([[0.0; 3]; 3]);
                }
                require_nonzero(x)?;
                let (_, g1, q, q1, r) = self.rotational_parts(x);
                let (x0, y0, z0) = (x[0], x[1], x[2]);
                let rho2 = x0 * x0 + y0 * y0;
                let dq = [q1 * x0 / r, q1 * y0 / r, q1 * z0 / r];
                let dg = [g1 * x0 / r, g1 * y0 / r, g1 * z0 / r];
                let b1 = [-z0 * q - x0 * z0 * dq[0], -x0 * z0 * dq[1], -x0 * q - x0 * z0 * dq[2]];
                let b2 = [-y0 * z0 * dq[0], -z0 * q - y0 * z0 * dq[1], -y0 * q - y0 * z0 * dq[2]];
                let b3 = [
                    2.0 * dg[0] + 2.0 * x0 * q + rho2 * dq[0],
                    2.0 * dg[1] + 2.0 * y0 * q + rho2 * dq[1],
                    2.0 * dg[2] + rho2 * dq[2],
                ];
                Ok([b1, b2, b3])
            }
            MagneticKind::Custom(f) => {
                f.lattice.check_spacing(x)?;
                let h = FD_STEP * norm(x);
                let mut out = [[0.0; 3]; 3];
                for k in 0..3 {
                    let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
                    xp[k] += h;
                    xm[k] -= h;
                    let (bp, bm) = (b_to_vector(&self.b_fd(&xp)?), b_to_vector(&self.b_fd(&xm)?));
                    for j in 0..3 {
                        out[j][k] = (bp[j] - bm[j]) / (2.0 * h);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// `(B_23, B_31, B_12)` from an antisymmetric 3×3 matrix.
pub fn b_to_vector(b: &DMatrix<f64>) -> [f64; 3] {
    [b[(1, 2)], b[(2, 0)], b[(0, 1)]]
}

/// Antisymmetric matrix with `B_23 = b₁`, `B_31 = b₂`, `B_12 = b₃`.
pub fn vector_to_b(b: &[f64; 3]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(3, 3);
    m[(1, 2)] = b[0];
    m[(2, 1)] = -b[0];
    m[(2, 0)] = b[1];
    m[(0, 2)] = -b[1];
    m[(0, 1)] = b[2];
    m[(1, 0)] = -b[2];
    m
}

/// Spectral norm of a real antisymmetric matrix.
pub fn antisymmetric_norm(b: &DMatrix<f64>) -> f64 {
    if b.nrows() == 0 {
        return 0.0;
    }
    b.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Potentials

/// Potential catalog.
#[derive(Clone, Debug)]
pub enum PotentialKind {
    Zero,
    /// `V = (ν I + μβ + iδβ α·x/|x|)/|x|`.
    MatrixCoulomb { nu: f64, mu: f64, delta: f64 },
    /// `V = v(|x|)·I`.
    Electric(RadialProfile),
    /// `V = v(|x|)·β`.
    Scalar(RadialProfile),
    /// `V = iβ α·∇φ` where the profile is the radial derivative `φ'(r)`.
    Anomalous(RadialProfile),
    /// d = 3: `V = iβ α·∇φ − 2β S·B` with `B` from the attached magnetic field.
    Anomalous3d { phi_prime: RadialProfile, magnetic: MagneticSpec },
    /// Constant Hermitian matrix.
    Uniform(CMatrix),
    /// d = 3 lattice data; gradient by central differences.
    Custom(LatticeMatrixField),
}

#[derive(Clone, Debug)]
pub struct PotentialSpec {
    pub d: usize,
    pub kind: PotentialKind,
}

impl PotentialSpec {
    pub fn new(d: usize, kind: PotentialKind) -> Result<Self> {
        let spec = PotentialSpec { d, kind };
        spec.validate()?;
        Ok(spec)
    }

    pub fn zero(d: usize) -> Self {
        PotentialSpec { d, kind: PotentialKind::Zero }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            PotentialKind::Anomalous3d { magnetic, .. } => {
                if self.d != 3 || magnetic.d != 3 {
                    return Err(Error::Mismatch("spin-coupled anomalous potential needs d = 3".into()));
                }
                magnetic.validate()
            }
            PotentialKind::Custom(f) if self.d != 3 || f.n != 4 => {
                Err(Error::Mismatch("custom lattice potentials need d = 3 and 4x4 values".into()))
            }
            PotentialKind::Uniform(m) => {
                if m.nrows() != clifford::spinor_size(self.d) {
                    return Err(Error::SizeMismatch { left: m.nrows(), right: clifford::spinor_size(self.d) });
                }
                let deviation = linalg::hermitian_deviation(m);
                if deviation > 1e-12 {
                    return Err(Error::NotHermitian { deviation, tolerance: 1e-12 });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// True when the potential has a singularity at the origin.
    pub fn singular_at_origin(&self) -> bool {
        match &self.kind {
            PotentialKind::Zero | PotentialKind::Uniform(_) => false,
            PotentialKind::Custom(_) => true,
            PotentialKind::MatrixCoulomb { .. } => true,
            PotentialKind::Electric(p) | PotentialKind::Scalar(p) => {
                !matches!(p, RadialProfile::PowerLaw { sigma, .. } if *sigma == 0.0)
            }
            PotentialKind::Anomalous(_) | PotentialKind::Anomalous3d { .. } => true,
        }
    }

    fn check(&self, rep: &NumericRep, x: &[f64]) -> Result<()> {
        if rep.d != self.d {
            return Err(Error::Mismatch(format!("representation has d = {}, potential has d = {}", rep.d, self.d)));
        }
        if x.len() != self.d {
            return Err(Error::SizeMismatch { left: x.len(), right: self.d });
        }
        Ok(())
    }

    /// `∇φ` and the Hessian of `φ` for the anomalous families.
    pub fn phi_derivatives(&self, x: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let profile = match &self.kind {
            PotentialKind::Anomalous(p) => p,
            PotentialKind::Anomalous3d { phi_prime, .. } => phi_prime,
            _ => return Err(Error::Mismatch("phi is only defined for anomalous potentials".into())),
        };
        radial_phi_derivatives(profile, x)
    }
}

/// `∇φ` and Hessian for a radial `φ` given by its derivative profile `f = φ'`.
pub fn radial_phi_derivatives(profile: &RadialProfile, x: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let r = require_nonzero(x)?;
    let f = profile.value(r)?;
    let f1 = profile.derivative(r)?;
    let d = x.len();
    let omega: Vec<f64> = x.iter().map(|v| v / r).collect();
    let grad = omega.iter().map(|w| f * w).collect();
    let hess = DMatrix::from_fn(d, d, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        f1 * omega[i] * omega[j] + f / r * (delta - omega[i] * omega[j])
    });
    Ok((grad, hess))
}

/// `ν I + μβ + iδβ(α·ω)`.
pub fn coulomb_angular(rep: &NumericRep, nu: f64, mu: f64, delta: f64, omega: &[f64]) -> CMatrix {
    let n = rep.spinor_size();
    linalg::identity(n) * Complex64::from(nu)
        + &rep.beta * Complex64::from(mu)
        + &rep.beta * rep.alpha_dot(omega) * Complex64::new(0.0, delta)
}

/// Closed-form `|ν| + √(μ² + δ²)` for the norm of [`coulomb_angular`].
pub fn coulomb_angular_norm(nu: f64, mu: f64, delta: f64) -> f64 {
    nu.abs() + mu.hypot(delta)
}

fn spin_b(spin: &[CMatrix; 3], b: &[f64; 3]) -> CMatrix {
    &spin[0] * Complex64::from(b[0]) + &spin[1] * Complex64::from(b[1]) + &spin[2] * Complex64::from(b[2])
}

fn spin_matrices() -> [CMatrix; 3] {
    let rep = clifford::DiracRep::new(3).expect("d=3 is supported");
    clifford::spin_and_t(&rep).expect("d=3").to_numeric().0
}

/// `V(x)`.
pub fn eval_potential(spec: &PotentialSpec, rep: &NumericRep, x: &[f64]) -> Result<CMatrix> {
    spec.check(rep, x)?;
    let n = rep.spinor_size();
    let nonzero = || require_nonzero(x);
    Ok(match &spec.kind {
        PotentialKind::Zero => CMatrix::zeros(n, n),
        PotentialKind::Uniform(m) => m.clone(),
        PotentialKind::MatrixCoulomb { nu, mu, delta } => {
            let r = nonzero()?;
            let omega: Vec<f64> = x.iter().map(|v| v / r).collect();
            coulomb_angular(rep, *nu, *mu, *delta, &omega) / Complex64::from(r)
        }
        PotentialKind::Electric(p) => linalg::identity(n) * Complex64::from(p.value(nonzero()?)?),
        PotentialKind::Scalar(p) => &rep.beta * Complex64::from(p.value(nonzero()?)?),
        PotentialKind::Anomalous(_) => {
            let (g, _) = spec.phi_derivatives(x)?;
            &rep.beta * rep.alpha_dot(&g) * CI
        }
        PotentialKind::Anomalous3d { magnetic, .. } => {
            let (g, _) = spec.phi_derivatives(x)?;
            let b = magnetic.b_vector(x)?;
            &rep.beta * rep.alpha_dot(&g) * CI - &rep.beta * spin_b(&spin_matrices(), &b) * Complex64::from(2.0)
        }
        PotentialKind::Custom(f) => f.eval(x)?,
    })
}

/// `∂_jV(x)` for `j = 1..d`.
pub fn eval_grad_potential(spec: &PotentialSpec, rep: &NumericRep, x: &[f64]) -> Result<Vec<CMatrix>> {
    spec.check(rep, x)?;
    let n = rep.spinor_size();
    let d = spec.d;
    let zero = || vec![CMatrix::zeros(n, n); d];
    Ok(match &spec.kind {
        PotentialKind::Zero | PotentialKind::Uniform(_) => zero(),
        PotentialKind::MatrixCoulomb { nu, mu, delta } => {
            let r = require_nonzero(x)?;
            let scalar = linalg::identity(n) * Complex64::from(*nu) + &rep.beta * Complex64::from(*mu);
            let ax = rep.alpha_dot(x);
            (0..d)
                .map(|j| {
                    let radial = &scalar * Complex64::from(-x[j] / r.powi(3));
                    let ang = &rep.alphas[j] * Complex64::from(1.0 / (r * r)) - &ax * Complex64::from(2.0 * x[j] / r.powi(4));
                    radial + &rep.beta * ang * Complex64::new(0.0, *delta)
                })
                .collect()
        }
        PotentialKind::Electric(p) | PotentialKind::Scalar(p) => {
            let r = require_nonzero(x)?;
            let dv = p.derivative(r)?;
            let base = if matches!(spec.kind, PotentialKind::Electric(_)) { linalg::identity(n) } else { rep.beta.clone() };
            (0..d).map(|j| &base * Complex64::from(dv * x[j] / r)).collect()
        }
        PotentialKind::Anomalous(_) | PotentialKind::Anomalous3d { .. } => {
            let (_, hess) = spec.phi_derivatives(x)?;
            let mut out: Vec<CMatrix> = (0..d)
                .map(|k| {
                    let col: Vec<f64> = (0..d).map(|j| hess[(j, k)]).collect();
                    &rep.beta * rep.alpha_dot(&col) * CI
                })
                .collect();
            if let PotentialKind::Anomalous3d { magnetic, .. } = &spec.kind {
                let jac = magnetic.grad_b(x)?;
                let spin = spin_matrices();
                for (k, o) in out.iter_mut().enumerate() {
                    let db = [jac[0][k], jac[1][k], jac[2][k]];
                    *o -= &rep.beta * spin_b(&spin, &db) * Complex64::from(2.0);
                }
            }
            out
        }
        PotentialKind::Custom(f) => {
            f.lattice.check_spacing(x)?;
            let h = FD_STEP * require_nonzero(x)?;
            (0..d)
                .map(|j| {
                    let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
                    xp[j] += h;
                    xm[j] -= h;
                    Ok((f.eval(&xp)? - f.eval(&xm)?) / Complex64::from(2.0 * h))
                })
                .collect::<Result<_>>()?
        }
    })
}

/// Central-difference gradient of `V` with step `FD_STEP·|x|`, for any family.
pub fn eval_grad_potential_fd(spec: &PotentialSpec, rep: &NumericRep, x: &[f64]) -> Result<Vec<CMatrix>> {
    let h = FD_STEP * require_nonzero(x)?;
    (0..spec.d)
        .map(|j| {
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            xp[j] += h;
            xm[j] -= h;
            Ok((eval_potential(spec, rep, &xp)? - eval_potential(spec, rep, &xm)?) / Complex64::from(2.0 * h))
        })
        .collect()
}

/// `B(x)` as an antisymmetric matrix.
pub fn eval_b(aspec: &MagneticSpec, x: &[f64]) -> Result<DMatrix<f64>> {
    aspec.b(x)
}

/// Field values and norms at one point.
#[derive(Clone, Debug)]
pub struct FieldSample {
    pub x: Vec<f64>,
    pub v: CMatrix,
    pub grad_v: Vec<CMatrix>,
    pub b: DMatrix<f64>,
    pub norm_v: f64,
    /// `(Σ_j |∂_jV|²)^{1/2}` with operator norms.
    pub norm_grad_v: f64,
    pub norm_b: f64,
}

pub fn sample(pspec: &PotentialSpec, aspec: &MagneticSpec, rep: &NumericRep, x: &[f64]) -> Result<FieldSample> {
    let v = eval_potential(pspec, rep, x)?;
    let grad_v = eval_grad_potential(pspec, rep, x)?;
    let b = aspec.b(x)?;
    let norm_v = clifford::operator_norm(&v)?;
    let norm_grad_v = grad_v
        .iter()
        .map(|g| clifford::operator_norm(g).map(|s| s * s))
        .sum::<Result<f64>>()?
        .sqrt();
    let norm_b = antisymmetric_norm(&b);
    Ok(FieldSample { x: x.to_vec(), v, grad_v, b, norm_v, norm_grad_v, norm_b })
}

// ---------------------------------------------------------------------------
// Sup-weights

/// One supremum with its provenance. `+∞` marks a divergent weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Weight {
    #[serde(serialize_with = "crate::serialize_extended")]
    pub value: f64,
    pub provenance: Provenance,
}

impl Weight {
    pub fn exact(value: f64) -> Self {
        Weight { value, provenance: Provenance::ClosedForm }
    }

    pub fn scanned(value: f64) -> Self {
        Weight { value, provenance: Provenance::GridEstimate }
    }
}

/// Suprema over `x ≠ 0` of the radial weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightTable {
    /// `|x||V|`
    pub x_v: Weight,
    /// `|x|²|∇V|`
    pub x2_grad_v: Weight,
    /// `|x|³|∇V|`
    pub x3_grad_v: Weight,
    /// `|x|²|B|`
    pub x2_b: Weight,
    /// `|x||∇φ|`
    pub x_grad_phi: Weight,
    /// `|x|²|Δφ|`
    pub x2_lap_phi: Weight,
    /// `|x||B|`
    pub x_b: Weight,
    /// `|x|²|∇B|`
    pub x2_grad_b: Weight,
}

impl WeightTable {
    pub fn zero() -> Self {
        let z = Weight::exact(0.0);
        WeightTable { x_v: z, x2_grad_v: z, x3_grad_v: z, x2_b: z, x_grad_phi: z, x2_lap_phi: z, x_b: z, x2_grad_b: z }
    }

    pub fn entries(&self) -> [(&'static str, Weight); 8] {
        [
            ("x_v", self.x_v),
            ("x2_grad_v", self.x2_grad_v),
            ("x3_grad_v", self.x3_grad_v),
            ("x2_b", self.x2_b),
            ("x_grad_phi", self.x_grad_phi),
            ("x2_lap_phi", self.x2_lap_phi),
            ("x_b", self.x_b),
            ("x2_grad_b", self.x2_grad_b),
        ]
    }
}

/// `sup_{r>0} |k|·r^e`: `0` if `k = 0`, `|k|` if `e = 0`, else `+∞`.
pub fn power_sup(k: f64, e: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else if e == 0.0 {
        k.abs()
    } else {
        f64::INFINITY
    }
}

fn scan_max(radii: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut best: f64 = 0.0;
    for &r in radii {
        match f(r) {
            Ok(v) => best = best.max(v),
            Err(Error::SparseSamples { .. }) | Err(Error::OutsideSamples { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

/// Deterministic quasi-uniform directions on the unit sphere of ℝ^d.
pub fn scan_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    if d == 3 {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        return (0..count)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let rho = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                vec![rho * phi.cos(), rho * phi.sin(), z]
            })
            .collect();
    }
    let mut out = Vec::new();
    for j in 0..d {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[j] = s;
            out.push(v);
        }
    }
    let diag = 1.0 / (d as f64).sqrt();
    out.push(vec![diag; d]);
    out.push((0..d).map(|j| if j % 2 == 0 { diag } else { -diag }).collect());
    out
}

fn potential_weights(spec: &PotentialSpec, rep: &NumericRep) -> Result<(Weight, Weight, Weight, Weight, Weight)> {
    let d = spec.d as f64;
    let z = Weight::exact(0.0);
    Ok(match &spec.kind {
        PotentialKind::Zero => (z, z, z, z, z),
        PotentialKind::MatrixCoulomb { nu, mu, delta } => {
            let a = coulomb_angular_norm(*nu, *mu, *delta);
            let g = (a * a + (d - 1.0) * delta * delta).sqrt();
            (
                Weight::exact(a),
                Weight::exact(g),
                Weight::exact(power_sup(g, 1.0)),
                Weight::exact(delta.abs()),
                Weight::exact((d - 2.0) * delta.abs()),
            )
        }
        PotentialKind::Electric(p) | PotentialKind::Scalar(p) => match p {
            RadialProfile::PowerLaw { c, sigma } => (
                Weight::exact(power_sup(*c, 1.0 - sigma)),
                Weight::exact(power_sup(c * sigma, 1.0 - sigma)),
                Weight::exact(power_sup(c * sigma, 2.0 - sigma)),
                z,
                z,
            ),
            RadialProfile::Sampled(_) => {
                let radii = p.scan_radii();
                (
                    Weight::scanned(scan_max(&radii, |r| Ok(r * p.value(r)?.abs()))?),
                    Weight::scanned(scan_max(&radii, |r| Ok(r * r * p.derivative(r)?.abs()))?),
                    Weight::scanned(scan_max(&radii, |r| Ok(r.powi(3) * p.derivative(r)?.abs()))?),
                    z,
                    z,
                )
            }
        },
        PotentialKind::Anomalous(p) | PotentialKind::Anomalous3d { phi_prime: p, .. } => {
            let (xv, xg, x3, xphi, xlap) = match p {
                RadialProfile::PowerLaw { c, sigma } => {
                    let g = c * (sigma * sigma + d - 1.0).sqrt();
                    (
                        Weight::exact(power_sup(*c, 1.0 - sigma)),
                        Weight::exact(power_sup(g, 1.0 - sigma)),
                        Weight::exact(power_sup(g, 2.0 - sigma)),
                        Weight::exact(power_sup(*c, 1.0 - sigma)),
                        Weight::exact(power_sup(c * (d - 1.0 - sigma), 1.0 - sigma)),
                    )
                }
                RadialProfile::Sampled(_) => {
                    let radii = p.scan_radii();
                    let grad = |r: f64| -> Result<f64> {
                        let (f, f1) = (p.value(r)?, p.derivative(r)?);
                        Ok((f1 * f1 + (d - 1.0) * (f / r).powi(2)).sqrt())
                    };
                    let xphi = scan_max(&radii, |r| Ok(r * p.value(r)?.abs()))?;
                    (
                        Weight::scanned(xphi),
                        Weight::scanned(scan_max(&radii, |r| Ok(r * r * grad(r)?))?),
                        Weight::scanned(scan_max(&radii, |r| Ok(r.powi(3) * grad(r)?))?),
                        Weight::scanned(xphi),
                        Weight::scanned(scan_max(&radii, |r| {
                            Ok(r * r * (p.derivative(r)? + (d - 1.0) * p.value(r)? / r).abs())
                        })?),
                    )
                }
            };
            if let PotentialKind::Anomalous3d { magnetic, .. } = &spec.kind {
                if !magnetic.is_zero() {
                    let (a, b, c) = scan_matrix_weights(spec, rep)?;
                    return Ok((Weight::scanned(a), Weight::scanned(b), Weight::scanned(c), xphi, xlap));
                }
            }
            (xv, xg, x3, xphi, xlap)
        }
        PotentialKind::Uniform(m) => {
            let nv = clifford::operator_norm(m)?;
            (Weight::exact(power_sup(nv, 1.0)), z, z, z, z)
        }
        PotentialKind::Custom(_) => {
            let (a, b, c) = scan_matrix_weights(spec, rep)?;
            (Weight::scanned(a), Weight::scanned(b), Weight::scanned(c), z, z)
        }
    })
}

fn scan_points(spec: &PotentialSpec) -> Vec<Vec<f64>> {
    match &spec.kind {
        PotentialKind::Custom(f) => (0..f.lattice.len()).map(|i| f.lattice.node(i).to_vec()).filter(|p| norm(p) > 0.0).collect(),
        _ => {
            let (lo, hi) = SCAN_RANGE;
            let decades = (hi / lo).log10();
            let n = (decades * 100.0) as usize;
            let dirs = scan_directions(spec.d, 26);
            (0..=n)
                .flat_map(|i| {
                    let r = lo * 10f64.powf(decades * i as f64 / n as f64);
                    dirs.iter().map(move |w| w.iter().map(|v| v * r).collect::<Vec<f64>>()).collect::<Vec<_>>()
                })
                .collect()
        }
    }
}

fn scan_matrix_weights(spec: &PotentialSpec, rep: &NumericRep) -> Result<(f64, f64, f64)> {
    let (mut a, mut b, mut c): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for x in scan_points(spec) {
        let r = norm(&x);
        let v = match eval_potential(spec, rep, &x) {
            Ok(v) => v,
            Err(Error::SparseSamples { .. }) | Err(Error::OutsideSamples { .. }) => continue,
            Err(e) => return Err(e),
        };
        a = a.max(r * clifford::operator_norm(&v)?);
        let g = match eval_grad_potential(spec, rep, &x) {
            Ok(g) => g,
            Err(Error::SparseSamples { .. }) | Err(Error::OutsideSamples { .. }) => continue,
            Err(e) => return Err(e),
        };
        let ng = g.iter().map(|m| clifford::operator_norm(m).map(|s| s * s)).sum::<Result<f64>>()?.sqrt();
        b = b.max(r * r * ng);
        c = c.max(r.powi(3) * ng);
    }
    Ok((a, b, c))
}

fn magnetic_weights(aspec: &MagneticSpec) -> Result<(Weight, Weight, Weight)> {
    let z = Weight::exact(0.0);
    Ok(match &aspec.kind {
        MagneticKind::Zero => (z, z, z),
        MagneticKind::Rotational { a, p } => {
            let k = a.abs() * 2f64.max((p - 2.0).abs());
            let grad_b = if *a == 0.0 || *p == 0.0 {
                z
            } else if *p == 1.0 {
                Weight::scanned(rotational_grad_b_angular_max(aspec))
            } else {
                Weight::exact(f64::INFINITY)
            };
            (Weight::exact(power_sup(k, 2.0 - p)), Weight::exact(power_sup(k, 1.0 - p)), grad_b)
        }
        MagneticKind::Custom(f) => {
            let (mut w2, mut w1, mut wg): (f64, f64, f64) = (0.0, 0.0, 0.0);
            for i in 0..f.lattice.len() {
                let x = f.lattice.node(i);
                let r = norm(&x);
                if r == 0.0 {
                    continue;
                }
                let (b, g) = match (aspec.b(&x), aspec.grad_b(&x)) {
                    (Ok(b), Ok(g)) => (b, g),
                    (Err(Error::SparseSamples { .. }), _)
                    | (Err(Error::OutsideSamples { .. }), _)
                    | (_, Err(Error::SparseSamples { .. }))
                    | (_, Err(Error::OutsideSamples { .. })) => continue,
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                };
                let nb = antisymmetric_norm(&b);
                let ng = g.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
                w2 = w2.max(r * r * nb);
                w1 = w1.max(r * nb);
                wg = wg.max(r * r * ng);
            }
            (Weight::scanned(w2), Weight::scanned(w1), Weight::scanned(wg))
        }
    })
}

/// `max_θ |x|²|∇B|` on the unit sphere for the rotational family (Frobenius norm), by a polar-angle scan.
fn rotational_grad_b_angular_max(aspec: &MagneticSpec) -> f64 {
    let steps = 20_000;
    (0..=steps)
        .map(|i| {
            let th = std::f64::consts::PI * i as f64 / steps as f64;
            let x = [th.sin(), 0.0, th.cos()];
            let g = aspec.grad_b(&x).expect("unit vector is nonzero");
            g.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

/// Suprema of all weights for a potential/magnetic pair.
pub fn sup_weights(pspec: &PotentialSpec, aspec: &MagneticSpec, rep: &NumericRep) -> Result<WeightTable> {
    if pspec.d != aspec.d || rep.d != pspec.d {
        return Err(Error::Mismatch(format!(
            "dimensions differ: potential {}, magnetic {}, representation {}",
            pspec.d, aspec.d, rep.d
        )));
    }
    pspec.validate()?;
    aspec.validate()?;
    let (x_v, x2_grad_v, x3_grad_v, x_grad_phi, x2_lap_phi) = potential_weights(pspec, rep)?;
    let (x2_b, x_b, x2_grad_b) = magnetic_weights(aspec)?;
    Ok(WeightTable { x_v, x2_grad_v, x3_grad_v, x2_b, x_grad_phi, x2_lap_phi, x_b, x2_grad_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::DiracRep;

    fn rep3() -> NumericRep {
        DiracRep::new(3).unwrap().to_numeric()
    }

    #[test]
    fn scalar_coulomb_value() {
        let rep = rep3();
        let spec = PotentialSpec::new(3, PotentialKind::MatrixCoulomb { nu: 1.0, mu: 0.0, delta: 0.0 }).unwrap();
        let v = eval_potential(&spec, &rep, &[0.0, 2.0, 0.0]).unwrap();
        assert!(linalg::max_abs_diff(&v, &(linalg::identity(4) * Complex64::from(0.5))) < 1e-15);
        assert!(matches!(eval_potential(&spec, &rep, &[0.0; 3]), Err(Error::Singularity { .. })));
    }

    #[test]
    fn electric_power_law() {
        let rep = rep3();
        let spec = PotentialSpec::new(3, PotentialKind::Electric(RadialProfile::power_law(1.0, 1.0).unwrap())).unwrap();
        let v = eval_potential(&spec, &rep, &[0.0, 0.0, 4.0]).unwrap();
        assert!((v[(0, 0)].re - 0.25).abs() < 1e-15);
        let s = sample(&spec, &MagneticSpec::zero(3), &rep, &[1.0, 1.0, 0.0]).unwrap();
        assert!((s.norm_grad_v - 0.5).abs() < 1e-14);
        let w = sup_weights(&spec, &MagneticSpec::zero(3), &rep).unwrap();
        assert_eq!(w.x2_grad_v.value, 1.0);
        assert!(w.x3_grad_v.value.is_infinite());
    }

    #[test]
    fn coulomb_gradient_matches_differences() {
        let rep = rep3();
        let spec = PotentialSpec::new(3, PotentialKind::MatrixCoulomb { nu: 0.3, mu: -0.2, delta: 0.7 }).unwrap();
        let x = [0.3, -0.8, 0.5];
        let g = eval_grad_potential(&spec, &rep, &x).unwrap();
        let fd = eval_grad_potential_fd(&spec, &rep, &x).unwrap();
        for (a, b) in g.iter().zip(&fd) {
            assert!(linalg::max_abs_diff(a, b) < 1e-8);
        }
    }

    #[test]
    fn rotational_curl_and_jacobian() {
        let spec = MagneticSpec::rotational(0.7, 1.3).unwrap();
        let x = [0.4, -0.9, 0.6];
        let b = spec.b(&x).unwrap();
        let fd = spec.b_fd(&x).unwrap();
        assert!((&b - &fd).abs().max() < 1e-8 * b.abs().max());
        let jac = spec.grad_b(&x).unwrap();
        let h = 1e-6;
        for k in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            let (bp, bm) = (spec.b_vector(&xp).unwrap(), spec.b_vector(&xm).unwrap());
            for j in 0..3 {
                assert!((jac[j][k] - (bp[j] - bm[j]) / (2.0 * h)).abs() < 1e-7);
            }
        }
        // divergence free
        assert!((jac[0][0] + jac[1][1] + jac[2][2]).abs() < 1e-12);
    }

    #[test]
    fn sampled_profile_reproduces_inverse_r() {
        let r: Vec<f64> = (0..=8000).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 8000.0)).collect();
        let v: Vec<f64> = r.iter().map(|x| 2.0 / x).collect();
        let p = SampledProfile::new(&r, &v).unwrap();
        let d = p.derivative(1.0).unwrap();
        assert!((d + 2.0).abs() / 2.0 < 1e-8, "derivative {d}");
        let sparse = SampledProfile::new(&[1.0, 2.0, 4.0, 8.0], &[1.0, 0.5, 0.25, 0.125]).unwrap();
        assert!(matches!(sparse.derivative(3.0), Err(Error::SparseSamples { .. })));
    }
}
