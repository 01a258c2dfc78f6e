//! κ-channel radial Dirac problem and its discretization.

use serde::{Deserialize, Serialize};

use super::banded::BandedSymmetric;
use crate::error::{Error, Result};

/// Radial truncation and resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    /// Upper component on one sublattice and lower on the other. The collocated variant puts both
    /// components on every node and uses central differences.
    pub staggered: bool,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid { r_min: 1e-4, r_max: 200.0, n: 4096, staggered: true }
    }
}

impl RadialGrid {
    pub fn with_n(self, n: usize) -> Self {
        RadialGrid { n, ..self }
    }

    pub fn with_r_max(self, r_max: f64) -> Self {
        RadialGrid { r_max, ..self }
    }
}

/// Radial Hamiltonian
/// `h_κ = [[m + (ν+μ)/r, −d/dr + (κ+δ)/r], [d/dr + (κ+δ)/r, −m + (ν−μ)/r]]`
/// for the potential `νI + μβ + iδβ(α·x/|x|)` in the partial wave labelled by `κ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub nu: f64,
    pub mu: f64,
    pub delta: f64,
    pub m: f64,
    pub kappa: i32,
    pub grid: RadialGrid,
}

/// Minimum number of radial cells.
pub const MIN_CELLS: usize = 64;

impl RadialProblem {
    /// Pure Coulomb problem with the default grid.
    pub fn coulomb(nu: f64, m: f64, kappa: i32) -> Result<Self> {
        Self::new(nu, 0.0, 0.0, m, kappa, RadialGrid::default())
    }

    pub fn new(nu: f64, mu: f64, delta: f64, m: f64, kappa: i32, grid: RadialGrid) -> Result<Self> {
        let p = RadialProblem { nu, mu, delta, m, kappa, grid };
        p.validate()?;
        Ok(p)
    }

    pub fn with_grid(self, grid: RadialGrid) -> Result<Self> {
        Self::new(self.nu, self.mu, self.delta, self.m, self.kappa, grid)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        let bad = |msg: String| Err(Error::InvalidProblem(msg));
        if self.kappa == 0 {
            return bad("kappa must be a nonzero integer".into());
        }
        if !(self.m >= 0.0) || !self.m.is_finite() {
            return bad(format!("mass must be finite and nonnegative (got {})", self.m));
        }
        if ![self.nu, self.mu, self.delta].iter().all(|v| v.is_finite()) {
            return bad("couplings must be finite".into());
        }
        if !(g.r_min > 0.0) || !(g.r_max > g.r_min) || !g.r_max.is_finite() {
            return bad(format!("need 0 < r_min < r_max (got r_min = {}, r_max = {})", g.r_min, g.r_max));
        }
        if g.n < MIN_CELLS {
            return bad(format!("need n >= {MIN_CELLS} (got {})", g.n));
        }
        Ok(())
    }

    /// `κ + δ`, the only combination of the two that enters the operator.
    pub fn effective_kappa(&self) -> f64 {
        self.kappa as f64 + self.delta
    }

    /// Default window for in-gap classification: `(−m + margin, m − margin)` with margin `1e-3·m`.
    /// Without mass there is no gap, and `(−1, 1)` is returned instead.
    pub fn gap_window(&self) -> (f64, f64) {
        if self.m > 0.0 {
            let margin = GAP_MARGIN * self.m;
            (-self.m + margin, self.m - margin)
        } else {
            (-1.0, 1.0)
        }
    }
}

/// Relative margin (in units of `m`) used for the in-gap classification.
pub const GAP_MARGIN: f64 = 1e-3;

/// Symmetric banded matrix together with the radius of every unknown.
///
/// Unknowns are stored in the scaled form `√w·G`, `√w·F` with the quadrature weight `w` of their
/// node, so `Σ|v_i|²` is the discrete `L²(dr)` norm and the matrix is symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialMatrix {
    pub h: BandedSymmetric,
    pub radii: Vec<f64>,
    /// `true` for unknowns of the upper component.
    pub upper: Vec<bool>,
    pub m: f64,
    pub r_max: f64,
}

/// Assembles the discretized radial Hamiltonian.
///
/// The nodes are logarithmic, `ρ_i = r_min·e^{iσ}`. In the staggered layout `i = 1..=2n` alternate
/// between the upper component (odd `i`) and the lower component (even `i`), with zero values at
/// `ρ_0 = r_min` and `ρ_{2n+1} = r_max`. Each derivative couples only nearest neighbours, so the
/// result is tridiagonal. The collocated layout keeps both components on `ρ_1..=ρ_n` and has
/// bandwidth three.
pub fn assemble(p: &RadialProblem) -> Result<RadialMatrix> {
    p.validate()?;
    if p.grid.staggered {
        Ok(assemble_staggered(p))
    } else {
        Ok(assemble_collocated(p))
    }
}

fn assemble_staggered(p: &RadialProblem) -> RadialMatrix {
    let n = p.grid.n;
    let dim = 2 * n;
    let sigma = (p.grid.r_max / p.grid.r_min).ln() / (dim + 1) as f64;
    let sh = sigma.sinh();
    let k = p.effective_kappa();
    let rho = |i: usize| p.grid.r_min * (i as f64 * sigma).exp();
    // Node i of the sequence is unknown i − 1. Its weight is (ρ_{i+1} − ρ_{i−1})/2 = ρ_i·sinh σ.
    let radii: Vec<f64> = (1..=dim).map(rho).collect();
    let upper: Vec<bool> = (1..=dim).map(|i| i % 2 == 1).collect();
    let weight = |r: f64| r * sh;
    let diag: Vec<f64> = radii
        .iter()
        .zip(&upper)
        .map(|(&r, &up)| if up { p.m + (p.nu + p.mu) / r } else { -p.m + (p.nu - p.mu) / r })
        .collect();
    // For a lower-component row i the entries are (±1/2 + k·w_i/(2ρ_i))/√(w_i·w_j) at j = i ± 1,
    // from (G_{i+1} − G_{i−1})/(2w_i) + (k/ρ_i)(G_{i+1} + G_{i−1})/2. Upper rows follow by symmetry.
    let c = 0.5 * k * sh;
    let off: Vec<f64> = (0..dim - 1)
        .map(|a| {
            let b = a + 1;
            let (lower, other) = if upper[a] { (b, a) } else { (a, b) };
            let sign = if other > lower { 0.5 } else { -0.5 };
            (sign + c) / (weight(radii[a]) * weight(radii[b])).sqrt()
        })
        .collect();
    RadialMatrix { h: BandedSymmetric::from_bands(vec![diag, off]), radii, upper, m: p.m, r_max: p.grid.r_max }
}

fn assemble_collocated(p: &RadialProblem) -> RadialMatrix {
    let n = p.grid.n;
    let dim = 2 * n;
    let sigma = (p.grid.r_max / p.grid.r_min).ln() / (n + 1) as f64;
    let sh = sigma.sinh();
    let k = p.effective_kappa();
    let node = |i: usize| p.grid.r_min * (i as f64 * sigma).exp();
    let w = |i: usize| node(i) * sh;
    let mut bands = vec![vec![0.0; dim], vec![0.0; dim - 1], vec![0.0; dim - 2], vec![0.0; dim - 3]];
    let mut radii = Vec::with_capacity(dim);
    let mut upper = Vec::with_capacity(dim);
    for i in 1..=n {
        let r = node(i);
        let g = 2 * (i - 1);
        radii.extend([r, r]);
        upper.extend([true, false]);
        bands[0][g] = p.m + (p.nu + p.mu) / r;
        bands[0][g + 1] = -p.m + (p.nu - p.mu) / r;
        bands[1][g] = k / r;
        if i < n {
            // Lower row i couples to upper i+1 with +1/2 and upper row i to lower i+1 with −1/2.
            let s = 0.5 / (w(i) * w(i + 1)).sqrt();
            bands[1][g + 1] = s;
            bands[3][g] = -s;
        }
    }
    RadialMatrix { h: BandedSymmetric::from_bands(bands), radii, upper, m: p.m, r_max: p.grid.r_max }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(nu: f64, mu: f64, delta: f64, m: f64, kappa: i32, staggered: bool) -> RadialProblem {
        RadialProblem::new(nu, mu, delta, m, kappa, RadialGrid { r_min: 1e-3, r_max: 30.0, n: 64, staggered }).unwrap()
    }

    #[test]
    fn invariants_are_enforced() {
        let g = RadialGrid { r_min: 1e-3, r_max: 30.0, n: 64, staggered: true };
        assert!(RadialProblem::new(0.0, 0.0, 0.0, 1.0, 0, g).is_err());
        assert!(RadialProblem::new(0.0, 0.0, 0.0, 1.0, 1, g.with_n(63)).is_err());
        assert!(RadialProblem::new(0.0, 0.0, 0.0, 1.0, 1, RadialGrid { r_min: 2.0, r_max: 1.0, ..g }).is_err());
        assert!(RadialProblem::new(0.0, 0.0, 0.0, -1.0, 1, g).is_err());
    }

    #[test]
    fn staggered_matrix_is_tridiagonal() {
        let h = assemble(&small(-0.5, 0.1, 0.2, 1.0, -1, true)).unwrap();
        assert_eq!(h.h.bandwidth(), 1);
        assert_eq!(h.h.dim(), 128);
        assert!(h.upper[0] && !h.upper[1]);
        assert!(h.radii.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn delta_enters_only_through_kappa_plus_delta() {
        for staggered in [true, false] {
            let a = assemble(&small(-0.3, 0.2, 0.5, 1.0, -1, staggered)).unwrap();
            let b = assemble(&small(-0.3, 0.2, 1.5, 1.0, -2, staggered)).unwrap();
            assert_eq!(a.h, b.h);
        }
    }

    #[test]
    fn collocated_has_bandwidth_three() {
        let h = assemble(&small(0.0, 0.0, 0.0, 1.0, 1, false)).unwrap();
        assert_eq!(h.h.bandwidth(), 3);
    }
}
