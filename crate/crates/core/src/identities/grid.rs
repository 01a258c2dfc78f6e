//! Uniform 3D box grids, stored spinor fields and 4th-order stencils.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Four-component spinor value.
pub type Sp = [Complex64; 4];
/// 4×4 complex matrix, row major.
pub type M4 = [[Complex64; 4]; 4];

pub const SP_ZERO: Sp = [Complex64::new(0.0, 0.0); 4];

pub fn sp_add(a: &Sp, b: &Sp) -> Sp {
    std::array::from_fn(|i| a[i] + b[i])
}

pub fn sp_sub(a: &Sp, b: &Sp) -> Sp {
    std::array::from_fn(|i| a[i] - b[i])
}

pub fn sp_scale(a: &Sp, c: Complex64) -> Sp {
    std::array::from_fn(|i| a[i] * c)
}

pub fn sp_norm2(a: &Sp) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum()
}

/// `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn sp_dot(a: &Sp, b: &Sp) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn mv(m: &M4, v: &Sp) -> Sp {
    std::array::from_fn(|i| (0..4).map(|k| m[i][k] * v[k]).sum())
}

pub fn mm(a: &M4, b: &M4) -> M4 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
}

pub fn m_add(a: &M4, b: &M4) -> M4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + b[i][j]))
}

pub fn m_scale(a: &M4, c: Complex64) -> M4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] * c))
}

pub fn m_zero() -> M4 {
    [[Complex64::new(0.0, 0.0); 4]; 4]
}

/// Converts a 4×4 nalgebra matrix.
pub fn to_m4(m: &crate::linalg::CMatrix) -> Result<M4> {
    if m.nrows() != 4 || m.ncols() != 4 {
        return Err(Error::SizeMismatch { left: m.nrows(), right: 4 });
    }
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])))
}

/// Cube `[−L, L]³` with `n` nodes per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoxGrid {
    pub d: usize,
    pub l: f64,
    pub n: usize,
}

/// Width of the boundary layer excluded from quadratures after one stencil application.
pub const STENCIL_REACH: usize = 2;

impl BoxGrid {
    pub fn new(d: usize, l: f64, n: usize) -> Result<Self> {
        if d != 3 {
            return Err(Error::DimensionOutOfRange { d, min: 3, max: 3 });
        }
        if n < 32 {
            return Err(Error::InvalidProblem(format!("grid needs n >= 32 (got {n})")));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidProblem(format!("grid half-extent must be positive (got {l})")));
        }
        Ok(BoxGrid { d, l, n })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.l / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.l + i as f64 * self.h()
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Same box with half as many intervals (`n/2` nodes, rounded to even).
    pub fn coarsened(&self) -> Result<Self> {
        let n = (self.n / 2).max(2);
        BoxGrid::new(self.d, self.l, n + n % 2)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// Whether the node lies in the boundary layer of width `margin`.
    pub fn in_layer(&self, i: usize, j: usize, k: usize, margin: usize) -> bool {
        let hi = self.n - margin;
        i < margin || j < margin || k < margin || i >= hi || j >= hi || k >= hi
    }

    /// `h³ Σ f` over nodes at distance `≥ margin` from the boundary. Planes are summed in parallel and
    /// combined in index order, so the result does not depend on the thread count.
    pub fn integrate<const K: usize, F>(&self, margin: usize, f: F) -> [f64; K]
    where
        F: Fn(usize, usize, usize, [f64; 3]) -> [f64; K] + Sync,
    {
        let n = self.n;
        let h3 = self.h().powi(3);
        let sums = (margin..n - margin)
            .into_par_iter()
            .map(|i| {
                let mut acc = [0.0; K];
                for j in margin..n - margin {
                    for k in margin..n - margin {
                        let v = f(i, j, k, self.point(i, j, k));
                        for q in 0..K {
                            acc[q] += v[q];
                        }
                    }
                }
                acc
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold([0.0; K], |a, b| std::array::from_fn(|q| a[q] + b[q]));
        sums.map(|s| s * h3)
    }

    /// Largest value of `f` over nodes at distance `≥ margin` from the boundary.
    pub fn max_over<F>(&self, margin: usize, f: F) -> f64
    where
        F: Fn(usize, usize, usize, [f64; 3]) -> f64 + Sync,
    {
        let n = self.n;
        (margin..n - margin)
            .into_par_iter()
            .map(|i| {
                let mut best = f64::NEG_INFINITY;
                for j in margin..n - margin {
                    for k in margin..n - margin {
                        best = best.max(f(i, j, k, self.point(i, j, k)));
                    }
                }
                best
            })
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }

    /// `Σ |ψ|² h³` over the outer boundary layer of width `width`.
    pub fn layer_mass(&self, width: usize, f: impl Fn([f64; 3]) -> Sp + Sync) -> f64 {
        let n = self.n;
        let h3 = self.h().powi(3);
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        if self.in_layer(i, j, k, width) {
                            acc += sp_norm2(&f(self.point(i, j, k)));
                        }
                    }
                }
                acc
            })
            .collect::<Vec<f64>>()
            .into_iter()
            .sum::<f64>()
            * h3
    }
}

/// Anything that yields spinor values at grid nodes.
pub trait Source: Sync {
    fn at(&self, i: usize, j: usize, k: usize) -> Sp;
}

/// Closed-form function sampled on demand.
pub struct FnSource<'a, F: Fn([f64; 3]) -> Sp + Sync> {
    pub grid: &'a BoxGrid,
    pub f: F,
}

impl<F: Fn([f64; 3]) -> Sp + Sync> Source for FnSource<'_, F> {
    fn at(&self, i: usize, j: usize, k: usize) -> Sp {
        (self.f)(self.grid.point(i, j, k))
    }
}

/// Spinor field stored on every node.
#[derive(Clone, Debug)]
pub struct GridField {
    pub grid: BoxGrid,
    pub data: Vec<Sp>,
}

impl GridField {
    /// Fills every node at distance `≥ margin` from the boundary; the layer is left at zero.
    pub fn from_nodes(grid: &BoxGrid, margin: usize, f: impl Fn(usize, usize, usize) -> Sp + Sync) -> Self {
        let n = grid.n;
        let mut data = vec![SP_ZERO; grid.len()];
        data.par_chunks_mut(n * n).enumerate().for_each(|(i, plane)| {
            if i < margin || i >= n - margin {
                return;
            }
            for j in margin..n - margin {
                for k in margin..n - margin {
                    plane[j * n + k] = f(i, j, k);
                }
            }
        });
        GridField { grid: *grid, data }
    }
}

impl Source for GridField {
    fn at(&self, i: usize, j: usize, k: usize) -> Sp {
        self.data[self.grid.index(i, j, k)]
    }
}

fn offset(i: usize, j: usize, k: usize, axis: usize, s: isize) -> (usize, usize, usize) {
    let mv = |c: usize| (c as isize + s) as usize;
    match axis {
        0 => (mv(i), j, k),
        1 => (i, mv(j), k),
        _ => (i, j, mv(k)),
    }
}

/// Fourth-order central gradient `(−f₂ + 8f₁ − 8f₋₁ + f₋₂)/(12h)` along each axis.
pub fn stencil_grad(src: &impl Source, i: usize, j: usize, k: usize, h: f64) -> [Sp; 3] {
    std::array::from_fn(|axis| {
        let p1 = offset(i, j, k, axis, 1);
        let p2 = offset(i, j, k, axis, 2);
        let m1 = offset(i, j, k, axis, -1);
        let m2 = offset(i, j, k, axis, -2);
        let (f1, f2, g1, g2) = (src.at(p1.0, p1.1, p1.2), src.at(p2.0, p2.1, p2.2), src.at(m1.0, m1.1, m1.2), src.at(m2.0, m2.1, m2.2));
        std::array::from_fn(|c| (-f2[c] + 8.0 * f1[c] - 8.0 * g1[c] + g2[c]) / (12.0 * h))
    })
}

/// Gradient and Laplacian with the 4th-order stencils, sharing node evaluations.
pub fn stencil_grad_lap(src: &impl Source, i: usize, j: usize, k: usize, h: f64) -> (Sp, [Sp; 3], Sp) {
    let f0 = src.at(i, j, k);
    let mut grad = [SP_ZERO; 3];
    let mut lap = SP_ZERO;
    for axis in 0..3 {
        let p1 = offset(i, j, k, axis, 1);
        let p2 = offset(i, j, k, axis, 2);
        let m1 = offset(i, j, k, axis, -1);
        let m2 = offset(i, j, k, axis, -2);
        let (f1, f2, g1, g2) = (src.at(p1.0, p1.1, p1.2), src.at(p2.0, p2.1, p2.2), src.at(m1.0, m1.1, m1.2), src.at(m2.0, m2.1, m2.2));
        for c in 0..4 {
            grad[axis][c] = (-f2[c] + 8.0 * f1[c] - 8.0 * g1[c] + g2[c]) / (12.0 * h);
            lap[c] += (-f2[c] + 16.0 * f1[c] - 30.0 * f0[c] + 16.0 * g1[c] - g2[c]) / (12.0 * h * h);
        }
    }
    (f0, grad, lap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_exact_on_quartics() {
        let grid = BoxGrid::new(3, 1.0, 32).unwrap();
        let src = FnSource {
            grid: &grid,
            f: |x: [f64; 3]| {
                let v = x[0].powi(4) + x[1] * x[1] * x[2] - 2.0 * x[2].powi(3);
                [Complex64::new(v, 0.0), Complex64::new(0.0, v), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
            },
        };
        let (i, j, k) = (10, 12, 20);
        let x = grid.point(i, j, k);
        let (_, g, lap) = stencil_grad_lap(&src, i, j, k, grid.h());
        let exact_g = [4.0 * x[0].powi(3), 2.0 * x[1] * x[2], x[1] * x[1] - 6.0 * x[2] * x[2]];
        let exact_lap = 12.0 * x[0] * x[0] + 2.0 * x[2] - 12.0 * x[2];
        for a in 0..3 {
            assert!((g[a][0].re - exact_g[a]).abs() < 1e-11);
        }
        assert!((lap[0].re - exact_lap).abs() < 1e-9);
        assert!((lap[1].im - exact_lap).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_integrates_gaussian() {
        let grid = BoxGrid::new(3, 8.0, 64).unwrap();
        let [v] = grid.integrate(0, |_, _, _, x| [(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()]);
        assert!((v - std::f64::consts::PI.powf(1.5)).abs() < 1e-10);
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(BoxGrid::new(3, 8.0, 16).is_err());
        assert!(BoxGrid::new(4, 8.0, 64).is_err());
    }
}
