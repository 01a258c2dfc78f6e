//! Closed-form test spinors and smooth cutoff profiles.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::grid::{sp_norm2, BoxGrid, Sp, SP_ZERO};
use crate::error::{Error, Result};
use crate::fields::GaugeTerm;
use crate::linalg;

/// Transition profile of the bump `ξ`: `ξ = 1` on `t ≤ 1`, `ξ = 0` on `t ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffProfile {
    /// `1 − S(t−1)` with the degree-7 smoothstep `S(u) = 35u⁴ − 84u⁵ + 70u⁶ − 20u⁷` (C³).
    Smoothstep,
    /// `1 − F(t−1)` with `F(u) = f(u)/(f(u)+f(1−u))`, `f(u) = e^{−1/u}` (C^∞).
    Exponential,
}

fn smooth_exp(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

fn smooth_exp_d(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp() / (u * u)
    }
}

impl CutoffProfile {
    /// `ξ(t)` for `t ≥ 0`.
    pub fn xi(self, t: f64) -> f64 {
        if t <= 1.0 {
            return 1.0;
        }
        if t >= 2.0 {
            return 0.0;
        }
        let u = t - 1.0;
        match self {
            CutoffProfile::Smoothstep => 1.0 - u.powi(4) * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u.powi(3)),
            CutoffProfile::Exponential => {
                let (a, b) = (smooth_exp(u), smooth_exp(1.0 - u));
                1.0 - a / (a + b)
            }
        }
    }

    /// `ξ'(t)`.
    pub fn dxi(self, t: f64) -> f64 {
        if t <= 1.0 || t >= 2.0 {
            return 0.0;
        }
        let u = t - 1.0;
        match self {
            CutoffProfile::Smoothstep => -140.0 * u.powi(3) * (1.0 - u).powi(3),
            CutoffProfile::Exponential => {
                let (a, b) = (smooth_exp(u), smooth_exp(1.0 - u));
                let (da, db) = (smooth_exp_d(u), -smooth_exp_d(1.0 - u));
                -(da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
            }
        }
    }

    /// `sup |ξ'|`, located by a fine scan.
    pub fn max_slope(self) -> f64 {
        (0..=20_000).map(|i| self.dxi(1.0 + i as f64 / 20_000.0).abs()).fold(0.0, f64::max)
    }
}

/// Scalar envelope multiplying a constant spinor direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Envelope {
    /// `exp(−|x−c|²/(2w²))`
    Gaussian { center: [f64; 3], width: f64 },
    /// `((x−c)·e)^degree · exp(−|x−c|²/(2w²))`
    PolyGaussian { center: [f64; 3], width: f64, dir: [f64; 3], degree: u32 },
    /// `ξ(|x|/R)`, identically 1 on the ball of radius `R`.
    Plateau { radius: f64 },
}

impl Envelope {
    fn eval(&self, x: &[f64; 3]) -> (f64, [f64; 3]) {
        match self {
            Envelope::Gaussian { center, width } => {
                let y: [f64; 3] = std::array::from_fn(|a| x[a] - center[a]);
                let w2 = width * width;
                let g = (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / (2.0 * w2)).exp();
                (g, y.map(|v| -v / w2 * g))
            }
            Envelope::PolyGaussian { center, width, dir, degree } => {
                let y: [f64; 3] = std::array::from_fn(|a| x[a] - center[a]);
                let w2 = width * width;
                let g = (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / (2.0 * w2)).exp();
                let s: f64 = (0..3).map(|a| y[a] * dir[a]).sum();
                let p = s.powi(*degree as i32);
                let dp = if *degree == 0 { 0.0 } else { *degree as f64 * s.powi(*degree as i32 - 1) };
                (p * g, std::array::from_fn(|a| dp * dir[a] * g - p * y[a] / w2 * g))
            }
            Envelope::Plateau { radius } => {
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let t = r / radius;
                let v = CutoffProfile::Exponential.xi(t);
                let dv = CutoffProfile::Exponential.dxi(t);
                if dv == 0.0 || r == 0.0 {
                    (v, [0.0; 3])
                } else {
                    (v, x.map(|c| dv / radius * c / r))
                }
            }
        }
    }

    /// Radius beyond which the envelope is below `1e-16` relative to its peak (`None` if unbounded).
    fn reach(&self) -> f64 {
        match self {
            Envelope::Gaussian { center, width } | Envelope::PolyGaussian { center, width, .. } => {
                let c = (center[0] * center[0] + center[1] * center[1] + center[2] * center[2]).sqrt();
                c + 9.0 * width
            }
            Envelope::Plateau { radius } => 2.0 * radius,
        }
    }
}

/// One term `u·e^{ik·x}·envelope(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinorTerm {
    pub u: [Complex64; 4],
    pub k: [f64; 3],
    pub envelope: Envelope,
}

/// Closed-form spinor `ψ = e^{iχ}·η·Σ u·e^{ik·x}·envelope`, where `η = 1 − ξ(|x|/r₀)`
/// vanishes on the exclusion ball of radius `r₀` when one is set. `ξ` is the C∞ exponential profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestSpinor {
    pub terms: Vec<SpinorTerm>,
    /// Radius `r₀` of the ball around the origin on which `ψ` vanishes.
    pub exclusion: Option<f64>,
    #[serde(skip)]
    pub gauge: Option<GaugeTerm>,
    /// Use analytic derivatives instead of stencils where a check allows either.
    pub analytic: bool,
}

impl TestSpinor {
    pub fn gaussian(center: [f64; 3], width: f64, u: [Complex64; 4]) -> Self {
        TestSpinor {
            terms: vec![SpinorTerm { u, k: [0.0; 3], envelope: Envelope::Gaussian { center, width } }],
            exclusion: None,
            gauge: None,
            analytic: false,
        }
    }

    pub fn with_exclusion(mut self, r0: f64) -> Self {
        self.exclusion = Some(r0);
        self
    }

    pub fn with_gauge(mut self, gauge: GaugeTerm) -> Self {
        self.gauge = Some(gauge);
        self
    }

    pub fn with_analytic(mut self, analytic: bool) -> Self {
        self.analytic = analytic;
        self
    }

    /// Random spinor: 1–3 Gaussian or polynomial-Gaussian terms with random centers in
    /// `|c| ≤ spread`, widths in `[w_lo, w_hi]` and random unit spinor directions.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, spread: f64, w_lo: f64, w_hi: f64) -> Self {
        let count = 1 + (linalg::uniform(rng, 0.0, 3.0) as usize).min(2);
        let terms = (0..count)
            .map(|_| {
                let c = linalg::random_unit_vector(rng, 3);
                let rad = linalg::uniform(rng, 0.0, spread);
                let center = [c[0] * rad, c[1] * rad, c[2] * rad];
                let width = linalg::uniform(rng, w_lo, w_hi);
                let v = linalg::random_unit_vector(rng, 8);
                let u = std::array::from_fn(|i| Complex64::new(v[2 * i], v[2 * i + 1]));
                let envelope = if linalg::uniform(rng, 0.0, 1.0) < 0.5 {
                    Envelope::Gaussian { center, width }
                } else {
                    let e = linalg::random_unit_vector(rng, 3);
                    Envelope::PolyGaussian { center, width, dir: [e[0], e[1], e[2]], degree: 1 + (linalg::uniform(rng, 0.0, 2.0) as u32).min(1) }
                };
                SpinorTerm { u, k: [0.0; 3], envelope }
            })
            .collect();
        TestSpinor { terms, exclusion: None, gauge: None, analytic: false }
    }

    /// Value and analytic gradient `(ψ, [∂₁ψ, ∂₂ψ, ∂₃ψ])`.
    pub fn eval(&self, x: [f64; 3]) -> (Sp, [Sp; 3]) {
        let mut v = SP_ZERO;
        let mut g = [SP_ZERO; 3];
        for t in &self.terms {
            let (e, de) = t.envelope.eval(&x);
            let phase_arg: f64 = (0..3).map(|a| t.k[a] * x[a]).sum();
            let ph = Complex64::from_polar(1.0, phase_arg);
            let s = ph * e;
            let ds: [Complex64; 3] = std::array::from_fn(|a| ph * (de[a] + Complex64::new(0.0, t.k[a]) * e));
            for c in 0..4 {
                v[c] += t.u[c] * s;
                for a in 0..3 {
                    g[a][c] += t.u[c] * ds[a];
                }
            }
        }
        if let Some(r0) = self.exclusion {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let eta = 1.0 - CutoffProfile::Exponential.xi(r / r0);
            let deta = -CutoffProfile::Exponential.dxi(r / r0) / r0;
            for a in 0..3 {
                let dr = if r > 0.0 { x[a] / r } else { 0.0 };
                for c in 0..4 {
                    g[a][c] = g[a][c] * eta + v[c] * deta * dr;
                }
            }
            for c in v.iter_mut() {
                *c *= eta;
            }
        }
        if let Some(gauge) = &self.gauge {
            let ph = Complex64::from_polar(1.0, gauge.chi(&x));
            let dchi = gauge.grad_chi(&x);
            for a in 0..3 {
                for c in 0..4 {
                    g[a][c] = ph * (g[a][c] + Complex64::new(0.0, dchi[a]) * v[c]);
                }
            }
            for c in v.iter_mut() {
                *c *= ph;
            }
        }
        (v, g)
    }

    pub fn value(&self, x: [f64; 3]) -> Sp {
        self.eval(x).0
    }

    /// Radius outside which `ψ` is negligible.
    pub fn reach(&self) -> f64 {
        self.terms.iter().map(|t| t.envelope.reach()).fold(0.0, f64::max)
    }

    /// `Σ|ψ|²h³` on the boundary layer of width `width`.
    pub fn boundary_mass(&self, grid: &BoxGrid, width: usize) -> f64 {
        grid.layer_mass(width, |x| self.value(x))
    }

    /// Largest `|ψ|` on the boundary layer of width `width`.
    pub fn boundary_max(&self, grid: &BoxGrid, width: usize) -> f64 {
        let n = grid.n;
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if grid.in_layer(i, j, k, width) {
                        best = best.max(sp_norm2(&self.value(grid.point(i, j, k))).sqrt());
                    }
                }
            }
        }
        best
    }

    /// Rejects spinors with boundary-layer mass above `limit`.
    pub fn require_compact(&self, grid: &BoxGrid, width: usize, limit: f64) -> Result<()> {
        let mass = self.boundary_mass(grid, width);
        if mass > limit {
            return Err(Error::BoundaryMass { mass, limit });
        }
        Ok(())
    }

    /// `‖ψ‖²` by trapezoid quadrature over the interior.
    pub fn norm2(&self, grid: &BoxGrid, margin: usize) -> f64 {
        let [v] = grid.integrate(margin, |_, _, _, x| [sp_norm2(&self.value(x))]);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_profiles_are_monotone_bumps() {
        for p in [CutoffProfile::Smoothstep, CutoffProfile::Exponential] {
            assert_eq!(p.xi(0.5), 1.0);
            assert_eq!(p.xi(2.5), 0.0);
            let mut prev = 1.0;
            for i in 0..=100 {
                let v = p.xi(1.0 + i as f64 / 100.0);
                assert!(v <= prev + 1e-15);
                prev = v;
                let t = 1.0 + (i as f64 + 0.5) / 101.0;
                let fd = (p.xi(t + 1e-6) - p.xi(t - 1e-6)) / 2e-6;
                assert!((fd - p.dxi(t)).abs() < 1e-6);
            }
        }
        assert!((CutoffProfile::Smoothstep.max_slope() - 35.0 / 16.0).abs() < 1e-6);
    }

    #[test]
    fn analytic_gradient_matches_differences() {
        let mut s = TestSpinor::gaussian([0.3, -0.2, 0.5], 0.9, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5), Complex64::new(0.2, 0.0), Complex64::new(0.0, 0.0)])
            .with_exclusion(0.4)
            .with_gauge(GaugeTerm { amp: 0.3, k: vec![0.5, -0.2, 0.1], quad: 0.2 });
        s.terms.push(SpinorTerm {
            u: [Complex64::new(0.0, 1.0); 4],
            k: [0.2, 0.0, -0.4],
            envelope: Envelope::PolyGaussian { center: [0.0; 3], width: 1.2, dir: [0.0, 0.6, 0.8], degree: 2 },
        });
        let x = [0.35, 0.1, -0.2];
        let (_, g) = s.eval(x);
        let h = 1e-6;
        for a in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[a] += h;
            xm[a] -= h;
            let (vp, vm) = (s.value(xp), s.value(xm));
            for c in 0..4 {
                assert!(((vp[c] - vm[c]) / (2.0 * h) - g[a][c]).norm() < 1e-7);
            }
        }
    }
}
