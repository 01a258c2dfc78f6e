//! Dirac-type operators applied on a [`BoxGrid`].

use num_complex::Complex64;

use super::grid::{mv, stencil_grad, stencil_grad_lap, to_m4, BoxGrid, FnSource, GridField, Source, Sp, M4, SP_ZERO, STENCIL_REACH};
use super::spinor::TestSpinor;
use crate::clifford::NumericRep;
use crate::error::{Error, Result};
use crate::fields::{self, MagneticSpec, PotentialSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The d = 3 Dirac matrices as fixed-size arrays.
#[derive(Clone, Copy, Debug)]
pub struct DiracOps {
    pub alpha: [M4; 3],
    pub beta: M4,
}

impl DiracOps {
    pub fn new(rep: &NumericRep) -> Result<Self> {
        if rep.d != 3 {
            return Err(Error::DimensionOutOfRange { d: rep.d, min: 3, max: 3 });
        }
        Ok(DiracOps {
            alpha: [to_m4(&rep.alphas[0])?, to_m4(&rep.alphas[1])?, to_m4(&rep.alphas[2])?],
            beta: to_m4(&rep.beta)?,
        })
    }

    /// `Σ_k −iα_k D_k + mβψ` for given covariant derivatives `D_k`.
    pub fn dirac(&self, dpsi: &[Sp; 3], psi: &Sp, m: f64) -> Sp {
        let mut out = mv(&self.beta, psi).map(|v| v * m);
        for k in 0..3 {
            let t = mv(&self.alpha[k], &dpsi[k]);
            for c in 0..4 {
                out[c] -= I * t[c];
            }
        }
        out
    }
}

pub(crate) fn is_zero(s: &Sp) -> bool {
    s.iter().all(|v| v.re == 0.0 && v.im == 0.0)
}

/// `A(x)` as an array; NaN when the field cannot be evaluated.
pub(crate) fn a_at(aspec: &MagneticSpec, x: [f64; 3]) -> [f64; 3] {
    if matches!(aspec.kind, fields::MagneticKind::Zero) && aspec.gauge.is_none() {
        return [0.0; 3];
    }
    match aspec.a(&x) {
        Ok(a) => [a[0], a[1], a[2]],
        Err(_) => [f64::NAN; 3],
    }
}

pub(crate) fn div_a_at(aspec: &MagneticSpec, x: [f64; 3]) -> f64 {
    if matches!(aspec.kind, fields::MagneticKind::Zero) && aspec.gauge.is_none() {
        return 0.0;
    }
    aspec.div_a(&x).unwrap_or(f64::NAN)
}

/// `V(x)` as an array; NaN when the potential cannot be evaluated.
pub(crate) fn v_at(vspec: &PotentialSpec, rep: &NumericRep, x: [f64; 3]) -> M4 {
    fields::eval_potential(vspec, rep, &x)
        .and_then(|m| to_m4(&m))
        .unwrap_or([[Complex64::new(f64::NAN, 0.0); 4]; 4])
}

/// `∂_kψ − iA_kψ`.
pub(crate) fn covariant(grad: &[Sp; 3], psi: &Sp, a: [f64; 3]) -> [Sp; 3] {
    std::array::from_fn(|k| std::array::from_fn(|c| grad[k][c] - I * a[k] * psi[c]))
}

/// `Δ_Aψ = Δψ − 2iA·∇ψ − i(div A)ψ − |A|²ψ`.
pub(crate) fn magnetic_laplacian(lap: &Sp, grad: &[Sp; 3], psi: &Sp, a: [f64; 3], div_a: f64) -> Sp {
    let a2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    std::array::from_fn(|c| {
        let adg: Complex64 = (0..3).map(|k| a[k] * grad[k][c]).sum();
        lap[c] - 2.0 * I * adg - I * div_a * psi[c] - a2 * psi[c]
    })
}

/// Value and gradient of `ψ` at a node, analytic or by stencil per the spinor's flag.
pub(crate) fn psi_and_grad(psi: &TestSpinor, grid: &BoxGrid, i: usize, j: usize, k: usize) -> (Sp, [Sp; 3]) {
    if psi.analytic {
        psi.eval(grid.point(i, j, k))
    } else {
        let src = FnSource { grid, f: |x| psi.value(x) };
        (src.at(i, j, k), stencil_grad(&src, i, j, k, grid.h()))
    }
}

/// Value, gradient and Laplacian of `ψ` by stencils (the gradient is analytic when flagged).
pub(crate) fn psi_grad_lap(psi: &TestSpinor, grid: &BoxGrid, i: usize, j: usize, k: usize) -> (Sp, [Sp; 3], Sp) {
    let src = FnSource { grid, f: |x| psi.value(x) };
    let (v, g, lap) = stencil_grad_lap(&src, i, j, k, grid.h());
    if psi.analytic {
        (v, psi.eval(grid.point(i, j, k)).1, lap)
    } else {
        (v, g, lap)
    }
}

pub(crate) fn check_grid(grid: &BoxGrid, aspec: &MagneticSpec) -> Result<()> {
    if aspec.d != grid.d {
        return Err(Error::Mismatch(format!("magnetic field has d = {}, grid has d = {}", aspec.d, grid.d)));
    }
    aspec.validate()
}

pub(crate) fn require_finite(field: &GridField, what: &str) -> Result<()> {
    if field.data.iter().all(|s| s.iter().all(|v| v.re.is_finite() && v.im.is_finite())) {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!("{what}: field evaluation failed on the grid (singular point inside the support?)")))
    }
}

/// `(−iα·∇_A + mβ)` applied to any grid source; nodes closer than `margin` to the boundary are left at zero.
pub fn apply_dirac_source(ops: &DiracOps, aspec: &MagneticSpec, m: f64, src: &impl Source, grid: &BoxGrid, margin: usize) -> GridField {
    let h = grid.h();
    GridField::from_nodes(grid, margin, |i, j, k| {
        let psi = src.at(i, j, k);
        let grad = stencil_grad(src, i, j, k, h);
        let a = if is_zero(&psi) { [0.0; 3] } else { a_at(aspec, grid.point(i, j, k)) };
        ops.dirac(&covariant(&grad, &psi, a), &psi, m)
    })
}

/// `H_m(A)ψ = (−iα·∇_A + mβ)ψ` on the grid with the boundary layer of width [`STENCIL_REACH`] left at zero.
pub fn apply_dirac(rep: &NumericRep, aspec: &MagneticSpec, m: f64, psi: &TestSpinor, grid: &BoxGrid) -> Result<GridField> {
    check_grid(grid, aspec)?;
    let ops = DiracOps::new(rep)?;
    let field = GridField::from_nodes(grid, STENCIL_REACH, |i, j, k| {
        let (v, grad) = psi_and_grad(psi, grid, i, j, k);
        let a = if is_zero(&v) { [0.0; 3] } else { a_at(aspec, grid.point(i, j, k)) };
        ops.dirac(&covariant(&grad, &v, a), &v, m)
    });
    require_finite(&field, "apply_dirac")?;
    Ok(field)
}

/// Spinor `Vψ` sampled on demand, zero wherever `ψ` vanishes.
pub(crate) fn v_times(vspec: &PotentialSpec, rep: &NumericRep, psi: &TestSpinor, x: [f64; 3]) -> Sp {
    let p = psi.value(x);
    if is_zero(&p) {
        return SP_ZERO;
    }
    mv(&v_at(vspec, rep, x), &p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::DiracRep;
    use crate::fields::GaugeTerm;

    fn rep() -> NumericRep {
        DiracRep::new(3).unwrap().to_numeric()
    }

    #[test]
    fn plane_wave_matches_fourier_symbol() {
        let grid = BoxGrid::new(3, 8.0, 64).unwrap();
        let u = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.3), Complex64::new(0.2, 0.0), Complex64::new(0.0, -0.1)];
        let mut psi = TestSpinor::gaussian([0.0; 3], 1.0, u);
        psi.terms[0].envelope = super::super::spinor::Envelope::Plateau { radius: 4.0 };
        psi.terms[0].k = [0.3, -0.2, 0.5];
        psi.analytic = true;
        let r = rep();
        let ops = DiracOps::new(&r).unwrap();
        let m = 0.7;
        let out = apply_dirac(&r, &MagneticSpec::zero(3), m, &psi, &grid).unwrap();
        let (i, j, k) = (30, 33, 35);
        let x = grid.point(i, j, k);
        let ph = Complex64::from_polar(1.0, 0.3 * x[0] - 0.2 * x[1] + 0.5 * x[2]);
        let mut sym = mv(&ops.beta, &u).map(|v| v * m);
        for a in 0..3 {
            let t = mv(&ops.alpha[a], &u);
            for c in 0..4 {
                sym[c] += psi.terms[0].k[a] * t[c];
            }
        }
        let got = out.data[grid.index(i, j, k)];
        for c in 0..4 {
            assert!((got[c] - sym[c] * ph).norm() < 1e-12);
        }
    }

    #[test]
    fn gauge_covariance_is_exact_with_analytic_gradients() {
        let grid = BoxGrid::new(3, 6.0, 40).unwrap();
        let r = rep();
        let u = [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5), Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)];
        let psi = TestSpinor::gaussian([0.5, 0.0, -0.3], 1.2, u).with_analytic(true);
        let gauge = GaugeTerm { amp: 0.4, k: vec![0.3, 0.1, -0.2], quad: 0.05 };
        let aspec = MagneticSpec::rotational(0.5, 0.0).unwrap();
        let base = apply_dirac(&r, &aspec, 1.0, &psi, &grid).unwrap();
        let moved = apply_dirac(&r, &aspec.clone().with_gauge(gauge.clone()).unwrap(), 1.0, &psi.clone().with_gauge(gauge.clone()), &grid).unwrap();
        let mut worst: f64 = 0.0;
        for i in 2..grid.n - 2 {
            for j in 2..grid.n - 2 {
                for k in 2..grid.n - 2 {
                    let x = grid.point(i, j, k);
                    let ph = Complex64::from_polar(1.0, gauge.chi(&x));
                    let idx = grid.index(i, j, k);
                    for c in 0..4 {
                        worst = worst.max((moved.data[idx][c] - ph * base.data[idx][c]).norm());
                    }
                }
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }
}
