//! Quadrature checks of the operator identities on box grids.

use num_complex::Complex64;
use serde::Serialize;

use super::grid::{mm, mv, sp_dot, sp_norm2, stencil_grad, BoxGrid, FnSource, GridField, Source, Sp, M4, SP_ZERO, STENCIL_REACH};
use super::ops::{self, a_at, covariant, div_a_at, is_zero, magnetic_laplacian, psi_and_grad, psi_grad_lap, v_at, v_times, DiracOps};
use super::spinor::TestSpinor;
use crate::clifford::NumericRep;
use crate::error::{Error, Result};
use crate::fields::{self, MagneticSpec, PotentialSpec};
use crate::serialize_extended;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest boundary-layer mass tolerated before integration by parts is considered invalid.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-10;

/// Grid description attached to a report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gridded {
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub h: f64,
}

impl From<&BoxGrid> for Gridded {
    fn from(g: &BoxGrid) -> Self {
        Gridded { l: g.l, n: g.n, h: g.h() }
    }
}

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub gridded: Option<Gridded>,
    #[serde(serialize_with = "serialize_extended")]
    pub lhs: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub rhs: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub rel_error: f64,
    pub order_estimate: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl IdentityReport {
    pub fn new(identity: impl Into<String>, grid: Option<&BoxGrid>, lhs: f64, rhs: f64, rel_error: f64, pass: bool) -> Self {
        IdentityReport {
            identity: identity.into(),
            gridded: grid.map(Gridded::from),
            lhs,
            rhs,
            rel_error,
            order_estimate: None,
            pass,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Observed convergence orders `ln(e_i/e_{i+1}) / ln(h_i/h_{i+1})` between successive grids.
pub fn observed_orders(hs: &[f64], errors: &[f64]) -> Vec<f64> {
    hs.windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

fn relative(a: f64, b: f64, scale: f64) -> f64 {
    let s = scale.abs().max(f64::MIN_POSITIVE);
    (a - b).abs() / s
}

fn require_compact(psi: &TestSpinor, grid: &BoxGrid) -> Result<()> {
    psi.require_compact(grid, 2 * STENCIL_REACH, BOUNDARY_MASS_LIMIT)
}

/// `Σ_{jk} B_jk α_j α_k` with `B` supplied as an antisymmetric matrix.
fn alpha_b_alpha(ops: &DiracOps, b: &nalgebra::DMatrix<f64>) -> M4 {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for j in 0..3 {
        for k in 0..3 {
            if b[(j, k)] == 0.0 {
                continue;
            }
            let p = mm(&ops.alpha[j], &ops.alpha[k]);
            for r in 0..4 {
                for c in 0..4 {
                    out[r][c] += b[(j, k)] * p[r][c];
                }
            }
        }
    }
    out
}

fn b_at(aspec: &MagneticSpec, x: [f64; 3]) -> nalgebra::DMatrix<f64> {
    if aspec.is_zero() {
        return nalgebra::DMatrix::zeros(3, 3);
    }
    aspec.b(&x).unwrap_or_else(|_| nalgebra::DMatrix::from_element(3, 3, f64::NAN))
}

fn finite_or(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!("{what}: non-finite quadrature (singular field inside the support?)")))
    }
}

// ---------------------------------------------------------------------------
// Squaring identity

/// Norms from one squaring check on one grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SquaringSample {
    pub h: f64,
    /// `‖H_m(A)²ψ‖`
    pub lhs: f64,
    /// `‖(−Δ_A + (i/2)α·B·α + m²)ψ‖`
    pub rhs: f64,
    /// `‖residual‖ / ‖ψ‖`
    pub rel_residual: f64,
}

/// Residual of `H_m(A)²ψ = −Δ_Aψ + c·(α·B·α)ψ + m²ψ` for a given coefficient `c`.
pub(crate) fn squaring_sample(rep: &NumericRep, aspec: &MagneticSpec, m: f64, psi: &TestSpinor, grid: &BoxGrid, coef: Complex64) -> Result<SquaringSample> {
    ops::check_grid(grid, aspec)?;
    require_compact(psi, grid)?;
    let dops = DiracOps::new(rep)?;
    let plain = psi.clone().with_analytic(false);
    let first = ops::apply_dirac(rep, aspec, m, &plain, grid)?;
    let h = grid.h();
    let [res2, lhs2, rhs2, psi2] = grid.integrate(2 * STENCIL_REACH, |i, j, k, x| {
        let (v, g, lap) = psi_grad_lap(&plain, grid, i, j, k);
        let f = first.at(i, j, k);
        let fg = stencil_grad(&first, i, j, k, h);
        if is_zero(&v) && is_zero(&f) && fg.iter().all(is_zero) {
            return [0.0; 4];
        }
        let a = a_at(aspec, x);
        let lhs = dops.dirac(&covariant(&fg, &f, a), &f, m);
        let lap_a = magnetic_laplacian(&lap, &g, &v, a, div_a_at(aspec, x));
        let bterm = mv(&alpha_b_alpha(&dops, &b_at(aspec, x)), &v);
        let rhs: Sp = std::array::from_fn(|c| -lap_a[c] + coef * bterm[c] + m * m * v[c]);
        let r: Sp = std::array::from_fn(|c| lhs[c] - rhs[c]);
        [sp_norm2(&r), sp_norm2(&lhs), sp_norm2(&rhs), sp_norm2(&v)]
    });
    finite_or(&[res2, lhs2, rhs2, psi2], "squaring identity")?;
    if psi2 == 0.0 {
        return Err(Error::InvalidProblem("test spinor vanishes on the grid".into()));
    }
    Ok(SquaringSample { h, lhs: lhs2.sqrt(), rhs: rhs2.sqrt(), rel_residual: (res2 / psi2).sqrt() })
}

/// `H_m(A)²ψ` against `−Δ_Aψ + (i/2)(α·B·α)ψ + m²ψ` with `∇_A = ∇ − iA` and
/// `B_jk = ∂_jA_k − ∂_kA_j`, on each grid in turn.
///
/// The report carries the finest-grid residual `‖r‖/‖ψ‖` and the smallest observed order;
/// it passes when every observed order is at least `min_order` (or the residual is at round-off).
pub fn verify_squaring(rep: &NumericRep, aspec: &MagneticSpec, m: f64, psi: &TestSpinor, grids: &[BoxGrid], min_order: f64) -> Result<(IdentityReport, Vec<SquaringSample>)> {
    squaring_with(rep, aspec, m, psi, grids, min_order, Complex64::new(0.0, 0.5), "squaring")
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn squaring_with(
    rep: &NumericRep,
    aspec: &MagneticSpec,
    m: f64,
    psi: &TestSpinor,
    grids: &[BoxGrid],
    min_order: f64,
    coef: Complex64,
    name: &str,
) -> Result<(IdentityReport, Vec<SquaringSample>)> {
    if grids.is_empty() {
        return Err(Error::InvalidProblem("at least one grid is required".into()));
    }
    let samples = grids.iter().map(|g| squaring_sample(rep, aspec, m, psi, g, coef)).collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = samples.iter().map(|s| s.h).collect();
    let errs: Vec<f64> = samples.iter().map(|s| s.rel_residual).collect();
    let orders = observed_orders(&hs, &errs);
    let last = samples.last().expect("non-empty");
    let roundoff = last.rel_residual < 1e-11;
    let order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = roundoff || (!orders.is_empty() && order >= min_order);
    let mut report = IdentityReport::new(name, grids.last(), last.lhs, last.rhs, last.rel_residual, pass);
    report.order_estimate = if orders.is_empty() { None } else { Some(order) };
    report.notes.push(format!("residual per grid: {errs:?}"));
    Ok((report, samples))
}

// ---------------------------------------------------------------------------
// Multiplier identities

/// Hermitian matrix field `M` for the second multiplier identity.
#[derive(Clone, Debug, PartialEq)]
pub enum MultiplierMatrix {
    /// `M(x) = base`.
    Uniform(M4),
    /// `M(x) = base / (1 + |x|²)`, with `x·∇M = −2|x|²/(1+|x|²)²·base`.
    Lorentzian(M4),
}

impl MultiplierMatrix {
    fn value(&self, x: [f64; 3]) -> M4 {
        match self {
            MultiplierMatrix::Uniform(b) => *b,
            MultiplierMatrix::Lorentzian(b) => {
                let s = 1.0 / (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
                b.map(|row| row.map(|v| v * s))
            }
        }
    }

    fn radial_derivative(&self, x: [f64; 3]) -> M4 {
        match self {
            MultiplierMatrix::Uniform(_) => [[Complex64::new(0.0, 0.0); 4]; 4],
            MultiplierMatrix::Lorentzian(b) => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                let s = -2.0 * r2 / ((1.0 + r2) * (1.0 + r2));
                b.map(|row| row.map(|v| v * s))
            }
        }
    }

    fn base(&self) -> &M4 {
        match self {
            MultiplierMatrix::Uniform(b) | MultiplierMatrix::Lorentzian(b) => b,
        }
    }
}

/// Which multiplier identity to check.
#[derive(Clone, Debug, PartialEq)]
pub enum Multiplier {
    /// `Re⟨2x·∇_Aψ + dψ, −Δ_Aψ⟩ = 2‖∇_Aψ‖² − 2Im∫x_k B_jk ψ*∂^A_jψ`.
    Magnetic,
    /// `Re⟨2x·∇ψ + dψ, Mψ⟩ = −⟨ψ, (x·∇M)ψ⟩`.
    Matrix(MultiplierMatrix),
    /// `Re⟨2x·∇ψ + dψ, cψ⟩ = 0`.
    Constant(f64),
}

impl Multiplier {
    pub fn index(&self) -> u8 {
        match self {
            Multiplier::Magnetic => 1,
            Multiplier::Matrix(_) => 2,
            Multiplier::Constant(_) => 3,
        }
    }
}

/// Both sides of a multiplier identity on one grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MultiplierSample {
    pub h: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Right side with the opposite sign on the `B` term (zero difference when `B = 0`).
    pub rhs_flipped_b: f64,
    pub rel_error: f64,
}

/// Evaluates both sides of the selected multiplier identity by quadrature on `grid`.
pub fn multiplier_sample(which: &Multiplier, aspec: &MagneticSpec, psi: &TestSpinor, grid: &BoxGrid) -> Result<MultiplierSample> {
    ops::check_grid(grid, aspec)?;
    require_compact(psi, grid)?;
    if let Multiplier::Matrix(m) = which {
        let dev = (0..4).flat_map(|r| (0..4).map(move |c| (r, c))).map(|(r, c)| (m.base()[r][c] - m.base()[c][r].conj()).norm()).fold(0.0, f64::max);
        if dev > 1e-12 {
            return Err(Error::NotHermitian { deviation: dev, tolerance: 1e-12 });
        }
    }
    let d = grid.d as f64;
    let free = MagneticSpec::zero(grid.d);
    let field = if matches!(which, Multiplier::Magnetic) { aspec } else { &free };
    let [lhs, grad2, cross, scale] = grid.integrate(STENCIL_REACH, |i, j, k, x| {
        let (v, g, lap) = psi_grad_lap(psi, grid, i, j, k);
        if is_zero(&v) && g.iter().all(is_zero) {
            return [0.0; 4];
        }
        let a = a_at(field, x);
        let dpsi = covariant(&g, &v, a);
        let mult: Sp = std::array::from_fn(|c| (0..3).map(|q| 2.0 * x[q] * dpsi[q][c]).sum::<Complex64>() + d * v[c]);
        match which {
            Multiplier::Magnetic => {
                let lap_a = magnetic_laplacian(&lap, &g, &v, a, div_a_at(field, x));
                let neg: Sp = lap_a.map(|z| -z);
                let b = b_at(field, x);
                let mut cross = 0.0;
                for jj in 0..3 {
                    for kk in 0..3 {
                        if b[(jj, kk)] != 0.0 {
                            cross += x[kk] * b[(jj, kk)] * sp_dot(&v, &dpsi[jj]).im;
                        }
                    }
                }
                let g2: f64 = dpsi.iter().map(sp_norm2).sum();
                [sp_dot(&mult, &neg).re, g2, cross, 0.0]
            }
            Multiplier::Matrix(m) => {
                let mpsi = mv(&m.value(x), &v);
                let rhs = sp_dot(&v, &mv(&m.radial_derivative(x), &v)).re;
                [sp_dot(&mult, &mpsi).re, -rhs, 0.0, 0.0]
            }
            Multiplier::Constant(c) => [sp_dot(&mult, &v).re * c, 0.0, 0.0, d * c.abs() * sp_norm2(&v)],
        }
    });
    finite_or(&[lhs, grad2, cross, scale], "multiplier identity")?;
    let (rhs, flipped, ref_scale) = match which {
        Multiplier::Magnetic => (2.0 * grad2 - 2.0 * cross, 2.0 * grad2 + 2.0 * cross, 2.0 * grad2),
        Multiplier::Matrix(_) => (grad2, grad2, grad2),
        Multiplier::Constant(_) => (0.0, 0.0, scale),
    };
    let denom = if matches!(which, Multiplier::Constant(_)) { ref_scale } else { rhs.abs().max(ref_scale.abs()) };
    Ok(MultiplierSample { h: grid.h(), lhs, rhs, rhs_flipped_b: flipped, rel_error: relative(lhs, rhs, denom) })
}

/// Multiplier identity on a sequence of grids; passes when the finest relative discrepancy is
/// at most `tol` and, with two or more grids, the discrepancy falls by at least `min_drop`
/// between successive grids (or is already at round-off).
pub fn verify_multiplier(which: &Multiplier, aspec: &MagneticSpec, psi: &TestSpinor, grids: &[BoxGrid], tol: f64, min_drop: f64) -> Result<(IdentityReport, Vec<MultiplierSample>)> {
    if grids.is_empty() {
        return Err(Error::InvalidProblem("at least one grid is required".into()));
    }
    let samples = grids.iter().map(|g| multiplier_sample(which, aspec, psi, g)).collect::<Result<Vec<_>>>()?;
    let last = *samples.last().expect("non-empty");
    let drops_ok = samples.windows(2).all(|w| w[1].rel_error < 1e-13 || w[0].rel_error >= min_drop * w[1].rel_error);
    let pass = last.rel_error <= tol && drops_ok;
    let mut report = IdentityReport::new(format!("mult-{}", which.index()), grids.last(), last.lhs, last.rhs, last.rel_error, pass);
    if samples.len() > 1 {
        let hs: Vec<f64> = samples.iter().map(|s| s.h).collect();
        let errs: Vec<f64> = samples.iter().map(|s| s.rel_error).collect();
        report.order_estimate = observed_orders(&hs, &errs).into_iter().reduce(f64::min);
        report.notes.push(format!("relative error per grid: {errs:?}"));
    }
    Ok((report, samples))
}

// ---------------------------------------------------------------------------
// Anticommutator expansion

fn require_origin_free(psi: &TestSpinor, vspec: &PotentialSpec, grid: &BoxGrid, min_cells: f64) -> Result<()> {
    if !vspec.singular_at_origin() {
        return Ok(());
    }
    match psi.exclusion {
        Some(r0) if r0 >= min_cells * grid.h() => Ok(()),
        _ => Err(Error::SupportTouchesOrigin),
    }
}

fn anticommute(a: &M4, b: &M4) -> M4 {
    let (p, q) = (mm(a, b), mm(b, a));
    std::array::from_fn(|r| std::array::from_fn(|c| p[r][c] + q[r][c]))
}

/// Checks `{H_m(A), V}ψ = (−i{α_k,V}∂^A_k − i(α·∇V) + m{β,V})ψ` with analytic `∇V`, and the
/// algebraic expansion `(H_m(A)+V)²ψ = (H_m(A)² + V² + {H_m(A),V})ψ` of the discrete operators.
///
/// A potential singular at the origin requires a spinor with an exclusion radius of at least `4h`.
pub fn verify_anticommutator_expansion(rep: &NumericRep, aspec: &MagneticSpec, vspec: &PotentialSpec, m: f64, psi: &TestSpinor, grid: &BoxGrid, tol: f64) -> Result<[IdentityReport; 2]> {
    ops::check_grid(grid, aspec)?;
    require_compact(psi, grid)?;
    require_origin_free(psi, vspec, grid, 4.0)?;
    let dops = DiracOps::new(rep)?;
    let plain = psi.clone().with_analytic(false);
    let h = grid.h();
    let vpsi_src = FnSource { grid, f: |x| v_times(vspec, rep, &plain, x) };

    let [res1, rhs1] = grid.integrate(STENCIL_REACH, |i, j, k, x| {
        let (v, g) = psi_and_grad(&plain, grid, i, j, k);
        let vp = vpsi_src.at(i, j, k);
        let vg = stencil_grad(&vpsi_src, i, j, k, h);
        if is_zero(&v) && g.iter().all(is_zero) && is_zero(&vp) && vg.iter().all(is_zero) {
            return [0.0; 2];
        }
        let a = a_at(aspec, x);
        let dpsi = covariant(&g, &v, a);
        let vm = v_at(vspec, rep, x);
        let lhs_a = dops.dirac(&covariant(&vg, &vp, a), &vp, m);
        let lhs_b = mv(&vm, &dops.dirac(&dpsi, &v, m));
        let grad_v = match fields::eval_grad_potential(vspec, rep, &x) {
            Ok(gv) => gv,
            Err(_) => return [f64::NAN; 2],
        };
        let mut rhs = mv(&anticommute(&dops.beta, &vm), &v).map(|z| z * m);
        for q in 0..3 {
            let t = mv(&anticommute(&dops.alpha[q], &vm), &dpsi[q]);
            let dv = match super::grid::to_m4(&grad_v[q]) {
                Ok(dv) => dv,
                Err(_) => return [f64::NAN; 2],
            };
            let s = mv(&mm(&dops.alpha[q], &dv), &v);
            for c in 0..4 {
                rhs[c] -= I * (t[c] + s[c]);
            }
        }
        let r: Sp = std::array::from_fn(|c| lhs_a[c] + lhs_b[c] - rhs[c]);
        [sp_norm2(&r), sp_norm2(&rhs)]
    });
    finite_or(&[res1, rhs1], "anticommutator expansion")?;
    let rel1 = (res1 / rhs1.max(f64::MIN_POSITIVE)).sqrt();
    let mut first = IdentityReport::new("anticommutator-expansion", Some(grid), (res1 + rhs1).sqrt(), rhs1.sqrt(), rel1, rel1 <= tol);
    first.notes.push("lhs is the residual-shifted norm; rel_error is ||residual|| / ||rhs||".into());

    let dpsi_field = ops::apply_dirac(rep, aspec, m, &plain, grid)?;
    let sum_field = GridField::from_nodes(grid, STENCIL_REACH, |i, j, k| {
        let vp = vpsi_src.at(i, j, k);
        let dp = dpsi_field.at(i, j, k);
        std::array::from_fn(|c| dp[c] + vp[c])
    });
    ops::require_finite(&sum_field, "anticommutator expansion")?;
    let [res2, lhs2] = grid.integrate(2 * STENCIL_REACH, |i, j, k, x| {
        let f1 = sum_field.at(i, j, k);
        let f2 = dpsi_field.at(i, j, k);
        let g1 = stencil_grad(&sum_field, i, j, k, h);
        let g2 = stencil_grad(&dpsi_field, i, j, k, h);
        let vp = vpsi_src.at(i, j, k);
        let vg = stencil_grad(&vpsi_src, i, j, k, h);
        if is_zero(&f1) && is_zero(&f2) && g1.iter().all(is_zero) && g2.iter().all(is_zero) && vg.iter().all(is_zero) {
            return [0.0; 2];
        }
        let a = a_at(aspec, x);
        let vm = v_at(vspec, rep, x);
        let d1 = dops.dirac(&covariant(&g1, &f1, a), &f1, m);
        let v1 = mv(&vm, &f1);
        let lhs: Sp = std::array::from_fn(|c| d1[c] + v1[c]);
        let dd = dops.dirac(&covariant(&g2, &f2, a), &f2, m);
        let vv = mv(&vm, &vp);
        let dv = dops.dirac(&covariant(&vg, &vp, a), &vp, m);
        let vd = mv(&vm, &f2);
        let r: Sp = std::array::from_fn(|c| lhs[c] - (dd[c] + vv[c] + dv[c] + vd[c]));
        [sp_norm2(&r), sp_norm2(&lhs)]
    });
    finite_or(&[res2, lhs2], "square expansion")?;
    let rel2 = (res2 / lhs2.max(f64::MIN_POSITIVE)).sqrt();
    let second = IdentityReport::new("square-expansion", Some(grid), lhs2.sqrt(), (lhs2.sqrt() - res2.sqrt()).abs(), rel2, rel2 <= 1e-12);
    Ok([first, second])
}

// ---------------------------------------------------------------------------
// Hardy and diamagnetic inequalities

/// Hardy ratio, diamagnetic Hardy ratio and pointwise diamagnetic gap for one spinor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardyCheck {
    /// `∫|ψ|²/|x|² ÷ ‖∇ψ‖²`
    pub hardy_ratio: f64,
    /// `∫|ψ|²/|x|² ÷ ‖∇_Aψ‖²`
    pub magnetic_ratio: f64,
    /// `4/(d−2)²`
    pub bound: f64,
    /// `max_x (|∇|ψ|| − |∇_Aψ|)`
    pub diamagnetic_gap: f64,
}

impl HardyCheck {
    pub fn reports(&self, grid: &BoxGrid, tol: f64) -> [IdentityReport; 2] {
        let a = IdentityReport::new("hardy", Some(grid), self.hardy_ratio, self.bound, (self.hardy_ratio - self.bound).max(0.0) / self.bound, self.hardy_ratio <= self.bound + tol && self.magnetic_ratio <= self.bound + tol);
        let b = IdentityReport::new("diamagnetic", Some(grid), self.diamagnetic_gap, 0.0, self.diamagnetic_gap.max(0.0), self.diamagnetic_gap <= 1e-8);
        [a, b]
    }
}

/// Evaluates the Hardy quotients and the diamagnetic gap for `ψ`.
///
/// A spinor without an exclusion radius is rejected when it does not vanish at the origin.
pub fn hardy_and_diamagnetic_check(psi: &TestSpinor, aspec: &MagneticSpec, grid: &BoxGrid) -> Result<HardyCheck> {
    ops::check_grid(grid, aspec)?;
    require_compact(psi, grid)?;
    match psi.exclusion {
        Some(r0) if r0 >= 2.0 * grid.h() => {}
        Some(_) => return Err(Error::SupportTouchesOrigin),
        None => {
            if sp_norm2(&psi.value([0.0; 3])).sqrt() > 1e-12 {
                return Err(Error::SupportTouchesOrigin);
            }
        }
    }
    let [weighted, grad2, grad_a2] = grid.integrate(STENCIL_REACH, |i, j, k, x| {
        let (v, g) = psi_and_grad(psi, grid, i, j, k);
        if is_zero(&v) && g.iter().all(is_zero) {
            return [0.0; 3];
        }
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let dpsi = covariant(&g, &v, a_at(aspec, x));
        [sp_norm2(&v) / r2, g.iter().map(sp_norm2).sum(), dpsi.iter().map(sp_norm2).sum()]
    });
    let gap = grid.max_over(STENCIL_REACH, |i, j, k, x| {
        let (v, g) = psi_and_grad(psi, grid, i, j, k);
        let mod2 = sp_norm2(&v);
        if mod2 < 1e-300 {
            return f64::NEG_INFINITY;
        }
        let grad_mod: f64 = (0..3).map(|q| sp_dot(&v, &g[q]).re.powi(2)).sum::<f64>().sqrt() / mod2.sqrt();
        let dpsi = covariant(&g, &v, a_at(aspec, x));
        let grad_a: f64 = dpsi.iter().map(sp_norm2).sum::<f64>().sqrt();
        grad_mod - grad_a
    });
    finite_or(&[weighted, grad2, grad_a2], "Hardy check")?;
    let d = grid.d as f64;
    Ok(HardyCheck {
        hardy_ratio: weighted / grad2,
        magnetic_ratio: weighted / grad_a2,
        bound: 4.0 / ((d - 2.0) * (d - 2.0)),
        diamagnetic_gap: if gap.is_finite() { gap } else { 0.0 },
    })
}

// ---------------------------------------------------------------------------
// Norms entering the first theorem's hypothesis

/// `(‖Vψ‖, ‖H_m(A)ψ‖, ‖ψ‖, ‖−iα·∇_Aψ‖)` by quadrature.
pub fn theorem1_norms(rep: &NumericRep, aspec: &MagneticSpec, vspec: &PotentialSpec, m: f64, psi: &TestSpinor, grid: &BoxGrid) -> Result<[f64; 4]> {
    ops::check_grid(grid, aspec)?;
    require_compact(psi, grid)?;
    let dops = DiracOps::new(rep)?;
    let [v2, h2, p2, k2] = grid.integrate(STENCIL_REACH, |i, j, k, x| {
        let (v, g) = psi_and_grad(psi, grid, i, j, k);
        if is_zero(&v) && g.iter().all(is_zero) {
            return [0.0; 4];
        }
        let dpsi = covariant(&g, &v, a_at(aspec, x));
        let vp = if is_zero(&v) { SP_ZERO } else { mv(&v_at(vspec, rep, x), &v) };
        [sp_norm2(&vp), sp_norm2(&dops.dirac(&dpsi, &v, m)), sp_norm2(&v), sp_norm2(&dops.dirac(&dpsi, &v, 0.0))]
    });
    finite_or(&[v2, h2, p2, k2], "first-theorem norms")?;
    Ok([v2.sqrt(), h2.sqrt(), p2.sqrt(), k2.sqrt()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::DiracRep;
    use crate::fields::{PotentialKind, RadialProfile};

    fn rep() -> NumericRep {
        DiracRep::new(3).unwrap().to_numeric()
    }

    fn u() -> [Complex64; 4] {
        [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.4), Complex64::new(0.3, -0.2), Complex64::new(0.1, 0.5)]
    }

    #[test]
    fn constant_multiplier_vanishes() {
        let grid = BoxGrid::new(3, 8.0, 48).unwrap();
        let psi = TestSpinor::gaussian([0.4, -0.3, 0.2], 1.3, u());
        let (rep, _) = verify_multiplier(&Multiplier::Constant(1.0), &MagneticSpec::zero(3), &psi, &[grid], 1e-3, 1.0).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn lorentzian_multiplier_matches_analytic_derivative() {
        let mut base = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (q, v) in [1.0, -0.5, 2.0, 0.25].iter().enumerate() {
            base[q][q] = Complex64::new(*v, 0.0);
        }
        let psi = TestSpinor::gaussian([0.4, -0.3, 0.2], 1.3, u());
        let grids = [BoxGrid::new(3, 8.0, 64).unwrap(), BoxGrid::new(3, 8.0, 128).unwrap()];
        let (rep, s) = verify_multiplier(&Multiplier::Matrix(MultiplierMatrix::Lorentzian(base)), &MagneticSpec::zero(3), &psi, &grids, 1e-4, 8.0).unwrap();
        assert!(rep.pass, "{rep:?} {s:?}");
    }

    #[test]
    fn magnetic_multiplier_sign_of_field_term() {
        let aspec = MagneticSpec::rotational(0.3, 0.0).unwrap();
        let psi = TestSpinor::gaussian([0.7, -0.4, 0.3], 1.2, u());
        let grid = BoxGrid::new(3, 8.0, 96).unwrap();
        let s = multiplier_sample(&Multiplier::Magnetic, &aspec, &psi, &grid).unwrap();
        assert!(s.rel_error < 5e-4, "{s:?}");
        assert!((s.lhs - s.rhs_flipped_b).abs() > 1e3 * (s.lhs - s.rhs).abs(), "{s:?}");
    }

    #[test]
    fn squaring_converges_with_field() {
        let aspec = MagneticSpec::rotational(0.5, 0.0).unwrap();
        let psi = TestSpinor::gaussian([0.3, 0.2, -0.1], 1.0, u());
        let grids: Vec<BoxGrid> = [32, 64].iter().map(|&n| BoxGrid::new(3, 8.0, n).unwrap()).collect();
        let (report, samples) = verify_squaring(&rep(), &aspec, 1.0, &psi, &grids, 3.0).unwrap();
        assert!(report.pass, "{report:?} {samples:?}");
        let (printed, _) = squaring_with(&rep(), &aspec, 1.0, &psi, &grids, 3.0, Complex64::new(0.0, -0.5), "printed").unwrap();
        assert!(!printed.pass);
        assert!(printed.rel_error > 0.1);
    }

    #[test]
    fn anticommutator_for_coulomb_with_exclusion() {
        let vspec = PotentialSpec::new(3, PotentialKind::MatrixCoulomb { nu: 0.3, mu: 0.2, delta: 0.1 }).unwrap();
        let grid = BoxGrid::new(3, 8.0, 64).unwrap();
        let psi = TestSpinor::gaussian([0.0; 3], 1.0, u());
        let err = verify_anticommutator_expansion(&rep(), &MagneticSpec::zero(3), &vspec, 1.0, &psi, &grid, 1e-3).unwrap_err();
        assert!(matches!(err, Error::SupportTouchesOrigin));
        let psi = psi.with_exclusion(1.5);
        let [a, b] = verify_anticommutator_expansion(&rep(), &MagneticSpec::rotational(0.2, 0.0).unwrap(), &vspec, 1.0, &psi, &grid, 5e-2).unwrap();
        assert!(a.pass, "{a:?}");
        assert!(b.pass, "{b:?}");
    }

    #[test]
    fn anomalous_mass_term_drops_out() {
        let vspec = PotentialSpec::new(3, PotentialKind::Anomalous(RadialProfile::power_law(0.4, 2.0).unwrap())).unwrap();
        let grid = BoxGrid::new(3, 8.0, 64).unwrap();
        let psi = TestSpinor::gaussian([0.5, 0.0, 0.0], 1.0, u()).with_exclusion(1.5);
        let a = verify_anticommutator_expansion(&rep(), &MagneticSpec::zero(3), &vspec, 0.0, &psi, &grid, 5e-2).unwrap();
        let b = verify_anticommutator_expansion(&rep(), &MagneticSpec::zero(3), &vspec, 3.0, &psi, &grid, 5e-2).unwrap();
        assert!(a[0].rel_error < 0.2 && b[0].rel_error < 0.2, "{a:?} {b:?}");
        assert!((a[0].rhs - b[0].rhs).abs() <= 1e-12 * a[0].rhs);
        assert!((a[0].lhs - b[0].lhs).abs() <= 1e-12 * a[0].lhs);
    }

    #[test]
    fn hardy_ratio_below_four() {
        let grid = BoxGrid::new(3, 8.0, 64).unwrap();
        let psi = TestSpinor::gaussian([0.5, 0.0, 0.0], 1.0, u()).with_exclusion(0.6).with_analytic(true);
        let h = hardy_and_diamagnetic_check(&psi, &MagneticSpec::rotational(0.4, 0.0).unwrap(), &grid).unwrap();
        assert!(h.hardy_ratio < 4.0 && h.hardy_ratio > 0.0, "{h:?}");
        assert!(h.magnetic_ratio < 4.0);
        assert!(h.diamagnetic_gap <= 1e-12);
        let bare = TestSpinor::gaussian([0.0; 3], 1.0, u());
        assert!(matches!(hardy_and_diamagnetic_check(&bare, &MagneticSpec::zero(3), &grid), Err(Error::SupportTouchesOrigin)));
    }

    #[test]
    fn orders_from_halving() {
        let o = observed_orders(&[0.2, 0.1], &[1.6e-3, 1e-4]);
        assert!((o[0] - 4.0).abs() < 1e-12);
    }
}
