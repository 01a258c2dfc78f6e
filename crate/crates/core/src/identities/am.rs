//! Pointwise matrix identities for the anomalous-magnetic potentials.

use num_complex::Complex64;
use serde::Serialize;

use crate::clifford::{self, DiracRep, NumericRep};
use crate::error::{Error, Result};
use crate::fields::{self, MagneticSpec, RadialProfile};
use crate::linalg::{self, CMatrix, CI};

/// Tolerance for the pointwise identities, relative to the size of the terms involved.
pub const AM_TOLERANCE: f64 = 1e-10;

/// Dirac matrices together with the d = 3 spin matrices `S_j` and `T`.
#[derive(Clone, Debug)]
pub struct AmMatrices {
    pub rep: NumericRep,
    pub spin: Option<([CMatrix; 3], CMatrix)>,
}

impl AmMatrices {
    pub fn standard(d: usize) -> Result<Self> {
        let exact = DiracRep::new(d)?;
        let spin = if d == 3 { Some(clifford::spin_and_t(&exact)?.to_numeric()) } else { None };
        Ok(AmMatrices { rep: exact.to_numeric(), spin })
    }

    /// Conjugates every matrix by the unitary `P`.
    pub fn conjugate(&self, p: &CMatrix) -> Result<Self> {
        let rep = self.rep.conjugate(p)?;
        let pa = p.adjoint();
        let spin = self.spin.as_ref().map(|(s, t)| (s.clone().map(|m| p * m * &pa), p * t * &pa));
        Ok(AmMatrices { rep, spin })
    }
}

/// Largest scaled residual of one identity over all sample points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmIdentityResult {
    pub identity: &'static str,
    pub max_residual: f64,
    pub pass: bool,
}

fn scaled(diff: &CMatrix, scale: f64) -> f64 {
    linalg::max_abs(diff) / scale.max(1.0)
}

fn s_dot(spin: &[CMatrix; 3], v: &[f64]) -> CMatrix {
    &spin[0] * Complex64::from(v[0]) + &spin[1] * Complex64::from(v[1]) + &spin[2] * Complex64::from(v[2])
}

fn anti(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Residuals of the four identities for `V = iβα·∇φ` (and, with `three_d`, the four identities for
/// `V = iβα·∇φ − 2βS·B`) at every point, where `φ` is given through its radial derivative profile.
///
/// The identities are, per direction `k`:
/// `V² = |∇φ|²`, `{β,V} = 0`, `{α_k,V} = 2iβ(α·∇φ)α_k − 2iβ∂_kφ`, `Σ_k α_k∂_kV = −iβΔφ`, and in d = 3
/// `V² = |∇φ|² + |B|² − 2α·(∇φ×B)`, `{β,V} = −4S·B`,
/// `{α_k,V} = 2iβ(α·∇φ)α_k − 2iβ∂_kφ − 4β(S·B)α_k + 2βTB_k`,
/// `Σ_k α_k∂_kV = −iβΔφ + 2βΣ_kα_k(S·∂_kB)`.
pub fn verify_am_identities(mats: &AmMatrices, phi_prime: &RadialProfile, aspec: &MagneticSpec, points: &[Vec<f64>], three_d: bool) -> Result<Vec<AmIdentityResult>> {
    let rep = &mats.rep;
    let d = rep.d;
    if three_d && (d != 3 || aspec.d != 3) {
        return Err(Error::Mismatch(format!("spin-coupled identities need d = 3, got {d}")));
    }
    let spin = if three_d {
        Some(mats.spin.as_ref().ok_or_else(|| Error::Mismatch("spin matrices are missing".into()))?)
    } else {
        None
    };
    let n = rep.spinor_size();
    let id = linalg::identity(n);
    let beta = &rep.beta;
    let names: &[&'static str] = if three_d {
        &["V-square", "V-beta", "V-alpha", "nablaV-alpha", "V-square-3d", "V-beta-3d", "V-alpha-3d", "nablaV-alpha-3d"]
    } else {
        &["V-square", "V-beta", "V-alpha", "nablaV-alpha"]
    };
    let mut worst = vec![0.0f64; names.len()];
    for x in points {
        if x.len() != d {
            return Err(Error::SizeMismatch { left: x.len(), right: d });
        }
        let (g, hess) = fields::radial_phi_derivatives(phi_prime, x)?;
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let lap: f64 = (0..d).map(|j| hess[(j, j)]).sum();
        let hnorm = hess.abs().max();
        let adg = rep.alpha_dot(&g);
        let v = beta * &adg * CI;
        let scale = 1.0 + g2 + hnorm;

        worst[0] = worst[0].max(scaled(&(&v * &v - &id * Complex64::from(g2)), scale));
        worst[1] = worst[1].max(scaled(&anti(beta, &v), scale));
        for k in 0..d {
            let expect = beta * &adg * &rep.alphas[k] * Complex64::new(0.0, 2.0) - beta * Complex64::new(0.0, 2.0 * g[k]);
            worst[2] = worst[2].max(scaled(&(anti(&rep.alphas[k], &v) - expect), scale));
        }
        let dv = |k: usize| -> CMatrix {
            let col: Vec<f64> = (0..d).map(|j| hess[(j, k)]).collect();
            beta * rep.alpha_dot(&col) * CI
        };
        let sum_alpha_dv = (0..d).fold(CMatrix::zeros(n, n), |acc, k| acc + &rep.alphas[k] * dv(k));
        worst[3] = worst[3].max(scaled(&(&sum_alpha_dv - beta * Complex64::new(0.0, -lap)), scale));

        if let Some((s, t)) = spin {
            let b = aspec.b_vector(x)?;
            let jac = aspec.grad_b(x)?;
            let b2: f64 = b.iter().map(|v| v * v).sum();
            let sb = s_dot(s, &b);
            let v3 = &v - beta * &sb * Complex64::from(2.0);
            let scale3 = scale + b2 + jac.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
            let cross = [g[1] * b[2] - g[2] * b[1], g[2] * b[0] - g[0] * b[2], g[0] * b[1] - g[1] * b[0]];
            let expect_sq = &id * Complex64::from(g2 + b2) - rep.alpha_dot(&cross) * Complex64::from(2.0);
            worst[4] = worst[4].max(scaled(&(&v3 * &v3 - expect_sq), scale3));
            worst[5] = worst[5].max(scaled(&(anti(beta, &v3) + &sb * Complex64::from(4.0)), scale3));
            for k in 0..3 {
                let expect = beta * &adg * &rep.alphas[k] * Complex64::new(0.0, 2.0) - beta * Complex64::new(0.0, 2.0 * g[k])
                    - beta * &sb * &rep.alphas[k] * Complex64::from(4.0)
                    + beta * t * Complex64::from(2.0 * b[k]);
                worst[6] = worst[6].max(scaled(&(anti(&rep.alphas[k], &v3) - expect), scale3));
            }
            let dsb = |k: usize| s_dot(s, &[jac[0][k], jac[1][k], jac[2][k]]);
            let sum3 = (0..3).fold(CMatrix::zeros(n, n), |acc, k| acc + &rep.alphas[k] * (dv(k) - beta * dsb(k) * Complex64::from(2.0)));
            let rhs3 = beta * Complex64::new(0.0, -lap) + (0..3).fold(CMatrix::zeros(n, n), |acc, k| acc + beta * &rep.alphas[k] * dsb(k) * Complex64::from(2.0));
            worst[7] = worst[7].max(scaled(&(sum3 - rhs3), scale3));
        }
    }
    Ok(names
        .iter()
        .zip(worst)
        .map(|(name, w)| AmIdentityResult { identity: name, max_residual: w, pass: w <= AM_TOLERANCE })
        .collect())
}

/// Same check run under the standard representation and `conjugations` random unitary conjugations;
/// returns the worst residual per identity across all of them.
pub fn verify_am_identities_conjugated<R: rand::Rng + ?Sized>(
    d: usize,
    phi_prime: &RadialProfile,
    aspec: &MagneticSpec,
    points: &[Vec<f64>],
    three_d: bool,
    conjugations: usize,
    rng: &mut R,
) -> Result<Vec<AmIdentityResult>> {
    let base = AmMatrices::standard(d)?;
    let mut out = verify_am_identities(&base, phi_prime, aspec, points, three_d)?;
    for _ in 0..conjugations {
        let p = linalg::random_unitary(rng, base.rep.spinor_size());
        let res = verify_am_identities(&base.conjugate(&p)?, phi_prime, aspec, points, three_d)?;
        for (o, r) in out.iter_mut().zip(res) {
            o.max_residual = o.max_residual.max(r.max_residual);
            o.pass = o.max_residual <= AM_TOLERANCE;
        }
    }
    Ok(out)
}

/// Random sample points with radii in `[r_lo, r_hi]`.
pub fn random_points<R: rand::Rng + ?Sized>(rng: &mut R, d: usize, count: usize, r_lo: f64, r_hi: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let dir = linalg::random_unit_vector(rng, d);
            let r = linalg::uniform(rng, r_lo, r_hi);
            dir.into_iter().map(|v| v * r).collect()
        })
        .collect()
}
