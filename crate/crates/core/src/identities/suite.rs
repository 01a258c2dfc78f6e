//! The full identity suite with seeded random spinors.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::am::{random_points, verify_am_identities_conjugated};
use super::checks::{self, IdentityReport, Multiplier, MultiplierMatrix};
use super::cutoff::{hardy_near_optimizer_ratio, verify_cutoff_decay};
use super::grid::{sp_norm2, BoxGrid, STENCIL_REACH};
use super::ops::apply_dirac;
use super::spinor::{CutoffProfile, TestSpinor};
use crate::clifford::DiracRep;
use crate::error::Result;
use crate::fields::{GaugeTerm, MagneticSpec, PotentialKind, PotentialSpec, RadialProfile};

/// Settings for [`run_suite`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Box half-extent.
    pub l: f64,
    /// Finest grid size; refinement studies also use `n/2` (and `n/4` for the squaring identity).
    pub n: usize,
    /// Number of random spinors in the Hardy check.
    pub spinors: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 0, l: 8.0, n: 128, spinors: 20 }
    }
}

/// Relative tolerance for quadrature identities evaluated with 4th-order stencils at the finest grid.
pub const STENCIL_TOLERANCE: f64 = 1e-4;

fn even(n: usize) -> usize {
    n + n % 2
}

/// Spinor direction with unit norm.
fn unit_u(v: [f64; 8]) -> [Complex64; 4] {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    std::array::from_fn(|i| Complex64::new(v[2 * i] / s, v[2 * i + 1] / s))
}

/// Runs every check and returns one report per identity.
pub fn run_suite(opts: &SuiteOptions) -> Result<Vec<IdentityReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    let rep = DiracRep::new(3)?.to_numeric();
    let fine = BoxGrid::new(3, opts.l, even(opts.n))?;
    let half = BoxGrid::new(3, opts.l, even(opts.n / 2))?;
    let quarter = BoxGrid::new(3, opts.l, even(opts.n / 4).max(32))?;

    // Matrix identities at random points and under random conjugations.
    let pts = random_points(&mut rng, 3, 100, 0.2, 5.0);
    let phi = RadialProfile::power_law(0.8, 1.5)?;
    let aspec = MagneticSpec::rotational(0.5, 1.0)?;
    for r in verify_am_identities_conjugated(3, &phi, &aspec, &pts, true, 10, &mut rng)? {
        let mut rep = IdentityReport::new(r.identity, None, r.max_residual, 0.0, r.max_residual, r.pass);
        rep.notes.push("100 random points, 10 random representation conjugations".into());
        out.push(rep);
    }

    let u = unit_u([0.8, 0.1, -0.3, 0.4, 0.2, 0.0, 0.5, -0.2]);
    let gaussian = TestSpinor::gaussian([0.3, -0.2, 0.4], 1.2, u);
    let free = MagneticSpec::zero(3);
    let rot = MagneticSpec::rotational(0.3, 0.0)?;

    // Multiplier identities.
    let (r, _) = checks::verify_multiplier(&Multiplier::Magnetic, &free, &gaussian, &[half, fine], STENCIL_TOLERANCE, 8.0)?;
    out.push(r);
    let (mut r, _) = checks::verify_multiplier(&Multiplier::Magnetic, &rot, &gaussian, &[half, fine], STENCIL_TOLERANCE, 8.0)?;
    r.identity = "mult-1-magnetic".into();
    out.push(r);
    let mut base = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (q, v) in [1.0, -0.5, 2.0, 0.25].iter().enumerate() {
        base[q][q] = Complex64::new(*v, 0.0);
    }
    let (r, _) = checks::verify_multiplier(&Multiplier::Matrix(MultiplierMatrix::Lorentzian(base)), &free, &gaussian, &[half, fine], STENCIL_TOLERANCE, 8.0)?;
    out.push(r);
    let (r, _) = checks::verify_multiplier(&Multiplier::Constant(1.0), &free, &gaussian, &[fine], STENCIL_TOLERANCE, 8.0)?;
    out.push(r);

    // Squaring identity with a uniform field.
    let field = MagneticSpec::rotational(0.5, 0.0)?;
    let small = TestSpinor::gaussian([0.3, -0.2, 0.1], 1.0, u);
    let (r, _) = checks::verify_squaring(&rep, &field, 1.0, &small, &[quarter, half, fine], 3.0)?;
    out.push(r);

    // Anticommutator expansion for a Coulomb matrix potential.
    let coulomb = PotentialSpec::new(3, PotentialKind::MatrixCoulomb { nu: 0.3, mu: 0.2, delta: 0.1 })?;
    let cut = gaussian.clone().with_exclusion(6.0 * half.h());
    for r in checks::verify_anticommutator_expansion(&rep, &rot, &coulomb, 1.0, &cut, &half, 2e-2)? {
        out.push(r);
    }

    // Gauge covariance of the Dirac operator and of the magnetic Hardy quotient.
    let gauge = GaugeTerm { amp: 0.4, k: vec![0.3, 0.1, -0.2], quad: 0.05 };
    let analytic = gaussian.clone().with_analytic(true);
    let moved_field = rot.clone().with_gauge(gauge.clone())?;
    let moved_psi = analytic.clone().with_gauge(gauge.clone());
    let a = apply_dirac(&rep, &rot, 1.0, &analytic, &half)?;
    let b = apply_dirac(&rep, &moved_field, 1.0, &moved_psi, &half)?;
    let mut worst: f64 = 0.0;
    let mut size: f64 = 0.0;
    for i in STENCIL_REACH..half.n - STENCIL_REACH {
        for j in STENCIL_REACH..half.n - STENCIL_REACH {
            for k in STENCIL_REACH..half.n - STENCIL_REACH {
                let idx = half.index(i, j, k);
                let ph = Complex64::from_polar(1.0, gauge.chi(&half.point(i, j, k)));
                let d: [Complex64; 4] = std::array::from_fn(|c| b.data[idx][c] - ph * a.data[idx][c]);
                worst = worst.max(sp_norm2(&d).sqrt());
                size = size.max(sp_norm2(&a.data[idx]).sqrt());
            }
        }
    }
    out.push(IdentityReport::new("gauge-covariance", Some(&half), worst, 0.0, worst / size, worst <= 1e-8 * size.max(1.0)));

    // Hardy and diamagnetic inequalities.
    let mut hardy_worst = 0.0f64;
    let mut gap_worst = f64::NEG_INFINITY;
    let r0 = 0.5f64.max(2.0 * fine.h());
    for _ in 0..opts.spinors {
        let psi = TestSpinor::random(&mut rng, 1.5, 0.6, 1.2).with_exclusion(r0).with_analytic(true);
        let h = checks::hardy_and_diamagnetic_check(&psi, &rot, &fine)?;
        hardy_worst = hardy_worst.max(h.hardy_ratio.max(h.magnetic_ratio));
        gap_worst = gap_worst.max(h.diamagnetic_gap);
    }
    let bound = 4.0;
    let mut r = IdentityReport::new("hardy", Some(&fine), hardy_worst, bound, (hardy_worst - bound).max(0.0) / bound, hardy_worst <= bound + 1e-2);
    r.notes.push(format!("largest quotient over {} random origin-avoiding spinors", opts.spinors));
    out.push(r);
    out.push(IdentityReport::new("diamagnetic", Some(&fine), gap_worst, 0.0, gap_worst.max(0.0), gap_worst <= 1e-8));
    let q = hardy_near_optimizer_ratio(3, 12.0)?;
    out.push(IdentityReport::new("hardy-near-optimizer", None, q, bound, (q - bound).abs() / bound, (q - bound).abs() <= 0.1 * bound));

    // Cutoff decay with both transition profiles.
    let off_center = TestSpinor::gaussian([0.0, 0.0, 3.0], 1.0, u);
    for profile in [CutoffProfile::Smoothstep, CutoffProfile::Exponential] {
        let t = verify_cutoff_decay(&off_center, &[2.0, 4.0, 8.0, 16.0], profile, 32.0)?;
        let first = t.rows[0].value;
        let last = t.rows.last().expect("rows").value;
        let mut r = IdentityReport::new(
            match profile {
                CutoffProfile::Smoothstep => "cutoff-decay-smoothstep",
                CutoffProfile::Exponential => "cutoff-decay-exponential",
            },
            None,
            last,
            first,
            t.final_ratio,
            t.strictly_decreasing && t.within_bound && t.final_ratio < 0.05,
        );
        r.notes.push(format!("values along R = 2, 4, 8, 16: {:?}", t.rows.iter().map(|r| r.value).collect::<Vec<_>>()));
        out.push(r);
    }
    Ok(out)
}
