//! Decay of `‖(∇ξ_R)ψ‖` and the Hardy optimizing sequence, by spherical and radial quadrature.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;

use super::grid::sp_norm2;
use super::spinor::{CutoffProfile, TestSpinor};
use crate::error::{Error, Result};

const RADIAL_NODES: usize = 48;
const POLAR_NODES: usize = 48;
const AZIMUTH_NODES: usize = 96;

/// One row of the decay table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CutoffRow {
    #[serde(rename = "R")]
    pub r: f64,
    /// `‖(∇ξ_R)ψ‖`
    pub value: f64,
    /// Contribution of the outer shell `R ≤ |x| ≤ 2R`.
    pub outer: f64,
    /// Contribution of the inner shell `1/R ≤ |x| ≤ 2/R`.
    pub inner: f64,
    /// `(‖ξ'‖_∞/R)‖ψ‖ + R‖ξ'‖_∞‖ψ‖_{L²(inner shell)}`
    pub bound: f64,
}

/// Decay table for one cutoff profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutoffDecay {
    pub profile: CutoffProfile,
    pub rows: Vec<CutoffRow>,
    pub strictly_decreasing: bool,
    pub within_bound: bool,
    /// Last value divided by the first.
    pub final_ratio: f64,
}

fn rule(n: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(n).expect("positive node count"))
}

/// `∫_{lo ≤ |x| ≤ hi} w(|x|)·|ψ(x)|² dx` with Gauss–Legendre in `r` and `cos θ` and the trapezoid rule in `φ`.
fn shell_integral(psi: &TestSpinor, lo: f64, hi: f64, weight: impl Fn(f64) -> f64) -> f64 {
    let radial = rule(RADIAL_NODES);
    let polar = rule(POLAR_NODES);
    let dphi = 2.0 * std::f64::consts::PI / AZIMUTH_NODES as f64;
    let mut total = 0.0;
    for &(tr, wr) in radial.as_node_weight_pairs() {
        let r = 0.5 * (hi - lo) * tr + 0.5 * (hi + lo);
        let w = weight(r);
        if w == 0.0 {
            continue;
        }
        let mut ang = 0.0;
        for &(ct, wt) in polar.as_node_weight_pairs() {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            let mut ring = 0.0;
            for q in 0..AZIMUTH_NODES {
                let ph = q as f64 * dphi;
                ring += sp_norm2(&psi.value([r * st * ph.cos(), r * st * ph.sin(), r * ct]));
            }
            ang += wt * ring * dphi;
        }
        total += 0.5 * (hi - lo) * wr * w * r * r * ang;
    }
    total
}

/// `‖(∇ξ_R)ψ‖` with `ξ_R(x) = ξ(|x|/R) − ξ(R|x|)` for each `R` in `rs`.
///
/// `rs` must be increasing with every entry at least 2 (so the two shells are disjoint), and the
/// box half-extent `box_l` must contain the outer shell of the largest `R`.
pub fn verify_cutoff_decay(psi: &TestSpinor, rs: &[f64], profile: CutoffProfile, box_l: f64) -> Result<CutoffDecay> {
    if rs.is_empty() || rs.iter().any(|&r| !(r >= 2.0)) || rs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidProblem("cutoff scales must be increasing and at least 2".into()));
    }
    let r_max = *rs.last().expect("non-empty");
    if box_l < 2.0 * r_max {
        return Err(Error::BoxTooSmall { required_l: 2.0 * r_max });
    }
    let slope = profile.max_slope();
    let whole = shell_integral(psi, 0.0, box_l, |_| 1.0).sqrt();
    let rows: Vec<CutoffRow> = rs
        .iter()
        .map(|&big| {
            let outer2 = shell_integral(psi, big, 2.0 * big, |r| (profile.dxi(r / big) / big).powi(2));
            let inner2 = shell_integral(psi, 1.0 / big, 2.0 / big, |r| (big * profile.dxi(big * r)).powi(2));
            let inner_mass = shell_integral(psi, 1.0 / big, 2.0 / big, |_| 1.0).sqrt();
            CutoffRow {
                r: big,
                value: (outer2 + inner2).sqrt(),
                outer: outer2.sqrt(),
                inner: inner2.sqrt(),
                bound: slope / big * whole + big * slope * inner_mass,
            }
        })
        .collect();
    let strictly_decreasing = rows.windows(2).all(|w| w[1].value < w[0].value);
    let within_bound = rows.iter().all(|r| r.value <= r.bound * (1.0 + 1e-9));
    let final_ratio = rows.last().expect("non-empty").value / rows[0].value;
    Ok(CutoffDecay { profile, rows, strictly_decreasing, within_bound, final_ratio })
}

/// Hardy quotient `∫|ψ|²|x|^{−2} ÷ ∫|∇ψ|²` for the radial trial function
/// `ψ = |x|^{−(d−2)/2}·cos²(π ln|x| / (2ℓ))` on `e^{−ℓ} ≤ |x| ≤ e^{ℓ}`, by Gauss–Legendre quadrature
/// of both radial integrals in the variable `t = ln|x|`. The quotient tends to `4/(d−2)²` as `ℓ → ∞`.
pub fn hardy_near_optimizer_ratio(d: usize, log_extent: f64) -> Result<f64> {
    if d < 3 || !(log_extent > 0.0) {
        return Err(Error::InvalidProblem(format!("needs d >= 3 and a positive log extent (d = {d}, extent = {log_extent})")));
    }
    let a = (d as f64 - 2.0) / 2.0;
    let l = log_extent;
    let k = std::f64::consts::PI / (2.0 * l);
    let quad = rule(400);
    let dim = d as f64;
    // Both integrands in the original radius, pulled back by r = e^t (dr = r dt).
    let num = quad.integrate(-l, l, |t| {
        let r = t.exp();
        let psi = r.powf(-a) * (k * t).cos().powi(2);
        psi * psi / (r * r) * r.powf(dim - 1.0) * r
    });
    let den = quad.integrate(-l, l, |t| {
        let r = t.exp();
        let c = (k * t).cos().powi(2);
        let dc = -2.0 * k * (k * t).cos() * (k * t).sin();
        let dpsi = r.powf(-a - 1.0) * (dc - a * c);
        dpsi * dpsi * r.powf(dim - 1.0) * r
    });
    Ok(num / den)
}
