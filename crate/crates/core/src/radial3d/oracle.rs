//! Closed-form Dirac–Coulomb bound-state energies.

use serde::Serialize;

use crate::error::{Error, Result};

/// `E = m·[1 + ν²/(n_r + √(κ² − ν²))²]^{−1/2}` for an attractive Coulomb coupling `ν < 0`.
///
/// `n_r` is the radial quantum number; for `κ > 0` the level `n_r = 0` does not exist.
pub fn sommerfeld(nu: f64, kappa: i32, n_r: u32, m: f64) -> Result<f64> {
    if !(nu < 0.0) {
        return Err(Error::OracleDomain(format!("coupling must be attractive (nu < 0), got {nu}")));
    }
    if kappa == 0 {
        return Err(Error::OracleDomain("kappa must be nonzero".into()));
    }
    let k = kappa as f64;
    if nu.abs() >= k.abs() {
        return Err(Error::OracleDomain(format!("|nu| = {} must be below |kappa| = {}", nu.abs(), k.abs())));
    }
    if kappa > 0 && n_r == 0 {
        return Err(Error::OracleDomain("n_r must be at least 1 when kappa > 0".into()));
    }
    if !(m > 0.0) {
        return Err(Error::OracleDomain(format!("mass must be positive, got {m}")));
    }
    let gamma = (k * k - nu * nu).sqrt();
    let q = nu / (n_r as f64 + gamma);
    Ok(m / (1.0 + q * q).sqrt())
}

/// Oracle levels of the channel below `e_max`, ascending.
pub fn sommerfeld_levels(nu: f64, kappa: i32, m: f64, e_max: f64) -> Result<Vec<(u32, f64)>> {
    let start = if kappa > 0 { 1 } else { 0 };
    let mut out = Vec::new();
    for n_r in start.. {
        let e = sommerfeld(nu, kappa, n_r, m)?;
        if e >= e_max || out.len() >= 10_000 {
            break;
        }
        out.push((n_r, e));
    }
    Ok(out)
}

/// One solver eigenvalue paired with its oracle level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleMatch {
    pub n_r: u32,
    pub oracle: f64,
    /// Closest computed eigenvalue, if any.
    pub computed: Option<f64>,
    pub rel_error: Option<f64>,
    /// Whether the computed eigenvalue was flagged persistent.
    pub persistent: bool,
}

/// Pairs every oracle level below `e_max` with the nearest of `eigenvalues` (`persistent[i]` flags
/// eigenvalue `i`).
pub fn compare_with_oracle(nu: f64, kappa: i32, m: f64, e_max: f64, eigenvalues: &[f64], persistent: &[bool]) -> Result<Vec<OracleMatch>> {
    let levels = sommerfeld_levels(nu, kappa, m, e_max)?;
    Ok(levels
        .into_iter()
        .map(|(n_r, e)| {
            let best = eigenvalues.iter().enumerate().min_by(|a, b| (a.1 - e).abs().total_cmp(&(b.1 - e).abs()));
            match best {
                Some((i, &l)) => OracleMatch { n_r, oracle: e, computed: Some(l), rel_error: Some((l - e).abs() / e.abs()), persistent: persistent.get(i).copied().unwrap_or(false) },
                None => OracleMatch { n_r, oracle: e, computed: None, rel_error: None, persistent: false },
            }
        })
        .collect())
}
