//! Epsilon constants and the smallness inequalities of the absence theorems.
//!
//! A weighted condition `∫ W|ψ|² ≤ ε²‖∇_Aψ‖²` with a pointwise majorant
//! `W ≤ c²|x|^{−2}` holds with `ε = 2c/(d−2)` by the Hardy inequality; the
//! free gradient may be used in place of the magnetic one thanks to the
//! diamagnetic inequality. [`derive_epsilons`] applies this rule to a
//! [`WeightTable`], and [`check_theorem`] evaluates the published inequality.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::extended_json;
use crate::clifford::NumericRep;
use crate::fields::{MagneticSpec, PotentialSpec, Provenance, Weight, WeightTable};
use crate::identities::{self, BoxGrid, TestSpinor};

/// Theorem selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    General,
    Electric,
    MasslessElectric,
    Scalar,
    Anomalous,
    Anomalous3d,
}

impl Theorem {
    pub const ALL: [Theorem; 6] = [
        Theorem::General,
        Theorem::Electric,
        Theorem::MasslessElectric,
        Theorem::Scalar,
        Theorem::Anomalous,
        Theorem::Anomalous3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::General => "general",
            Theorem::Electric => "electric",
            Theorem::MasslessElectric => "massless-electric",
            Theorem::Scalar => "scalar",
            Theorem::Anomalous => "anomalous",
            Theorem::Anomalous3d => "anomalous-3d",
        }
    }

    /// Right-hand side of the inequality.
    pub fn bound(self) -> f64 {
        if self == Theorem::MasslessElectric {
            1.0
        } else {
            2.0
        }
    }

    /// Whether the inequality is strict (`<`) rather than `≤`.
    pub fn strict(self) -> bool {
        self != Theorem::General
    }

    /// Terms `coef·Π ε_i` of the left-hand side (slot indices are 0-based).
    pub fn terms(self, d: usize, m: f64) -> Vec<Term> {
        let d = d as f64;
        let q = d - 2.0;
        let t = |coef: f64, slots: &[usize]| Term { coef, slots: slots.to_vec() };
        match self {
            Theorem::General => vec![
                t((4.0 * d - 6.0) / q, &[0]),
                t(4.0 / q, &[1, 2]),
                t(2.0 * m, &[3, 3]),
                t((8.0 * d - 8.0) / q, &[2]),
                t((4.0 * d - 4.0) / q, &[1]),
            ],
            Theorem::Electric => vec![
                t((4.0 * d - 6.0) / q, &[0]),
                t(4.0 / q, &[1, 2]),
                t((8.0 * d - 8.0) / q, &[2]),
                t(2.0, &[1]),
                t(2.0 * m, &[3, 3]),
            ],
            Theorem::MasslessElectric => vec![t((4.0 * d - 7.0) / q, &[0]), t(2.0, &[1]), t(1.0, &[1, 1])],
            Theorem::Scalar => vec![
                t((4.0 * d - 6.0) / q, &[0]),
                t(2.0, &[1, 2]),
                t(2.0 * m, &[3, 3]),
                t((4.0 * d - 4.0) / q, &[1]),
            ],
            Theorem::Anomalous => vec![
                t((4.0 * d - 6.0) / q, &[0]),
                t((16.0 * d - 16.0) / q, &[1]),
                t((8.0 * d - 8.0) / (q * q), &[1, 1]),
                t((4.0 * d - 4.0) / q, &[2]),
            ],
            Theorem::Anomalous3d => vec![
                t((4.0 * d - 6.0) / q, &[0]),
                t((8.0 * d - 8.0) / (q * q), &[1, 1]),
                t((8.0 * d - 8.0) / (q * q), &[3, 3]),
                t((16.0 * d - 16.0) / (q * q), &[1, 3]),
                t(m * (16.0 * d - 16.0) / q, &[0]),
                t((16.0 * d - 16.0) / q, &[1]),
                t((24.0 * d - 24.0) / q, &[3]),
                t((4.0 * d - 4.0) / q, &[2]),
                t((8.0 * d - 8.0) / q, &[4]),
            ],
        }
    }

    /// Slots that must be supplied for this theorem at mass `m`.
    pub fn required_slots(self, m: f64, beta_anticommutes: bool) -> Vec<usize> {
        let mut slots: Vec<usize> = match self {
            Theorem::MasslessElectric => vec![0, 1],
            Theorem::Anomalous => vec![0, 1, 2],
            Theorem::Anomalous3d => vec![0, 1, 2, 3, 4],
            _ => vec![0, 1, 2],
        };
        if self.mass_condition_required(m, beta_anticommutes) {
            slots.push(3);
        }
        slots
    }

    /// Whether the weighted mass condition `∫|x||∇V||ψ|² ≤ ε₄²‖∇_Aψ‖²` is a hypothesis.
    pub fn mass_condition_required(self, m: f64, beta_anticommutes: bool) -> bool {
        match self {
            Theorem::General => m != 0.0 || !beta_anticommutes,
            Theorem::Electric => true,
            Theorem::Scalar => m != 0.0,
            _ => false,
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown theorem `{s}` (expected one of general, electric, massless-electric, scalar, anomalous, anomalous-3d)")))
    }
}

/// One term `coef·Π ε_slot` of an inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub slots: Vec<usize>,
}

/// Extended-real product with the convention `0·∞ = 0`.
pub fn ext_product(factors: &[f64]) -> f64 {
    if factors.contains(&0.0) {
        return 0.0;
    }
    factors.iter().product()
}

impl Term {
    fn value(&self, eps: &[f64; 5]) -> f64 {
        let mut f: Vec<f64> = self.slots.iter().map(|&s| eps[s]).collect();
        f.push(self.coef);
        ext_product(&f)
    }
}

/// An ε value with its provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Eps {
    #[serde(serialize_with = "crate::serialize_extended")]
    pub value: f64,
    pub provenance: Provenance,
}

/// `ε₁…ε₅`; `None` marks a slot that was not supplied.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EpsilonBundle {
    pub eps: [Option<Eps>; 5],
    /// Whether `{β, V} = 0` for the potential that produced the bundle.
    pub beta_anticommutes: bool,
}

impl EpsilonBundle {
    /// User-supplied values; `None` entries stay unset.
    pub fn supplied(values: [Option<f64>; 5]) -> Result<Self> {
        let mut eps = [None; 5];
        for (slot, v) in values.iter().enumerate() {
            if let Some(v) = *v {
                if !(v >= 0.0) {
                    return Err(Error::InvalidProblem(format!("eps{} must be nonnegative (got {v})", slot + 1)));
                }
                eps[slot] = Some(Eps { value: v, provenance: Provenance::UserSupplied });
            }
        }
        Ok(EpsilonBundle { eps, beta_anticommutes: false })
    }

    pub fn zero() -> Self {
        EpsilonBundle {
            eps: [Some(Eps { value: 0.0, provenance: Provenance::ClosedForm }); 5],
            beta_anticommutes: true,
        }
    }

    pub fn value(&self, slot: usize) -> Option<f64> {
        self.eps[slot].map(|e| e.value)
    }

    fn json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.eps.iter().map(|e| e.map_or(serde_json::Value::Null, |e| extended_json(e.value))).collect())
    }
}

fn hardy_factor(d: usize) -> f64 {
    2.0 / (d as f64 - 2.0)
}

fn scaled(w: Weight, k: f64) -> Eps {
    Eps { value: ext_product(&[w.value, k]), provenance: w.provenance }
}

/// Hardy reduction of the weight table for a theorem.
pub fn derive_epsilons(weights: &WeightTable, d: usize, theorem: Theorem) -> Result<EpsilonBundle> {
    if d < 3 {
        return Err(Error::DimensionOutOfRange { d, min: 3, max: usize::MAX });
    }
    let k = hardy_factor(d);
    let direct = |w: Weight| Eps { value: w.value, provenance: w.provenance };
    let eps1 = scaled(weights.x2_b, k);
    let eps2 = match theorem {
        Theorem::Anomalous | Theorem::Anomalous3d => direct(weights.x_grad_phi),
        _ => scaled(weights.x2_grad_v, k),
    };
    let eps3 = match theorem {
        Theorem::Scalar => scaled(weights.x_v, k),
        Theorem::Anomalous | Theorem::Anomalous3d => scaled(weights.x2_lap_phi, k),
        _ => direct(weights.x_v),
    };
    let eps4 = match theorem {
        Theorem::Anomalous3d => direct(weights.x_b),
        _ => Eps { value: k * weights.x3_grad_v.value.sqrt(), provenance: weights.x3_grad_v.provenance },
    };
    let eps5 = scaled(weights.x2_grad_b, k);
    Ok(EpsilonBundle { eps: [Some(eps1), Some(eps2), Some(eps3), Some(eps4), Some(eps5)], beta_anticommutes: false })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    NotCertifiable,
}

impl Verdict {
    /// CLI exit status for this verdict.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Holds => 0,
            Verdict::Fails => 1,
            Verdict::NotCertifiable => 2,
        }
    }
}

/// Outcome of a theorem check.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    pub theorem: Theorem,
    pub d: usize,
    pub m: f64,
    pub eps: EpsilonBundle,
    pub lhs: f64,
    pub bound: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "theorem": self.theorem.name(),
            "d": self.d,
            "m": self.m,
            "eps": self.eps.json(),
            "eps_provenance": self.eps.eps.iter().map(|e| e.map(|e| e.provenance)).collect::<Vec<_>>(),
            "lhs": extended_json(self.lhs),
            "bound": self.bound,
            "strict": self.theorem.strict(),
            "margin": extended_json(self.margin),
            "verdict": self.verdict,
            "notes": self.notes,
        })
    }
}

/// Evaluates a theorem's smallness inequality for the given constants.
pub fn check_theorem(bundle: &EpsilonBundle, d: usize, m: f64, theorem: Theorem) -> Result<HypothesisReport> {
    if d < 3 {
        return Err(Error::DimensionOutOfRange { d, min: 3, max: usize::MAX });
    }
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::InvalidProblem(format!("mass must be finite and nonnegative (got {m})")));
    }
    if theorem == Theorem::MasslessElectric && m != 0.0 {
        return Err(Error::MassNotAllowed { theorem: theorem.name().into(), m });
    }
    if theorem == Theorem::Anomalous3d && d != 3 {
        return Err(Error::Mismatch(format!("theorem anomalous-3d needs d = 3, got d = {d}")));
    }
    let required = theorem.required_slots(m, bundle.beta_anticommutes);
    for &slot in &required {
        if bundle.eps[slot].is_none() {
            return Err(Error::MissingEpsilon { slot: slot + 1, theorem: theorem.name().into() });
        }
    }
    let eps: [f64; 5] = std::array::from_fn(|i| bundle.value(i).unwrap_or(0.0));
    let terms = theorem.terms(d, m);
    let mut notes = vec![
        "Hardy reductions use the free gradient; the diamagnetic inequality makes them valid for the magnetic gradient".to_string(),
    ];
    let mut lhs = 0.0;
    for term in &terms {
        let v = term.value(&eps);
        if v.is_infinite() {
            if term.slots.iter().all(|&s| s == 3) {
                notes.push("mass term divergent".into());
            } else {
                let names: Vec<String> = term.slots.iter().map(|s| format!("eps{}", s + 1)).collect();
                notes.push(format!("divergent term {} * {}", term.coef, names.join(" * ")));
            }
        }
        lhs += v;
    }
    let bound = theorem.bound();
    let mut holds = if theorem.strict() { lhs < bound } else { lhs <= bound };
    if theorem.mass_condition_required(m, bundle.beta_anticommutes) && eps[3].is_infinite() {
        if !notes.iter().any(|n| n == "mass term divergent") {
            notes.push("mass condition divergent: sup |x|^3 |grad V| is infinite".into());
        }
        holds = false;
    }
    let grid = required
        .iter()
        .filter(|&&s| bundle.eps[s].map(|e| e.provenance) == Some(Provenance::GridEstimate))
        .map(|s| format!("eps{}", s + 1))
        .collect::<Vec<_>>();
    let verdict = if !holds {
        Verdict::Fails
    } else if !grid.is_empty() {
        notes.push(format!("holds numerically, but {} come from grid estimates (lower bounds on suprema)", grid.join(", ")));
        Verdict::NotCertifiable
    } else {
        Verdict::Holds
    };
    Ok(HypothesisReport { theorem, d, m, eps: bundle.clone(), lhs, bound, margin: bound - lhs, verdict, notes })
}

// ---------------------------------------------------------------------------
// Critical couplings

/// One-parameter family `t ↦ (ε₁(t), …, ε₅(t))`, `t ≥ 0`.
pub enum Family {
    /// `ε_i(t) = slope_i·t`; an infinite slope means `ε_i = +∞` for `t > 0`.
    Linear { name: String, slopes: [f64; 5], beta_anticommutes: bool },
    /// Arbitrary family evaluated pointwise.
    General { name: String, eps: Box<dyn Fn(f64) -> [f64; 5] + Sync>, beta_anticommutes: bool },
}

impl Family {
    pub fn name(&self) -> &str {
        match self {
            Family::Linear { name, .. } | Family::General { name, .. } => name,
        }
    }

    pub fn eps_at(&self, t: f64) -> [f64; 5] {
        match self {
            Family::Linear { slopes, .. } => slopes.map(|s| ext_product(&[s, t])),
            Family::General { eps, .. } => eps(t),
        }
    }

    fn beta_anticommutes(&self) -> bool {
        match self {
            Family::Linear { beta_anticommutes, .. } | Family::General { beta_anticommutes, .. } => *beta_anticommutes,
        }
    }

    /// Named families in dimension `d` (parameter is the coupling strength).
    ///
    /// * `coulomb-electric`: `V = ν/|x|·I`
    /// * `coulomb-scalar`: `V = μ/|x|·β`
    /// * `coulomb-anomalous`: `V = iδβ α·x/|x|²`
    /// * `magnetic-inverse-square`: `|B| = b/|x|²`, no potential
    pub fn named(name: &str, d: usize, theorem: Theorem) -> Result<Family> {
        if d < 3 {
            return Err(Error::DimensionOutOfRange { d, min: 3, max: usize::MAX });
        }
        let k = hardy_factor(d);
        let inf = f64::INFINITY;
        let (slopes, beta_anticommutes) = match name {
            "coulomb-electric" => ([0.0, k, 1.0, inf, 0.0], false),
            "coulomb-scalar" => {
                let e3 = if theorem == Theorem::Scalar { k } else { 1.0 };
                ([0.0, k, e3, inf, 0.0], false)
            }
            "coulomb-anomalous" => {
                // φ = δ ln r: |x||∇φ| = δ, |x|²|Δφ| = (d−2)δ, |x|²|∇V| = δ√d
                let d_f = d as f64;
                match theorem {
                    Theorem::Anomalous | Theorem::Anomalous3d => ([0.0, 1.0, k * (d_f - 2.0), 0.0, 0.0], true),
                    _ => ([0.0, k * d_f.sqrt(), 1.0, inf, 0.0], true),
                }
            }
            "magnetic-inverse-square" => {
                // ε₄ of the 3d theorem is sup|x||B|, divergent for b/|x|²
                let e4 = if theorem == Theorem::Anomalous3d { inf } else { 0.0 };
                ([k, 0.0, 0.0, e4, inf], true)
            }
            _ => {
                return Err(Error::Parse(format!(
                    "unknown family `{name}` (expected coulomb-electric, coulomb-scalar, coulomb-anomalous, magnetic-inverse-square)"
                )))
            }
        };
        Ok(Family::Linear { name: name.into(), slopes, beta_anticommutes })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed form when the family is linear, bisection otherwise.
    Auto,
    ClosedForm,
    Bisection,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "closed-form" => Ok(Method::ClosedForm),
            "bisection" => Ok(Method::Bisection),
            _ => Err(Error::Parse(format!("unknown method `{s}` (expected auto, closed-form, bisection)"))),
        }
    }
}

/// Result of [`critical_coupling`].
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalCoupling {
    pub theorem: Theorem,
    pub d: usize,
    pub m: f64,
    pub family: String,
    pub value: f64,
    pub method: Method,
}

impl CriticalCoupling {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "theorem": self.theorem.name(),
            "d": self.d,
            "m": self.m,
            "family": self.family,
            "critical": extended_json(self.value),
            "method": self.method,
        })
    }
}

fn lhs_value(theorem: Theorem, d: usize, m: f64, eps: &[f64; 5]) -> f64 {
    theorem.terms(d, m).iter().map(|t| t.value(eps)).sum()
}

fn satisfied(theorem: Theorem, d: usize, m: f64, eps: &[f64; 5], beta_anticommutes: bool) -> bool {
    if theorem.mass_condition_required(m, beta_anticommutes) && eps[3].is_infinite() {
        return false;
    }
    let lhs = lhs_value(theorem, d, m, eps);
    if theorem.strict() {
        lhs < theorem.bound()
    } else {
        lhs <= theorem.bound()
    }
}

/// Largest parameter at which the theorem's inequality still holds.
pub fn critical_coupling(theorem: Theorem, d: usize, m: f64, family: &Family, method: Method) -> Result<CriticalCoupling> {
    if theorem == Theorem::MasslessElectric && m != 0.0 {
        return Err(Error::MassNotAllowed { theorem: theorem.name().into(), m });
    }
    if theorem == Theorem::Anomalous3d && d != 3 {
        return Err(Error::Mismatch(format!("theorem anomalous-3d needs d = 3, got d = {d}")));
    }
    let beta = family.beta_anticommutes();
    let at0 = family.eps_at(0.0);
    if !satisfied(theorem, d, m, &at0, beta) {
        return Err(Error::NeverHolds { theorem: theorem.name().into(), lhs: lhs_value(theorem, d, m, &at0) });
    }
    let chosen = match (method, family) {
        (Method::ClosedForm, Family::General { .. }) => {
            return Err(Error::InvalidProblem("closed form needs a linear family".into()));
        }
        (Method::Auto, Family::Linear { .. }) | (Method::ClosedForm, _) => Method::ClosedForm,
        _ => Method::Bisection,
    };
    let value = match (chosen, family) {
        (Method::ClosedForm, Family::Linear { slopes, .. }) => linear_closed_form(theorem, d, m, slopes, beta)?,
        _ => bisect(theorem, d, m, family)?,
    };
    Ok(CriticalCoupling { theorem, d, m, family: family.name().into(), value, method: chosen })
}

fn linear_closed_form(theorem: Theorem, d: usize, m: f64, slopes: &[f64; 5], beta: bool) -> Result<f64> {
    if slopes.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::NonMonotone("linear family with a negative or undefined slope".into()));
    }
    // Any infinite contribution for t > 0 makes the critical value 0.
    if theorem.mass_condition_required(m, beta) && slopes[3].is_infinite() {
        return Ok(0.0);
    }
    let (mut a, mut b) = (0.0, 0.0);
    for term in theorem.terms(d, m) {
        let factors: Vec<f64> = term.slots.iter().map(|&s| slopes[s]).collect();
        let c = ext_product(&[&factors[..], &[term.coef]].concat());
        if c.is_infinite() {
            return Ok(0.0);
        }
        match term.slots.len() {
            1 => a += c,
            2 => b += c,
            _ => unreachable!("terms are linear or quadratic"),
        }
    }
    let bound = theorem.bound();
    Ok(if b > 0.0 {
        2.0 * bound / (a + (a * a + 4.0 * b * bound).sqrt())
    } else if a > 0.0 {
        bound / a
    } else {
        f64::INFINITY
    })
}

fn bisect(theorem: Theorem, d: usize, m: f64, family: &Family) -> Result<f64> {
    let beta = family.beta_anticommutes();
    let holds = |t: f64| satisfied(theorem, d, m, &family.eps_at(t), beta);
    let check_monotone = |lo: f64, hi: f64| -> Result<()> {
        let mut prev = family.eps_at(lo);
        for i in 1..=64 {
            let t = lo + (hi - lo) * i as f64 / 64.0;
            let cur = family.eps_at(t);
            for s in 0..5 {
                if cur[s] < prev[s] {
                    return Err(Error::NonMonotone(format!("eps{} decreases near t = {t}", s + 1)));
                }
            }
            prev = cur;
        }
        Ok(())
    };
    let mut hi = 1.0;
    let mut lo = 0.0;
    while holds(hi) {
        check_monotone(lo, hi)?;
        lo = hi;
        hi *= 2.0;
        if hi > 1e15 {
            return Ok(f64::INFINITY);
        }
    }
    check_monotone(lo, hi)?;
    if !holds(f64::MIN_POSITIVE) {
        return Ok(0.0);
    }
    while hi - lo > 1e-12 * hi.max(1.0) * 1e-3 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Sampled screen of the first theorem's hypothesis

/// Largest tolerated quadrature self-estimate in [`screen_theorem1`].
pub const SCREEN_QUADRATURE_LIMIT: f64 = 1e-4;

/// Per-spinor outcome of [`screen_theorem1`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScreenEntry {
    pub index: usize,
    /// `‖Vψ‖`
    pub v_norm: f64,
    /// `‖H_m(A)ψ‖`
    pub h_norm: f64,
    /// `‖ψ‖`
    pub psi_norm: f64,
    /// `‖−i(α·∇_A)ψ‖`
    pub kinetic_norm: f64,
    /// `‖H_m(A)ψ‖ − m‖ψ‖ − ‖Vψ‖`; negative values are violations.
    pub margin: f64,
    pub violation: bool,
    /// Whether `‖H_m(A)ψ‖ − m‖ψ‖ ≤ ‖−i(α·∇_A)ψ‖` was observed.
    pub kinetic_bound_holds: bool,
}

/// Outcome of the sampled screen.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScreenReport {
    pub m: f64,
    pub entries: Vec<ScreenEntry>,
    pub violations: usize,
    /// Largest `|q_h − q_{2h}| / (15|q_h|)` over the squared norms.
    pub quadrature_estimate: f64,
    pub notes: Vec<String>,
}

impl ScreenReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Samples `‖Vψ‖ ≤ ‖H_m(A)ψ‖ − m‖ψ‖` over the given spinors on a common grid.
///
/// This can only exhibit violations; passing every sample proves nothing about the hypothesis.
/// Each quadrature is repeated on the grid with half as many points, and the screen is rejected
/// when the resulting self-estimate exceeds [`SCREEN_QUADRATURE_LIMIT`].
pub fn screen_theorem1(
    rep: &NumericRep,
    aspec: &MagneticSpec,
    vspec: &PotentialSpec,
    m: f64,
    spinors: &[TestSpinor],
    grid: &BoxGrid,
) -> Result<ScreenReport> {
    if !(m >= 0.0) {
        return Err(Error::InvalidProblem(format!("mass must be nonnegative (got {m})")));
    }
    let coarse = grid.coarsened()?;
    let mut entries = Vec::with_capacity(spinors.len());
    let mut estimate: f64 = 0.0;
    for (index, psi) in spinors.iter().enumerate() {
        let [v, h, p, k] = identities::theorem1_norms(rep, aspec, vspec, m, psi, grid)?;
        let c = identities::theorem1_norms(rep, aspec, vspec, m, psi, &coarse)?;
        for (f, q) in [v, h, p, k].iter().zip(c) {
            if *f > 0.0 {
                estimate = estimate.max((f * f - q * q).abs() / (15.0 * f * f));
            }
        }
        let margin = h - m * p - v;
        let slack = 1e-10 * (h + m * p + k);
        entries.push(ScreenEntry {
            index,
            v_norm: v,
            h_norm: h,
            psi_norm: p,
            kinetic_norm: k,
            margin,
            violation: margin < 0.0,
            kinetic_bound_holds: h - m * p <= k + slack,
        });
    }
    if estimate > SCREEN_QUADRATURE_LIMIT {
        return Err(Error::GridTooCoarse { estimate, limit: SCREEN_QUADRATURE_LIMIT });
    }
    let violations = entries.iter().filter(|e| e.violation).count();
    let notes = vec!["sampling screen: violations falsify the hypothesis, their absence certifies nothing".to_string()];
    Ok(ScreenReport { m, entries, violations, quadrature_estimate: estimate, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(values: [f64; 5]) -> EpsilonBundle {
        EpsilonBundle::supplied(values.map(Some)).unwrap()
    }

    #[test]
    fn zero_epsilons_hold() {
        for theorem in Theorem::ALL {
            let m = if theorem == Theorem::MasslessElectric { 0.0 } else { 1.5 };
            let r = check_theorem(&EpsilonBundle::zero(), 3, m, theorem).unwrap();
            assert_eq!(r.lhs, 0.0);
            assert_eq!(r.verdict, Verdict::Holds);
            assert_eq!(r.margin, r.bound);
        }
    }

    #[test]
    fn general_coefficients_at_d3() {
        let e = [0.01, 0.02, 0.03, 0.04, 0.0];
        let r = check_theorem(&eps(e), 3, 0.5, Theorem::General).unwrap();
        let hand = 6.0 * e[0] + 4.0 * e[1] * e[2] + 2.0 * 0.5 * e[3] * e[3] + 16.0 * e[2] + 8.0 * e[1];
        assert!((r.lhs - hand).abs() < 1e-15);
    }

    #[test]
    fn massless_electric_example() {
        let r = check_theorem(&eps([0.0, 0.2, 0.0, 0.0, 0.0]), 3, 0.0, Theorem::MasslessElectric).unwrap();
        assert!((r.lhs - 0.44).abs() < 1e-15);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(matches!(
            check_theorem(&eps([0.0; 5]), 3, 1.0, Theorem::MasslessElectric),
            Err(Error::MassNotAllowed { .. })
        ));
    }

    #[test]
    fn divergent_mass_term_fails() {
        let r = check_theorem(&eps([0.0, 0.0, 0.0, f64::INFINITY, 0.0]), 3, 1.0, Theorem::General).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.notes.iter().any(|n| n == "mass term divergent"));
    }

    #[test]
    fn missing_slot_is_named() {
        let b = EpsilonBundle::supplied([Some(0.0), None, Some(0.0), None, None]).unwrap();
        match check_theorem(&b, 3, 0.0, Theorem::MasslessElectric) {
            Err(Error::MissingEpsilon { slot, .. }) => assert_eq!(slot, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn thresholds() {
        let fam = Family::named("coulomb-electric", 3, Theorem::MasslessElectric).unwrap();
        let c = critical_coupling(Theorem::MasslessElectric, 3, 0.0, &fam, Method::Auto).unwrap();
        assert!((c.value - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let mag = Family::named("magnetic-inverse-square", 3, Theorem::General).unwrap();
        let c = critical_coupling(Theorem::General, 3, 0.0, &mag, Method::Auto).unwrap();
        assert!((c.value - 1.0 / 6.0).abs() < 1e-15);
        let flat = Family::Linear { name: "flat".into(), slopes: [0.0; 5], beta_anticommutes: true };
        assert!(critical_coupling(Theorem::General, 3, 0.0, &flat, Method::Auto).unwrap().value.is_infinite());
    }

    #[test]
    fn theorem1_screen_examples() {
        use crate::clifford::DiracRep;
        use crate::fields::{PotentialKind, RadialProfile};
        use num_complex::Complex64;
        let rep = DiracRep::new(3).unwrap().to_numeric();
        let grid = BoxGrid::new(3, 8.0, 128).unwrap();
        let u = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.5), Complex64::new(0.0, 0.0)];
        let spinors: Vec<TestSpinor> = [[0.0, 0.0, 0.0], [0.6, 0.3, 0.0]]
            .iter()
            .map(|c| TestSpinor::gaussian(*c, 1.2, u).with_exclusion(2.0).with_analytic(true))
            .collect();
        let free = MagneticSpec::zero(3);
        let zero = screen_theorem1(&rep, &free, &PotentialSpec::zero(3), 1.0, &spinors, &grid).unwrap();
        assert_eq!(zero.violations, 0);
        assert!(zero.entries.iter().all(|e| e.kinetic_bound_holds));
        let strong = PotentialSpec::new(3, PotentialKind::Electric(RadialProfile::power_law(100.0, 1.0).unwrap())).unwrap();
        let hit = screen_theorem1(&rep, &free, &strong, 0.0, &spinors, &grid).unwrap();
        assert!(hit.violations >= 1);
        let narrow = [TestSpinor::gaussian([0.0, 0.0, 2.0], 0.12, u).with_analytic(true)];
        assert!(matches!(screen_theorem1(&rep, &free, &strong, 0.0, &narrow, &grid), Err(Error::GridTooCoarse { .. })));
    }
}
