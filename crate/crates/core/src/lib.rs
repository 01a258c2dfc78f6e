//! Numerical toolkit for electromagnetic Dirac operators.
//!
//! * [`clifford`]: exact Dirac matrices and spin operators.
//! * [`fields`]: potential and magnetic-field families with sup-weights.
//! * [`hardy`]: epsilon constants, smallness inequalities and critical couplings.
//! * [`identities`]: grid and matrix checks of the operator identities.
//! * [`radial3d`]: partial-wave radial Dirac spectra with a Coulomb oracle.
//! * [`config`] and [`cli`]: the `dirac-spectra` command-line front end.

// Comparisons are written as `!(x <= limit)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod clifford;
pub mod config;
pub mod error;
pub mod exact;
pub mod linalg;

pub use error::{Error, Result};
pub mod fields;
pub mod hardy;
pub mod identities;
pub mod radial3d;

/// Serializes an extended real: finite values as numbers, infinities as `"+inf"`/`"-inf"`, NaN as `null`.
pub fn serialize_extended<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    extended_json(*v).serialize(s)
}

/// JSON value for an extended real (see [`serialize_extended`]).
pub fn extended_json(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else if v.is_nan() {
        serde_json::Value::Null
    } else if v > 0.0 {
        serde_json::json!("+inf")
    } else {
        serde_json::json!("-inf")
    }
}

use serde::Serialize;
