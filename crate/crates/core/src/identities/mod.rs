//! Numerical and exact checks of the operator and matrix identities.
//!
//! Gridded checks work in d = 3 on a uniform box with 4th-order stencils and trapezoid quadrature;
//! the stored fields take about `n³·N` complex values each (`N = 4`).

pub mod am;
pub mod checks;
pub mod cutoff;
pub mod grid;
pub mod ops;
pub mod spinor;
pub mod suite;

pub use am::{verify_am_identities, verify_am_identities_conjugated, AmIdentityResult, AmMatrices};
pub use checks::{
    hardy_and_diamagnetic_check, theorem1_norms, verify_anticommutator_expansion, verify_multiplier, verify_squaring, Gridded, HardyCheck, IdentityReport,
    Multiplier, MultiplierMatrix,
};
pub use cutoff::{hardy_near_optimizer_ratio, verify_cutoff_decay, CutoffDecay};
pub use grid::{BoxGrid, GridField};
pub use ops::apply_dirac;
pub use spinor::{CutoffProfile, Envelope, TestSpinor};
pub use suite::{run_suite, SuiteOptions};
