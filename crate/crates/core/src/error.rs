use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension d={d} is outside the supported range {min}..={max}")]
    DimensionOutOfRange { d: usize, min: usize, max: usize },

    #[error("matrix size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian: max |M - M*| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not unitary: max |P P* - I| = {deviation:e} exceeds {tolerance:e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("field is singular at the origin (|x| = {norm:e})")]
    Singularity { norm: f64 },

    #[error("incompatible inputs: {0}")]
    Mismatch(String),

    #[error("sampled data too sparse for differencing at |x| = {radius:e}: spacing {spacing:e} exceeds {limit:e}")]
    SparseSamples { radius: f64, spacing: f64, limit: f64 },

    #[error("point {radius:e} lies outside the sampled range [{lo:e}, {hi:e}]")]
    OutsideSamples { radius: f64, lo: f64, hi: f64 },

    #[error("epsilon slot eps{slot} is required by theorem {theorem} but was not supplied")]
    MissingEpsilon { slot: usize, theorem: String },

    #[error("theorem {theorem} requires m = 0 (got m = {m})")]
    MassNotAllowed { theorem: String, m: f64 },

    #[error("the inequality of theorem {theorem} fails already at parameter 0 (lhs = {lhs})")]
    NeverHolds { theorem: String, lhs: f64 },

    #[error("family is not monotone nondecreasing: {0}")]
    NonMonotone(String),

    #[error("grid too coarse: quadrature self-estimate {estimate:e} exceeds {limit:e}")]
    GridTooCoarse { estimate: f64, limit: f64 },

    #[error("spinor has mass {mass:e} on the boundary layer, above {limit:e}")]
    BoundaryMass { mass: f64, limit: f64 },

    #[error("spinor support touches the origin where the potential is singular")]
    SupportTouchesOrigin,

    #[error("box half-extent too small: need L >= {required_l}")]
    BoxTooSmall { required_l: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("closed form leaves its real domain: {0}")]
    OracleDomain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config line {line}, key `{key}`: {msg}")]
    Config { line: usize, key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
