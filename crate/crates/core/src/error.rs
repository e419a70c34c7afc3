//! Error type shared across the solver and verification kernels.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size must be even and at least 4, got {0}")]
    BadGridSize(usize),

    #[error("wavevector ({0}, {1}, {2}) lies outside the lattice")]
    ModeOutOfLattice(i64, i64, i64),

    #[error("conflicting conjugate assignment at wavevector ({0}, {1}, {2})")]
    ConjugateConflict(i64, i64, i64),

    #[error("k_max {k_max} exceeds the dealias limit {limit}")]
    KMaxExceedsMask { k_max: usize, limit: usize },

    #[error("mean mode present: X^{{-1}} requires a zero-mean field")]
    MeanModePresent,

    #[error("field is not divergence-free: max |xi . c| = {divergence:e} exceeds {tolerance:e}")]
    NotDivergenceFree { divergence: f64, tolerance: f64 },

    #[error("grid mismatch: {0} vs {1} modes per dimension")]
    GridMismatch(usize, usize),

    #[error("support too large for alias-free convolution (product reaches |xi_i| = {reach}, lattice allows {limit})")]
    SupportTooLarge { reach: i64, limit: i64 },

    #[error("time grids do not match")]
    TimeGridMismatch,

    #[error("resolution or dt insufficient: non-finite value at t = {t}")]
    Unresolved { t: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature failed to reach requested accuracy (best estimate {estimate:e}, error {error:e})")]
    QuadratureAccuracy { estimate: f64, error: f64 },

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config validation error for key '{key}': {message}")]
    ConfigInvalid { key: String, message: String },

    #[error("checkpoint format error: {0}")]
    CheckpointFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
