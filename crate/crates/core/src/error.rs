use thiserror::Error;

/// Errors raised by the engine.
///
/// Variants group into input validation, oracle mismatches, failed exact
/// identities and numerical (transport) failures; [`Error::kind`] exposes
/// that grouping so front-ends can map it to exit codes.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid Lie type {series}{rank}: {reason}")]
    InvalidType {
        series: String,
        rank: usize,
        reason: String,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weight {weight} is not dominant")]
    NotDominant { weight: String },
    #[error("weight {weight} is not admissible at level {level}")]
    NotAdmissible { weight: String, level: i64 },
    #[error("level must be positive, got {0}")]
    InvalidLevel(i64),
    #[error("tensor product dimension {dim} exceeds the configured cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("invalid slot pair ({i}, {j}) for {n} tensor factors")]
    InvalidSlots { i: usize, j: usize, n: usize },
    #[error("marked points {} and {} coincide", .i + 1, .j + 1)]
    CoincidentPoints { i: usize, j: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("block subspace has dimension {subspace} but the fusion rules give {fusion}")]
    BlockDimensionMismatch { subspace: usize, fusion: usize },
    #[error("exact identity failed: {0}")]
    IdentityFailure(String),
    #[error("no intertwiner exists: {0}")]
    NoIntertwiner(String),
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget of {steps} exhausted at t = {t}")]
    StepBudget { steps: usize, t: f64 },
    #[error("block residual {residual:e} exceeds tolerance {tol:e}")]
    BlockResidual { residual: f64, tol: f64 },
    #[error("{0}")]
    Io(String),
}

/// Coarse classification of an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    OracleMismatch,
    Identity,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidType { .. }
            | Error::DimensionMismatch { .. }
            | Error::NotDominant { .. }
            | Error::NotAdmissible { .. }
            | Error::InvalidLevel(_)
            | Error::TooLarge { .. }
            | Error::InvalidSlots { .. }
            | Error::CoincidentPoints { .. }
            | Error::InvalidArgument(_) => ErrorKind::Validation,
            Error::BlockDimensionMismatch { .. } => ErrorKind::OracleMismatch,
            Error::IdentityFailure(_) | Error::NoIntertwiner(_) => ErrorKind::Identity,
            Error::StepUnderflow { .. } | Error::StepBudget { .. } | Error::BlockResidual { .. } => {
                ErrorKind::Numerical
            }
            Error::Io(_) => ErrorKind::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
