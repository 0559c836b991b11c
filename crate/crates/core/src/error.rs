use thiserror::Error;

/// Errors raised by model construction, discrete operators and solvers.
///
/// Numeric payloads are carried as `f64` so the error type stays
/// independent of the scalar the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid nonlinearity: {0}")]
    InvalidSigma(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("size mismatch: expected {expected} nodes, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("state is not finite")]
    NonFiniteState,

    #[error("state violates the boundary relation: defect {defect:e} > tolerance {tol:e}")]
    Incompatible { defect: f64, tol: f64 },

    #[error("boundary history has no sample covering time {time} (window [{first}, {last}])")]
    HistoryGap { time: f64, first: f64, last: f64 },

    #[error("CFL violated: lambda*dt = {courant:e} exceeds dx = {dx:e}")]
    Cfl { courant: f64, dx: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value encountered at t = {time}")]
    NonFinite { time: f64 },

    #[error("no sign change of the scalar resolvent equation within |z| <= {bound:e}")]
    BracketNotFound { bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
