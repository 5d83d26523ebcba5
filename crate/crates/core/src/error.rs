use thiserror::Error;

/// Failures raised by system construction, the solvers and the bound evaluators.
///
/// Messages name the violated hypothesis so the CLI can surface them verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("singular matrix (pivot {pivot:e} at column {col})")]
    Singular { col: usize, pivot: f64 },

    #[error("not a frame on this grid: lower bound {lower:e}, upper bound {upper:e}")]
    NotAFrame { lower: f64, upper: f64 },

    #[error(
        "periodized system not a frame at L={period}: block {block} has eigenvalue {eigenvalue:e}"
    )]
    PeriodicNotAFrame {
        period: usize,
        block: usize,
        eigenvalue: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
}

impl Error {
    /// True for failures caused by numerical hypotheses (non-PD, not a frame, bad N),
    /// as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidInput(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
