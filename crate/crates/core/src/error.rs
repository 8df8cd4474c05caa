use thiserror::Error;

/// Errors raised by the frame calculus.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("lattice parameter {param} = {value} does not divide dimension {dim}")]
    LatticeMismatch {
        param: &'static str,
        value: usize,
        dim: usize,
    },
    #[error("window must be nonzero")]
    InvalidWindow,
    #[error("index {index} out of range 1..={len}")]
    IndexError { index: usize, len: usize },
    #[error("system is not total: rank {rank} < dim {dim}")]
    NotTotal { rank: usize, dim: usize },
    #[error("coefficients are off the range of the analysis operator (relative residual {residual:.3e})")]
    OffRange { residual: f64 },
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("not a dual pair at size {size} (defect {defect:.3e})")]
    NotDualPair { size: usize, defect: f64 },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("inadmissible profile: {0}")]
    InadmissibleProfile(String),
    #[error("no profile attached to the sampled frame")]
    MissingProfile,
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl FrameError {
    /// True for errors caused by numerics on valid input (as opposed to
    /// malformed or inconsistent input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FrameError::NotTotal { .. }
                | FrameError::OffRange { .. }
                | FrameError::DomainViolation(_)
                | FrameError::NotDualPair { .. }
                | FrameError::NotInvertible
                | FrameError::NotUnitary { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, FrameError>;
