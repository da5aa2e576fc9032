use thiserror::Error;

/// Errors produced by lattice construction, the two propagation engines and
/// configuration handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice size: {0}")]
    InvalidSize(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver failed to converge after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("occupation {0:?} is outside the truncated Fock basis")]
    OutOfBasis(Vec<u32>),

    #[error("index {index} out of range for {len} modes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("sector with {photons} photons has dimension {dim}, above the cap of {cap}")]
    Capacity {
        photons: usize,
        dim: usize,
        cap: usize,
    },

    #[error("states live in different Fock bases")]
    BasisMismatch,

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the user-supplied configuration rather than
    /// by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidSize(_)
                | Error::InvalidParameter(_)
                | Error::IndexOutOfRange { .. }
                | Error::OutOfBasis(_)
                | Error::UnsupportedCombination(_)
                | Error::DimensionMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
