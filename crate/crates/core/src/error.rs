use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("degenerate geometry: Cholesky factorization failed with jitter up to {max_jitter:e}")]
    DegenerateGeometry { max_jitter: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {dim} exceeds the multivariate normal cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("singular correlation matrix")]
    SingularMatrix,

    #[error("strong interference violated at receiver {receiver}: average INR {avg_inr} <= average SNR {avg_snr}")]
    StrongInterference {
        receiver: usize,
        avg_snr: f64,
        avg_inr: f64,
    },

    #[error("expected-maximum heuristic out of range at receiver {receiver}: correction factor {factor}")]
    HeuristicOutOfRange { receiver: usize, factor: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
