use thiserror::Error;

/// Which side of the link a degenerate Gram–Schmidt residual came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkSide {
    Transmit,
    Receive,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("receiver has no propagation paths")]
    EmptyPathSet,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("noise covariance after combining is singular")]
    SingularNoiseCovariance,

    #[error("precoder has zero Frobenius norm")]
    ZeroPrecoder,

    #[error("selected {side:?} beam lies in the span of previously selected beams")]
    DegenerateResidual { side: LinkSide },

    #[error("codebook exhausted while searching for a non-degenerate beam pair")]
    CodebookExhausted,

    #[error("no artificial-noise dimensions: streams ({streams}) must be fewer than RF chains ({rf_chains})")]
    NoAnDimensions { streams: usize, rf_chains: usize },

    #[error("generalized eigenproblem failed: {0}")]
    PencilSolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
