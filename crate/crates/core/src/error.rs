use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid interval sequence: {0}")]
    InvalidIntervals(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value of {what} at x = {x}")]
    NonFinite { what: String, x: f64 },

    #[error("missing averaged sample at k = {0}")]
    MissingSample(i64),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("truncation budget unreachable: achieved tail bound {achieved:e}, requested {requested:e}")]
    Truncation { achieved: f64, requested: f64 },

    #[error("error at grid index {index}: {source}")]
    AtGridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
