use thiserror::Error;

/// Errors produced by the estimation and testing pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error(
        "matrix is not positive definite (pivot {pivot:.6e} at index {index}); \
         for a sample covariance this usually means p is too large relative to T; \
         consider shrinkage (--shrinkage lw)"
    )]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("lag {lag} must be smaller than the sample size {sample_size}")]
    LagTooLarge { lag: usize, sample_size: usize },

    #[error("mean scalar m = {m:.6e} is not positive; input is not a valid covariance")]
    NonpositiveMean { m: f64 },

    #[error("Student-t degrees of freedom must exceed 2 (finite variance), got {df}")]
    InvalidDf { df: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
