use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bandwidth must be strictly positive and finite, got {0}")]
    InvalidBandwidth(f64),

    #[error("kernel support half-width must be strictly positive and finite, got {0}")]
    InvalidSupport(f64),

    #[error("unsupported kernel `{0}` (expected epanechnikov, uniform or triangular)")]
    UnknownKernel(String),

    #[error("trimming proportion must lie in [0, 1/2), got {0}")]
    InvalidAlpha(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample is empty")]
    EmptySample,

    #[error("covariate and response lengths differ ({xs} vs {ys})")]
    LengthMismatch { xs: usize, ys: usize },

    #[error("non-finite value at observation {index}")]
    NonFinite { index: usize },

    #[error("no retained observation has positive kernel weight at x0 = {x0}")]
    EmptyKernelWindow { x0: f64 },

    #[error("trimming leaves no observations (n = {n}, alpha = {alpha})")]
    DegenerateTrim { n: usize, alpha: f64 },

    #[error("covariate density vanishes at x = {x}")]
    UnsupportedPoint { x: f64 },

    #[error("order statistic index {i} outside 1..={n}")]
    IndexOutOfRange { i: usize, n: usize },

    #[error("alpha = {alpha}: {source}")]
    AtAlpha {
        alpha: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("replication {index} failed: {source}")]
    ReplicationFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("bootstrap resample {index} failed: {source}")]
    ResampleFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("query point is not estimable: {failed} of {total} resamples had an empty kernel window")]
    UnestimableQuery { failed: usize, total: usize },

    #[error("estimator variance is zero at alpha = {alpha}; efficiency undefined")]
    DegenerateVariance { alpha: f64 },

    #[error("fewer than two usable replications at alpha = {alpha}")]
    TooFewReplications { alpha: f64 },

    #[error("no contamination level up to m = n broke the estimator")]
    NoBreakdownDetected,

    #[error("contamination count {m} exceeds sample size {n}")]
    ContaminationTooLarge { m: usize, n: usize },

    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("column `{0}` not present in header")]
    ColumnMissing(String),

    #[error("no row has numeric values in both selected columns")]
    NoValidRows,

    #[error("column is constant; min-max scaling undefined")]
    ConstantColumn,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the failure stems from user input (files, flags, malformed data)
    /// rather than from the numerics.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InvalidBandwidth(_)
            | Error::InvalidSupport(_)
            | Error::UnknownKernel(_)
            | Error::InvalidAlpha(_)
            | Error::InvalidParameter(_)
            | Error::EmptySample
            | Error::LengthMismatch { .. }
            | Error::NonFinite { .. }
            | Error::ContaminationTooLarge { .. }
            | Error::FileNotFound(_)
            | Error::ColumnMissing(_)
            | Error::NoValidRows
            | Error::ConstantColumn
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => true,
            Error::AtAlpha { source, .. }
            | Error::ReplicationFailed { source, .. }
            | Error::ResampleFailed { source, .. } => source.is_input_error(),
            _ => false,
        }
    }

    /// Innermost cause, with the index/alpha wrappers peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtAlpha { source, .. }
            | Error::ReplicationFailed { source, .. }
            | Error::ResampleFailed { source, .. } => source.root(),
            other => other,
        }
    }
}
