use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("empty table: no data rows")]
    EmptyTable,

    #[error("ragged rows: row {row} has {found} fields, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("non-finite value at feature {feature}, point {point}")]
    NonFinite { feature: usize, point: usize },

    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),

    #[error("feature row {row} is constant and cannot be z-scored")]
    ConstantRow { row: usize },

    #[error("dimension d = {d} exceeds number of points N = {n}; the embedding requires d <= N")]
    TooFewPoints { d: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sample count {samples} is too small: the 4d+2 rule requires at least {required} samples for d = {d}")]
    InsufficientSamples {
        samples: usize,
        required: usize,
        d: usize,
    },

    #[error("singular values must be non-increasing and nonnegative")]
    NotNonIncreasing,

    #[error("matrix is not skew-symmetric (max |a + a^T| = {0:e})")]
    NotSkew(f64),

    #[error("complex tuple must satisfy sum |z|^2 = 2, got {0}")]
    NormPrecondition(f64),

    #[error("Gauss sum bound violated for d = {d}: max |S| = {max_magnitude} > bound {bound}")]
    BoundViolated {
        d: usize,
        max_magnitude: f64,
        bound: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
