use thiserror::Error;

/// Errors raised by the planning, statistics and lab routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{name} {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("cross-task comparison rejected: `{a}` vs `{b}` (paired tests need a shared task)")]
    CrossTask { a: String, b: String },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("comparison gap exceeds metric range ({epsilon} > {range})")]
    GapExceedsRange { epsilon: f64, range: f64 },

    #[error("collapsed comparison: pilot performances are identical; run collapse detection")]
    CollapsedComparison,

    #[error("metric `{0}` is unbounded; supply an explicit metric range")]
    UnboundedMetric(&'static str),

    #[error("unknown seed `{0}`")]
    UnknownSeed(String),

    #[error("subsample size {requested} exceeds pool of {pool} items")]
    SubsampleTooLarge { requested: usize, pool: usize },

    #[error("class {class} has {available} samples, needs {required}")]
    InsufficientData {
        class: usize,
        available: usize,
        required: usize,
    },

    #[error("invalid paired predictions: {0}")]
    InvalidPredictions(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        name,
        reason: reason.into(),
    }
}
