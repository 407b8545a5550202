use thiserror::Error;

/// Errors raised by the compression, geometry and measurement routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("induced ball is degenerate (radius 0)")]
    DegenerateBall,

    #[error("cannot interleave {k} points with a point and its antipodal image at uniform spacing (k must be even and >= 2)")]
    PlacementConflict { k: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("compression gap {gap} is not below 1")]
    GapTooLarge { gap: f64 },

    #[error("s = {s} gives s - 3 odd; the circle interleave needs s odd")]
    Parity { s: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("non-positive areas cannot be fitted on a log scale: {excluded:?}")]
    NonPositiveAreas { excluded: Vec<(usize, f64)> },

    #[error("incremental cache disagrees with full recomputation: cached {cached}, full {full}")]
    CacheInconsistent { cached: f64, full: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
