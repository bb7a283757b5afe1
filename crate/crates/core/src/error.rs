use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the credal toolkit.
#[derive(Debug, Error)]
pub enum CredalError {
    #[error("probability entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("probability entry {index} is not finite ({value})")]
    NonFiniteEntry { index: usize, value: f64 },

    #[error("probability vector needs at least 2 classes, got {0}")]
    DimensionTooSmall(usize),

    #[error("probabilities sum to {sum}, outside tolerance {tolerance} of 1")]
    SumOutOfTolerance { sum: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("prediction set must contain at least one sample")]
    EmptyPredictionSet,

    #[error("invalid interval bounds for class {index}: [{lower}, {upper}]")]
    InvalidBounds {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error(
        "improper intervals: sum of lower bounds {lower_sum}, sum of upper bounds {upper_sum}"
    )]
    ImproperIntervals { lower_sum: f64, upper_sum: f64 },

    #[error("water-filling bisection did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("invalid reduction size J={j} for {classes} classes (need 2 <= J <= C)")]
    InvalidJ { j: usize, classes: usize },

    #[error("class index {index} out of range for {classes} classes")]
    IndexOutOfRange { index: usize, classes: usize },

    #[error("{classes} classes exceed the set-function limit of {limit}; reduce the interval system first")]
    TooManyClasses { classes: usize, limit: usize },

    #[error("empty score input")]
    EmptyInput,

    #[error("score at position {index} is not finite ({value})")]
    NonFiniteScore { index: usize, value: f64 },

    #[error("length mismatch: {predictions} predictions, {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("bin count must be at least 1")]
    InvalidBins,

    #[error("labels present on some instances only")]
    PartialLabels,

    #[error(transparent)]
    Ingest(#[from] IngestError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Errors raised while parsing prediction files.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("not an npy file (bad magic bytes)")]
    BadMagic,

    #[error("unsupported npy version {major}.{minor} (only 1.0)")]
    UnsupportedVersion { major: u8, minor: u8 },

    #[error("unsupported npy dtype {0:?} (expected '<f4' or '<f8')")]
    UnsupportedDtype(String),

    #[error("fortran-ordered npy arrays are not supported")]
    FortranOrderUnsupported,

    #[error("npy array must have rank 2 or 3, got shape {0:?}")]
    ShapeRankInvalid(Vec<usize>),

    #[error("npy header is malformed: {0}")]
    MalformedHeader(String),

    #[error("npy payload truncated: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("invalid probability at byte offset {offset} (instance {instance}, sample {sample}): {reason}")]
    InvalidProbabilityAt {
        offset: usize,
        instance: usize,
        sample: usize,
        reason: String,
    },

    #[error("line {line}: malformed record: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("line {line}: expected {expected} classes, found {found}")]
    InconsistentC {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: invalid probability vector: {reason}")]
    InvalidProbability { line: usize, reason: String },

    #[error("csv header mismatch: {0}")]
    HeaderMismatch(String),

    #[error("instance {instance:?}: duplicate sample index {sample}")]
    DuplicateSample { instance: String, sample: usize },

    #[error("instance {instance:?}: missing sample index {sample}")]
    MissingSample { instance: String, sample: usize },

    #[error("file contains no instances")]
    NoInstances,
}

impl CredalError {
    /// True for errors caused by the numerical routines rather than by input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, CredalError::NoConvergence { .. })
    }

    /// True for errors caused by the file system.
    pub fn is_io(&self) -> bool {
        matches!(self, CredalError::Io { .. })
    }
}

pub type Result<T, E = CredalError> = std::result::Result<T, E>;
