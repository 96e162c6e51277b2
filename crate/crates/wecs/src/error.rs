use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown basis {name:?}; supported: haar, db2, db4, sym2, sym4, sym8, coif4")]
    UnknownBasis { name: String },

    #[error("{rows}x{cols} image too small for {need}-tap filter under {boundary} boundary")]
    ImageTooSmall {
        rows: usize,
        cols: usize,
        need: usize,
        boundary: &'static str,
    },

    #[error("periodic boundary requires even length, got {len}")]
    OddPeriodic { len: usize },

    #[error("level {requested} infeasible for this image; maximum feasible level is {max_feasible}")]
    LevelTooDeep { requested: usize, max_feasible: usize },

    #[error("non-finite value in {what} at ({row}, {col})")]
    NonFinite {
        what: &'static str,
        row: usize,
        col: usize,
    },

    #[error("negative pixel {value} at ({row}, {col}); intensities must be >= 0")]
    NegativePixel { row: usize, col: usize, value: f64 },

    #[error("{what}: expected {expected_rows}x{expected_cols}, got {got_rows}x{got_cols}")]
    DimsMismatch {
        what: &'static str,
        expected_rows: usize,
        expected_cols: usize,
        got_rows: usize,
        got_cols: usize,
    },

    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("need at least {need} images, got {got}")]
    TooFewImages { need: usize, got: usize },

    #[error("series of length {got} too short to screen; need at least {need}")]
    SeriesTooShort { need: usize, got: usize },

    #[error("every correlation entry is degenerate; nothing to select")]
    AllDegenerate,

    #[error("zero-energy image; energy fraction undefined")]
    ZeroEnergy,

    #[error("stack is not in log domain; log-transform first or opt out explicitly")]
    NotLogDomain,

    #[error("operation requires raw-intensity input, but the stack is already log-domain")]
    NotRawDomain,

    #[error("truth mask is all-{kind}; ROC undefined")]
    DegenerateTruth { kind: &'static str },

    #[error("invalid parameter: {what}")]
    BadParam { what: String },

    #[error("{what} out of bounds: {detail}")]
    OutOfBounds { what: &'static str, detail: String },

    #[error("manifest: {detail}")]
    Manifest { detail: String },

    #[error("{path}: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable one-token category for machine-readable CLI diagnostics.
    pub fn category(&self) -> &'static str {
        use Error::*;
        match self {
            UnknownBasis { .. } => "basis",
            ImageTooSmall { .. } | OddPeriodic { .. } | LevelTooDeep { .. } => "level",
            NonFinite { .. } | NegativePixel { .. } => "data",
            DimsMismatch { .. } | LengthMismatch { .. } | TooFewImages { .. } => "shape",
            SeriesTooShort { .. } | AllDegenerate | ZeroEnergy | DegenerateTruth { .. } => {
                "degenerate"
            }
            NotLogDomain | NotRawDomain => "domain",
            BadParam { .. } | OutOfBounds { .. } => "params",
            Manifest { .. } => "manifest",
            Format { .. } => "format",
            Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            detail: detail.into(),
        }
    }
}
