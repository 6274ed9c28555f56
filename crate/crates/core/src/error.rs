use std::path::PathBuf;

use crate::io::config::ConfigError;
use crate::io::svg::SvgError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition of an operation was not met by its caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    DimensionMismatch {
        expected_w: u32,
        expected_h: u32,
        got_w: u32,
        got_h: u32,
    },

    /// Geometry with zero area where a positive area is required.
    #[error("degenerate path: {0}")]
    Degenerate(String),

    #[error("distribution has zero mass: {0}")]
    ZeroMass(String),

    #[error("count mismatch: {0}")]
    CountMismatch(String),

    #[error("non-finite loss at iteration {iteration}: {detail}")]
    NonFinite { iteration: usize, detail: String },

    #[error(transparent)]
    Svg(#[from] SvgError),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },
}

impl Error {
    pub(crate) fn dims(expected: (u32, u32), got: (u32, u32)) -> Self {
        Error::DimensionMismatch {
            expected_w: expected.0,
            expected_h: expected.1,
            got_w: got.0,
            got_h: got.1,
        }
    }

    /// Short machine-readable category, used by the CLI for one-line reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Contract(_) => "contract",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::Degenerate(_) => "degenerate",
            Error::ZeroMass(_) => "zero-mass",
            Error::CountMismatch(_) => "count-mismatch",
            Error::NonFinite { .. } => "non-finite",
            Error::Svg(_) => "svg",
            Error::Config(_) => "config",
            Error::Image { .. } => "image",
            Error::Io { .. } => "io",
            Error::Trace { .. } => "trace",
        }
    }
}
