use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: cannot parse {token:?} as a contact count")]
    Parse { line: usize, token: String },

    #[error(
        "line {line}: contact count {value} is not positive; respondents reporting no \
         close-range contacts must be excluded before calibration"
    )]
    NonPositiveDegree { line: usize, value: i64 },

    #[error("degree sequence is empty")]
    EmptySequence,

    #[error("job-contact index {index} out of range for a sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cap {cap} is below the largest diary entry {max}")]
    CapTooSmall { cap: u32, max: u32 },

    #[error("only {found} observations at or above xmin={xmin}; at least {needed} required")]
    InsufficientTail {
        xmin: u32,
        found: usize,
        needed: usize,
    },

    #[error("power-law likelihood maximization did not converge: {0}")]
    NonConvergence(String),

    #[error("unknown contact duration category {code} (expected 1..=5)")]
    UnknownDurationCategory { code: i64 },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed record: {0}")]
    Format(String),

    #[error("experiment {index} failed: {source}")]
    Sweep {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
