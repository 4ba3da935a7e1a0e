use std::path::PathBuf;

use chrono::NaiveDateTime;

/// Errors raised while reading, validating or aligning input series.
#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{path}: cannot read file: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: expected header `{expected}`, found `{found}`")]
    Header {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow { path: PathBuf, line: u64, reason: String },
    #[error("{path}:{line}: duplicate timestamp {timestamp}")]
    Duplicate {
        path: PathBuf,
        line: u64,
        timestamp: NaiveDateTime,
    },
    #[error("{path}:{line}: timestamp {timestamp} is earlier than the previous row")]
    OutOfOrder {
        path: PathBuf,
        line: u64,
        timestamp: NaiveDateTime,
    },
    #[error("{path}: gap in series, missing {}", format_missing(.missing))]
    Gap { path: PathBuf, missing: Vec<NaiveDateTime> },
    #[error("{path}: series is empty")]
    Empty { path: PathBuf },
    #[error("weather and price series do not overlap on whole days")]
    EmptyIntersection,
    #[error("series covers {available} steps but {required} are required")]
    TooShort { available: usize, required: usize },
}

fn format_missing(missing: &[NaiveDateTime]) -> String {
    const SHOWN: usize = 8;
    let mut parts: Vec<String> = missing.iter().take(SHOWN).map(|t| t.to_string()).collect();
    if missing.len() > SHOWN {
        parts.push(format!("... ({} total)", missing.len()));
    }
    parts.join(", ")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(#[from] DataError),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category, used by the CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Data(_) => "data",
            Error::Contract(_) => "contract",
            Error::Numeric(_) => "numeric",
            Error::Solver(_) => "solver",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
