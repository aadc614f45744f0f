use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("award code {0:?} does not match YY/IA/XXXX")]
    InvalidAwardCode(String),

    #[error("input file not found: {}", .0.display())]
    InputNotFound(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The stream as a whole could not be read (bad header, invalid UTF-8).
    #[error("malformed input: {0}")]
    Format(String),

    #[error("sample too small to fit: {0}")]
    InsufficientData(String),

    #[error("all {n_fits} ensemble fits failed to converge")]
    EnsembleFailed { n_fits: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::InputNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    /// True for failures of the numerical stages rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::InsufficientData(_) | Error::EnsembleFailed { .. })
    }
}
