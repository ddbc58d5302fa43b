use std::io;
use std::path::{Path, PathBuf};

/// Errors from file handling, batch runs and the command line.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: file not found", .0.display())]
    NotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: malformed RIFF/WAVE header: {reason}", path.display())]
    MalformedWav { path: PathBuf, reason: String },
    #[error("{}: unsupported encoding: {reason}", path.display())]
    UnsupportedEncoding { path: PathBuf, reason: String },
    #[error("{}: line {line}: {reason}", path.display())]
    Manifest {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{}: invalid feature file: {reason}", path.display())]
    FeatureFormat { path: PathBuf, reason: String },
    #[error("empty manifest")]
    EmptyManifest,
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] edc_core::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            Error::NotFound(path.to_path_buf())
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }

    pub(crate) fn format(path: &Path, reason: impl Into<String>) -> Self {
        Error::FeatureFormat {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 2 for bad arguments, 3 for I/O failures, 4 for
    /// malformed data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Core(edc_core::Error::InvalidConfig(_)) => 2,
            Error::NotFound(_) | Error::Io { .. } => 3,
            _ => 4,
        }
    }
}
