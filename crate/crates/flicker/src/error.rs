use std::path::PathBuf;

use flicker_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    ConfigFile { path: PathBuf, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Estimation(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// 2 for configuration problems, 3 for bad or missing data, 4 for
    /// numeric failures inside the estimator.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ConfigFile { .. } => 2,
            Error::Parse { .. } | Error::Data(_) | Error::Io { .. } => 3,
            Error::Estimation(e) => match e {
                CoreError::InvalidSpec(_)
                | CoreError::UnknownFrequency(_)
                | CoreError::Shape { .. } => 2,
                CoreError::InsufficientData { .. } | CoreError::NumericInput(_) => 3,
                CoreError::Feasibility { .. } | CoreError::DegenerateEnvelope { .. } => 4,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
