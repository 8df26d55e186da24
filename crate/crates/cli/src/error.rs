use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments, manifest or configuration.
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] sena_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing CSV report: {0}")]
    Csv(#[from] csv::Error),

    #[error("writing JSON report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for invalid invocations, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        use sena_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::Config(_) | E::InvalidParameter(_) | E::InvalidModel(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
