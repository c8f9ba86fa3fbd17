use std::path::PathBuf;

/// Process exit codes. Non-convergence is not an error: outputs are still
/// written and `main` exits with [`EXIT_NOT_CONVERGED`].
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] qudit_sim::error::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Io { .. } | Self::Core(qudit_sim::error::Error::Io { .. }) => EXIT_IO,
            Self::Core(_) => EXIT_CONFIG,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
