use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("VLAB_SEED_OVERRIDE must be an unsigned 64-bit integer, got `{0}`")]
    SeedOverride(String),

    #[error(transparent)]
    Core(#[from] vlab_core::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit status: configuration problems are 2, everything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Invalid { .. } | CliError::SeedOverride(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Core(_) => 1,
        }
    }
}
