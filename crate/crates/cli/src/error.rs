use std::path::{Path, PathBuf};

/// Process exit codes. Stable: scripts depend on them.
pub mod exit {
    pub const MISSING_FILE: i32 = 1;
    pub const INVALID_INPUT: i32 = 2;
    pub const RESAMPLE_EXHAUSTED: i32 = 3;
    pub const DISCONNECTED: i32 = 4;
    pub const CAP_EXCEEDED: i32 = 5;
    /// Failed verification: `VERIFY_BASE + index` of the first failing
    /// property in canonical order.
    pub const VERIFY_BASE: i32 = 10;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: file not found", path.display())]
    Missing { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Core(#[from] quasirand::Error),
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String, i32),
}

impl CliError {
    pub fn code(&self) -> i32 {
        use quasirand::Error as E;
        match self {
            CliError::Missing { .. } => exit::MISSING_FILE,
            CliError::Io { .. } | CliError::Json { .. } | CliError::Usage(_) => exit::INVALID_INPUT,
            CliError::VerifyFailed(_, code) => *code,
            CliError::Core(e) => match e {
                E::EmptyCluster(_) => exit::RESAMPLE_EXHAUSTED,
                E::Disconnected | E::ZeroDegree(_) => exit::DISCONNECTED,
                E::CapExceeded { .. } | E::BudgetExceeded { .. } => exit::CAP_EXCEEDED,
                _ => exit::INVALID_INPUT,
            },
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            CliError::Missing { path: path.to_path_buf() }
        } else {
            CliError::Io { path: path.to_path_buf(), source }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
