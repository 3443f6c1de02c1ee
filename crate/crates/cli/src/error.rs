use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] sfwm_core::Error),

    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for bad configuration or input, 3 for numerical and estimation
    /// failures, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        use sfwm_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::Config(_) | E::Parse { .. }) => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}
