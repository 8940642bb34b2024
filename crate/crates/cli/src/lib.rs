//! Library side of the `dfs-sim` executable.

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod output;
pub mod states;

pub use config::RunConfig;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "DFS_SIM_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Core(#[from] dfs_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config { field: field.to_string(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}
