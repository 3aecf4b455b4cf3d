use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const DOMAIN: i32 = 3;
    pub const SIMULATION: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    /// A core invariant failed while validating one scenario block.
    #[error("{path}: [{block}] {source}")]
    Block {
        path: PathBuf,
        block: &'static str,
        #[source]
        source: gyro_core::Error,
    },

    #[error(transparent)]
    Model(#[from] gyro_core::Error),
}

impl CliError {
    pub fn config(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use gyro_core::Error as E;
        match self {
            CliError::Config { .. } | CliError::Io { .. } | CliError::Csv { .. } => exit::VALIDATION,
            CliError::Block { source: e, .. } | CliError::Model(e) => match e {
                E::Invalid { .. } | E::Infeasible { .. } => exit::VALIDATION,
                E::Domain { .. } | E::Singular(_) | E::Unstable { .. } => exit::DOMAIN,
                E::SimulationAbort { .. } | E::FitFailure { .. } | E::TooManyFailures { .. } => exit::SIMULATION,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
