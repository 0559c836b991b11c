use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the harness, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot parse {path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: forwarding_core::Error,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_PROPERTY: i32 = 3;

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn solver(context: impl Into<String>, source: forwarding_core::Error) -> Self {
        Self::Solver { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use forwarding_core::Error as E;
        match self {
            Self::Solver { source, .. } => match source {
                E::NonFinite { .. } | E::NonFiniteState | E::Cfl { .. } | E::BracketNotFound { .. } | E::HistoryGap { .. } => {
                    EXIT_NUMERICAL
                }
                _ => EXIT_CONFIG,
            },
            Self::Config(_) | Self::Toml { .. } | Self::Io { .. } | Self::Csv(_) => EXIT_CONFIG,
        }
    }
}
