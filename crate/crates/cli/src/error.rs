use std::path::PathBuf;

use distrust_core::Error as CoreError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } => match source.root() {
                CoreError::Infeasible
                | CoreError::Unbounded
                | CoreError::Numerical(_)
                | CoreError::BasisGuard(_) => 3,
                _ => 2,
            },
            _ => 2,
        }
    }
}

/// Attaches a module context to core errors.
pub trait CoreContext<T> {
    fn ctx(self, context: &str) -> Result<T>;
}

impl<T> CoreContext<T> for std::result::Result<T, CoreError> {
    fn ctx(self, context: &str) -> Result<T> {
        self.map_err(|source| CliError::Core { context: context.to_string(), source })
    }
}
