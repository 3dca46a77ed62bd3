use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("invalid value for `{key}`: {reason}")]
    Range { key: &'static str, reason: String },

    #[error("missing required parameter `{0}`")]
    Missing(&'static str),

    #[error(transparent)]
    Model(#[from] lcsim_core::LcError),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("serialization: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn range(key: &'static str, reason: impl Into<String>) -> Self {
        CliError::Range { key, reason: reason.into() }
    }
}

pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub type Result<T> = std::result::Result<T, CliError>;
