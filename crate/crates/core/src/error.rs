use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unstable key: {0}")]
    Unstable(String),
    #[error("engine {engine} does not support {key}")]
    UnsupportedEngine { engine: String, key: String },
    #[error("cache corrupted: {0}")]
    CacheCorrupt(String),
    #[error("internal consistency violation: {0}")]
    Consistency(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
