use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("numerical blow-up at t = {t}")]
    Blowup { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
