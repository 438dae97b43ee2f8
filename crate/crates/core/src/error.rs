use thiserror::Error;

/// Errors produced by the library. The CLI maps these onto exit codes:
/// usage errors exit 1, numeric/degenerate conditions exit 2, resource
/// caps exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("invalid usage: {0}")]
    Usage(String),
    #[error("degenerate conditioning: {0}")]
    Degenerate(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Domain(_) | Error::Degenerate(_) => 2,
            Error::Resource(_) => 3,
        }
    }
}
