use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("numeric error: {message} (achieved error estimate {estimate:e})")]
    Numeric { message: String, estimate: f64 },
    #[error("resource error: {0}")]
    Resource(String),
    #[error("moment of order {0} unavailable")]
    MomentUnavailable(usize),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
