use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("evaluation failed at row {row}: {message}")]
    Evaluation { row: usize, message: String },
    #[error("model backend: {0}")]
    Backend(String),
    #[error(transparent)]
    Expr(#[from] uq_expr::EvalError),
    #[error(transparent)]
    Parse(#[from] uq_expr::ParseError),
    #[error("did not converge: {0}")]
    Convergence(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("wrapper: {0}")]
    Wrapper(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(message: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(message.into()))
}
