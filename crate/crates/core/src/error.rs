use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point lies on the diagonal z = w, where the kernel is singular")]
    Diagonal,

    #[error("{what} is infeasible: {reason}")]
    Infeasible { what: &'static str, reason: String },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    NonConvergence {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("truncation overflow: degree {requested} requested but input is exact only through degree {available}")]
    TruncationOverflow { requested: usize, available: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
