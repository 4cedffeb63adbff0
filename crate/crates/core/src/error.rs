use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor or operation received a parameter outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The arguments are valid on their own but the operation is undefined for them
    /// (time outside a trajectory, nonpositive values in a log fit, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A series, quadrature or integrator failed to reach its tolerance.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("explicit step dt = {dt:e} exceeds the stable limit {max_dt:e}")]
    Stability { dt: f64, max_dt: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn accuracy(msg: impl Into<String>) -> Self {
        Error::Accuracy(msg.into())
    }
}
