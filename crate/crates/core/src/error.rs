use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("minimizer did not converge: {0}")]
    NonConvergence(String),
    #[error("covariance block is singular: {0}")]
    SingularCovariance(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("density integrates to {mass}, not 1")]
    NonNormalized { mass: f64 },
    #[error("degenerate sample cloud: {0}")]
    DegenerateCloud(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
