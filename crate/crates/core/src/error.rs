use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singularity at {at}: {what}")]
    Singularity { at: f64, what: &'static str },
    #[error("orbit escapes the left branch: 1/x^t - j = {margin} < 1")]
    OrbitEscape { margin: f64 },
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("fit failure: {0}")]
    Fit(String),
    #[error("solver failure: residuals ({r1:e}, {r2:e}) exceed tolerance")]
    Solver { r1: f64, r2: f64 },
    #[error("bracket failure: {0}")]
    Bracket(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
