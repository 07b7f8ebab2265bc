use thiserror::Error;

use crate::grid::AngleProfile;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("arcsin branch violated at node {node}: m2 = {m2} < 0")]
    Branch { node: usize, m2: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("optimization failed after {iterations} iterations: {reason}")]
    Optimization {
        reason: String,
        iterations: usize,
        last: Box<AngleProfile>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
