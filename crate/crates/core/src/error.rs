use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Domain(String),
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("two-body energy {energy} outside bracket [{lo}, {hi}]")]
    Bracket { energy: f64, lo: f64, hi: f64 },
    #[error("sampler: {0}")]
    Sampler(String),
    #[error("density is not negligible at the box edge (edge/max = {ratio:.3e})")]
    Padding { ratio: f64 },
    #[error("polynomial pair rejected: {0}")]
    Polynomial(String),
    #[error("minimization diverged after {iterations} iterations (energy {energy:.6e})")]
    Divergence { iterations: usize, energy: f64 },
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
