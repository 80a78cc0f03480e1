use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state vector is zero")]
    ZeroState,
    #[error("state is not normalized (norm {0})")]
    Unnormalized(f64),
    #[error("no source decay channel for the unentangled system")]
    NoSourceChannel,
    #[error("quadrature did not converge: estimate {estimate}, error {error} > tolerance {tolerance}")]
    QuadratureNonConvergence { estimate: f64, error: f64, tolerance: f64 },
    #[error("integrand tail beyond truncation {truncation} is {tail}, above tolerance {tolerance}")]
    TailTooLarge { truncation: f64, tail: f64, tolerance: f64 },
    #[error("objective failed at every grid point ({failures} points)")]
    AllGridPointsFailed { failures: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
