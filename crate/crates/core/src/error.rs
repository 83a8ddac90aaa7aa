use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// `θ` lies within the boundary tolerance of `∂D`.
    #[error("theta is on or too close to the domain boundary (min q = {min_q:e})")]
    NearBoundary { min_q: f64 },
    /// `H` has no root on the negative axis (happens for `x ≥ 2/3`).
    #[error("H has no negative root at x = {x}")]
    NoRoot { x: f64 },
    #[error("no sampled point fell in the constraint set")]
    NoConstraintPoints,
    #[error("rate curve cannot be interpolated: {0}")]
    InsufficientCurve(String),
    #[error("theta = {theta} outside the admissible interval ({lo}, {hi})")]
    OutOfThetaRange { theta: f64, lo: f64, hi: f64 },
    #[error("transition hypothesis fails: {0}")]
    HypothesisFails(String),
    #[error("importance weights are degenerate (effective sample size {ess:.1})")]
    DegenerateWeights { ess: f64 },
    #[error("N = {n} exceeds the enumeration limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidParams(String::from(msg))
}
