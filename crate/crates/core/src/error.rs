use thiserror::Error;

/// Errors raised by the library. Each variant corresponds to a violated
/// precondition or a numerical failure that callers may want to tell apart.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("coupling q = 0 is undefined for the matching equation (impurity required)")]
    UndefinedCoupling,

    #[error("no H1 stationary wave for |q| = {q_abs} <= 2 (ground states require |q| > 2)")]
    NoH1Wave { q_abs: f64 },

    #[error("speed |v| = {0} is not subluminal (|v| < 1 required)")]
    Superluminal(f64),

    #[error(
        "mollifier width eps = {eps} under-resolved on a grid with dx = {dx} (need eps >= 2 dx)"
    )]
    UnresolvedMollifier { eps: f64, dx: f64 },

    #[error("time step dt = {dt} violates CFL bound 0.9 dx = {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("numerical blow-up detected at t = {time}")]
    BlowUp { time: f64 },

    #[error("light cone leaves the domain: {0}")]
    LightCone(String),

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("no growth detected: {0}")]
    NoGrowth(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
