use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` must be a positive finite number, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("initial state x0 = {x0} must lie strictly above the threshold theta = {theta}")]
    SubthresholdInitialCondition { x0: f64, theta: f64 },

    #[error("time must be finite and non-negative, got {0}")]
    NegativeTime(f64),

    #[error("time must be strictly positive, got {0}")]
    NonPositiveTime(f64),

    #[error("crossing time s' must be strictly positive, got {0}")]
    NonPositiveSPrime(f64),

    #[error("s = {s} lies outside [0, {s_prime}]")]
    OutOfInterval { s: f64, s_prime: f64 },

    #[error("line intercept must be negative, got {0}")]
    InvalidLine(f64),

    #[error("expected s' > s > 0, got s' = {s_prime}, s = {s}")]
    TimeOrderViolation { s_prime: f64, s: f64 },

    #[error("quadrature did not reach relative tolerance {tol:e} within {evaluations} evaluations (estimate {estimate:e})")]
    QuadratureNonConvergence {
        tol: f64,
        evaluations: usize,
        estimate: f64,
    },

    #[error("B must be positive, got {0}")]
    NonPositiveB(f64),

    #[error("hypothesis not met: s' = {s_prime} must exceed {threshold}")]
    HypothesisNotMet { s_prime: f64, threshold: f64 },

    #[error("t = {t} is not above the validity onset u = {onset}")]
    BelowOnset { t: f64, onset: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no path was captured before the horizon")]
    NoCapturedPaths,

    #[error("captured time {0} falls outside the histogram edges")]
    BinningDoesNotCover(f64),

    #[error("insufficient tail data near t = {t}: {events} events, {required} required")]
    InsufficientTailData {
        t: f64,
        events: usize,
        required: usize,
    },

    #[error(
        "power iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("parameter grid is empty")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
