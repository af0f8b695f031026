use thiserror::Error;

/// Failure of a truncated expectation: the conditioning set has no mass.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum TruncationError {
    #[error("interval ({lower}, {upper}] carries no probability mass")]
    EmptyInterval { lower: f64, upper: f64 },
    #[error("tail [{lower}, inf) carries no probability mass")]
    EmptyTail { lower: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "invalid GE parameters: alpha = {alpha}, lambda = {lambda} (both must be finite and > 0)"
    )]
    InvalidParams { alpha: f64, lambda: f64 },
    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),
    #[error("invalid inspection schedule: {0}")]
    InvalidSchedule(&'static str),
    #[error("invalid removal plan: {0}")]
    InvalidPlan(&'static str),
    #[error("invalid dataset: {0}")]
    InvalidDataset(&'static str),
    #[error("length mismatch: schedule has {schedule} inspections, other input has {other}")]
    LengthMismatch { schedule: usize, other: usize },
    #[error("interval {interval}: {source}")]
    Truncation {
        interval: usize,
        #[source]
        source: TruncationError,
    },
    #[error("{0}")]
    Truncated(#[from] TruncationError),
    #[error("update has a non-positive denominator ({0})")]
    NonPositiveDenominator(f64),
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(&'static str),
}
