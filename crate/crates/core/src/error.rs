use thiserror::Error;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A walk or game parameter violates its invariants.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// Two walks that must share a period do not.
    #[error("period mismatch: {left} vs {right}")]
    PeriodMismatch { left: usize, right: usize },

    /// An operation that needs zero hold probabilities received a walk with holds.
    #[error("operation requires r_j = 0 for every class, class {class} has r = {hold}")]
    NonzeroHold { class: usize, hold: f64 },

    /// A probability string could not be parsed.
    #[error("cannot parse probability {0:?}")]
    Parse(String),

    /// A linear system turned out to be singular.
    #[error("singular matrix ({0})")]
    Singular(&'static str),

    /// Drift inversion received a walk that is not recurrent.
    #[error("walk is not recurrent: p0p1p2 - q0q1q2 = {0:e}")]
    NotRecurrent(f64),

    /// A root finder could not bracket or converge.
    #[error("root bracketing failed: {0}")]
    RootBracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
