use thiserror::Error;

/// Errors raised by the calculus, solver and verification layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `t^(r)` with `t + r` a nonpositive integer and `t` not one.
    #[error("rising function undefined at t = {t}, r = {r}")]
    UndefinedRising { t: f64, r: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid order {0}: must be finite and positive")]
    InvalidOrder(f64),

    /// A grid is too short, or does not cover the points an operation needs.
    #[error("insufficient domain: need offsets {need_lo}..={need_hi}, have {have_lo}..={have_hi}")]
    InsufficientDomain {
        need_lo: i64,
        need_hi: i64,
        have_lo: i64,
        have_hi: i64,
    },

    #[error("offset {offset} outside grid {lo}..={hi}")]
    OutOfGrid { offset: i64, lo: i64, hi: i64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("inadmissible boundary value problem: {0}")]
    Inadmissible(String),

    #[error("inconsistent specification: {0}")]
    InconsistentSpec(String),

    /// The linear system is singular. For admissible boundary problems this
    /// indicates a bug, not bad input.
    #[error("singular linear system")]
    SingularSystem,

    #[error("sampling budget exhausted after {attempts} attempts: {reason}")]
    BudgetExhausted { attempts: usize, reason: String },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
