use alloc::string::String;

/// Errors raised by the numerical routines of this crate.
///
/// Failed *diagnostics* (an assumption that does not hold on a grid, an
/// invalid disjunction certificate) are values, not errors; this type is for
/// violated preconditions and numerical breakdown.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("rank deficient: expected rank {expected}, numerical rank {found}")]
    RankDeficient { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("vector is not in the contact plane (|alpha(v)| = {residual:e})")]
    NotInContactPlane { residual: f64 },

    #[error("point left the declared domain")]
    OutsideDomain,

    #[error("support violation: |H| = {value:e} at a sample outside the window")]
    SupportViolation { value: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {value} outside table range [{lo}, {hi}]")]
    OutOfTableRange { value: f64, lo: f64, hi: f64 },

    #[error("disjunction failed: minimum sampled distance {min_distance:e} below margin {margin:e}")]
    DisjunctionFailed { min_distance: f64, margin: f64 },

    #[error("complement not contained in the tangent space (distance {distance:e})")]
    ComplementNotContained { distance: f64 },

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("integration truncated: {0}")]
    Truncated(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
