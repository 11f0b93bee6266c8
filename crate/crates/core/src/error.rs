use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("entries from different quadratic fields where an exact result is required")]
    MixedField,
    #[error("division by zero: ||L_{row} q|| = 0 at q = {q:?}")]
    DivisionByZero { row: usize, q: Vec<i64> },
    #[error("enumeration budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("precondition violated: {0}")]
    PrecondViolation(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("point is not in the region")]
    NotInRegion,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = core::result::Result<T, Error>;
