use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truth table has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension {n} exceeds the cap of {cap}")]
    DimensionTooLarge { n: u32, cap: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: u32, got: u32 },

    #[error("mask {mask:#x} has bits outside of [{n}]")]
    MaskOutOfRange { mask: u64, n: u32 },

    #[error("table does not encode a Boolean function")]
    NotBoolean,

    #[error("degree {d} out of range for n = {n}")]
    BadDegree { d: u32, n: u32 },

    #[error("coordinate {index} is not in the index set")]
    IndexNotInSet { index: usize },

    #[error("operation is undefined for the empty index set")]
    EmptySet,

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("value {0} is outside {{0,1}}")]
    RangeViolation(i64),

    #[error("function has degree {degree}, above the requested {d}")]
    DegreeTooHigh { degree: u32, d: u32 },

    #[error("search space too large: {0}")]
    SearchSpaceTooLarge(String),

    #[error("subcube of dimension {0} is too large (max 20)")]
    SubcubeTooLarge(usize),

    #[error("sample budget exhausted: plan needs {needed}, budget is {budget}")]
    BudgetExhausted { needed: u64, budget: u64 },

    #[error("unknown suite {0:?}")]
    UnknownSuite(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
