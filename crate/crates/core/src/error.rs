use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EvalErrorKind {
    LogNonPositive,
    SqrtNegative,
    DivideByZero,
    NonFinite,
}

impl core::fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            EvalErrorKind::LogNonPositive => "log of non-positive argument",
            EvalErrorKind::SqrtNegative => "sqrt of negative argument",
            EvalErrorKind::DivideByZero => "division by zero",
            EvalErrorKind::NonFinite => "non-finite result",
        })
    }
}

/// A utility expression could not be evaluated. `expr` is the canonical
/// rendering of the offending sub-expression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} in `{expr}` (argument {argument})")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub expr: String,
    pub argument: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("utility evaluation failed at (MSE = {mse}, PA = {pa}): {error}")]
    EvalAt { mse: f64, pa: f64, error: EvalError },

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("grid is not strictly increasing at index {index}")]
    NonMonotoneGrid { index: usize },

    #[error("grid has {len} points, need at least {min}")]
    GridTooSmall { len: usize, min: usize },

    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("adversary utility is undefined on the whole alpha grid at eta = {eta}")]
    NoBestResponse { eta: f64 },

    #[error("adversary utility is undefined at every threshold of the grid")]
    NoEquilibrium,

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
}
