use thiserror::Error;

/// Errors produced by the library. The CLI maps every variant to exit status 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("group shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<u64>, Vec<u64>),

    #[error("enumeration limit exceeded: {needed} > {limit}")]
    LimitExceeded { needed: String, limit: u64 },

    #[error("matrix error: {0}")]
    Matrix(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("m-parameter undefined: denominator {denominator} is not positive for W = {witness:?}")]
    UndefinedParameter { witness: Vec<usize>, denominator: String },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("rank is not defined for ground set {0}")]
    RankUndefined(String),

    #[error("all solution counts are zero")]
    NoSolutions,

    #[error("coloring search budget of {0} nodes exhausted")]
    BudgetExceeded(u64),

    #[error("threshold bisection failed for member {member}: {reason}")]
    Bisection { member: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
