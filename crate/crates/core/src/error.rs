use std::fmt;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by construction, encoding and analysis operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// `gcd(r(x), x^L - 1) != 1`: tail-biting is infeasible at this length.
    /// `row` identifies the offending generator row when known.
    NotCoprime { l: usize, row: Option<usize> },
    /// A vector or matrix dimension does not match the expected one.
    LengthMismatch { expected: usize, got: usize },
    /// A nested chain is not strictly increasing or does not end at the
    /// interleaver size.
    MalformedChain(String),
    /// Randomized construction (S-random interleaver) exhausted its retry
    /// budget.
    ConstructionFailed(String),
    /// An exhaustive computation exceeded its configured budget.
    BudgetExceeded(String),
    /// A generator matrix does not have full row rank.
    RankDeficient,
    /// Malformed input (parse errors, invalid parameters, bad configs).
    InvalidInput(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotCoprime { l, row } => match row {
                Some(i) => write!(
                    f,
                    "gcd(r_{i}(x), x^{l} - 1) != 1: tail-biting infeasible at L = {l} (row {i})"
                ),
                None => write!(f, "gcd(r(x), x^{l} - 1) != 1: tail-biting infeasible at L = {l}"),
            },
            Error::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Error::MalformedChain(msg) => write!(f, "malformed nested chain: {msg}"),
            Error::ConstructionFailed(msg) => write!(f, "construction failed: {msg}"),
            Error::BudgetExceeded(msg) => write!(f, "budget exceeded: {msg}"),
            Error::RankDeficient => write!(f, "generator matrix is rank deficient"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
