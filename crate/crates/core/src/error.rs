use thiserror::Error;

/// Errors raised by the arithmetic, sum evaluators and bound evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} out of range: need 2 < p < 2^31")]
    Overflow(u64),
    #[error("0 has no multiplicative inverse")]
    ZeroInverse,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("infeasible: {needed} operations exceed budget of {budget}")]
    Infeasible { needed: u128, budget: u64 },
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("polynomial is constant")]
    ConstantPolynomial,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

impl Error {
    /// Variant name, for messages that must identify the failure class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NotPrime",
            Error::Overflow(_) => "Overflow",
            Error::ZeroInverse => "ZeroInverse",
            Error::DomainError(_) => "DomainError",
            Error::Infeasible { .. } => "Infeasible",
            Error::IndexMismatch(_) => "IndexMismatch",
            Error::ConstantPolynomial => "ConstantPolynomial",
            Error::PreconditionFailed(_) => "PreconditionFailed",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
