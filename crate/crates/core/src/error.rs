use thiserror::Error;

use crate::algebra::AlgebraError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("operator entry `{0}` is not affine in x and eps")]
    NotAffine(String),
    #[error("operator entry `{0}` still contains unbound parameters")]
    UnboundParameter(String),
    #[error("expectation is not real (imaginary part {0:e})")]
    NonRealExpectation(f64),
    #[error("aliasing in Fourier inversion: {0}")]
    Aliasing(String),
    #[error("result dominated by truncation: {0}")]
    TruncationDominated(String),
    #[error("payoff table invalid: {0}")]
    InvalidPayoff(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

pub(crate) fn check(cond: bool, name: &'static str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            reason: reason.into(),
        })
    }
}
