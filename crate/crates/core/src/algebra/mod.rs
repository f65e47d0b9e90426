//! Noncommutative operator polynomials, 2x2 operator matrices and the
//! quantum stochastic calculus built on top of them.

mod evolution;
mod matrix;
mod poly;
mod qsd;
mod scalar;
mod syntax;

use thiserror::Error;

pub use evolution::{rotated_price_operator, spread_price_operator, EvolutionSpec, GeneratorCoeffs};
pub use matrix::OpMatrix;
pub use poly::{Generator, Monomial, NCPoly, Params, Word};
pub use qsd::{ito_mul, qsd_power, Basis, QSDifferential};
pub use scalar::{Scalar, EQ_TOL, ZERO_TOL};
pub use syntax::{parse_matrix, parse_poly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("power of a differential must be at least 1")]
    ZeroPower,
    #[error("{0} must be self-adjoint")]
    NotSelfAdjoint(&'static str),
    #[error("scattering matrix must not contain generators")]
    NonConstantScattering,
    #[error("scattering matrix must be unitary")]
    NonUnitaryScattering,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}
