//! Exact rationals, extended values, affine maps and piecewise-affine cost functions.

mod affine;
mod ext;
mod function;
mod rational;

pub use affine::AffineFn;
pub use ext::ExtValue;
pub use function::{pointwise_extremum, CostFunction, Extremum, Piece};
pub use rational::{ParseRationalError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CostFnError {
    #[error("clock value {0} lies outside the domain")]
    OutOfDomain(Rational),
    #[error("domains do not meet in exactly one point")]
    NotTouching,
    #[error("domains differ")]
    DomainMismatch,
    #[error("infinite piece inside the queried interval")]
    InfinitePiece,
    #[error("empty input")]
    Empty,
    #[error("malformed cost function: {0}")]
    Malformed(String),
}
