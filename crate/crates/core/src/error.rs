use crate::costfn::{CostFnError, Rational};
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("location {0} is not urgent")]
    NotUrgent(String),
    #[error("clock value {0} outside the game's interval")]
    OutOfRange(Rational),
    #[error("value iteration did not stabilise within {limit} iterations")]
    IterationLimit { limit: u64 },
    #[error("values are not a fixed point at location {0}")]
    NotFixedPoint(String),
    #[error("integer overflow in value iteration")]
    Overflow,
    #[error("internal bound violated: {0}")]
    BoundViolated(String),
    #[error("infinite value at {0}; prune the game first")]
    InfiniteValue(String),
    #[error("reset cycle through {}", .0.join(" -> "))]
    ResetCycle(Vec<String>),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("not negative-reset-acyclic: {0}")]
    NotNra(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    CostFn(#[from] CostFnError),
}

impl SolverError {
    /// True for failures of an internal invariant rather than bad input.
    pub fn is_assertion(&self) -> bool {
        matches!(
            self,
            SolverError::IterationLimit { .. }
                | SolverError::NotFixedPoint(_)
                | SolverError::BoundViolated(_)
                | SolverError::Overflow
        )
    }
}
