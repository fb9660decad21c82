//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(String),
    #[error("optimal arm is not unique in context {context}")]
    NonUniqueOptimum { context: usize },
    #[error("constraint requested for the optimal arm of context {context}")]
    OptimalArmConstraint { context: usize },
    #[error("no realizable representation in the set")]
    Unrealizable,
    #[error("representation `{0}` is misspecified but the operation requires full realizability")]
    NotFullyRealizable(String),
    #[error("oracle size limits exceeded: {0}")]
    OracleTooLarge(String),
    #[error("policy-class construction needs d*N >= A (got zero contexts)")]
    TooFewPolicies,
    #[error("dimension list out of range: {0}")]
    DimsOutOfRange(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("master linear program infeasible")]
    MasterInfeasible,
    #[error("instance failed validation: {0}")]
    InvalidInstance(String),
    #[error("instance file rejected: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
