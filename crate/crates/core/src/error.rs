//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("vertex id {0} out of range")]
    InvalidVertex(usize),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("graph contains a directed cycle")]
    Cycle,
    #[error("sets overlap: {0}")]
    Overlap(String),
    #[error("inclusion assumptions violated: {0}")]
    InclusionViolation(String),
    #[error("not a valid adjustment set: {0}")]
    InvalidAdjustmentSet(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("endpoints are adjacent; no finite vertex cut exists")]
    NoFiniteCut,
    #[error("not an A-Y cut: {0}")]
    NotACut(String),
    #[error("joint state space has {0} configurations, exceeding the cap of {1}")]
    StateSpaceTooLarge(u128, u64),
    #[error("positivity violated: {0}")]
    PositivityViolation(String),
    #[error("enumeration universe of {0} vertices exceeds the cap of {1}")]
    TooLarge(usize, usize),
    #[error("malformed model: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, Error>;
