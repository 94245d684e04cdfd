use thiserror::Error;

use crate::format::FormatError;
use crate::model::ModelViolation;
use crate::ranked::RankingViolation;
use crate::sequence::SequenceViolation;
use crate::tree::TreeViolation;
use crate::twin::TwinViolation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("{what}: size {size} exceeds limit {limit}")]
    LimitExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("not a graph: {0}")]
    NotAGraph(String),
    #[error("element mismatch: {0}")]
    Mismatch(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("invalid tree-order: {0}")]
    InvalidTree(#[from] TreeViolation),
    #[error("invalid merge-sequence: {0}")]
    InvalidSequence(#[from] SequenceViolation),
    #[error("invalid merge-model: {0}")]
    InvalidModel(#[from] ModelViolation),
    #[error("invalid interval ranking: {0}")]
    InvalidRanking(#[from] RankingViolation),
    #[error("ranked model is not clean: {0}")]
    NotClean(String),
    #[error("ranked model is not compact")]
    NotCompact,
    #[error("invalid twin-model: {0}")]
    InvalidTwin(#[from] TwinViolation),
    #[error("invalid clique expression: {0}")]
    Expression(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Format(#[from] FormatError),
}

pub type Result<T> = std::result::Result<T, Error>;
