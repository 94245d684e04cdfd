//! Line-oriented text formats for structures, graphs, sequences, models,
//! twin-models and clique-width expressions.
//!
//! All writers emit names and pairs in sorted order, so that equal values
//! serialize to identical bytes.

use std::fmt;

use thiserror::Error;

use crate::cwe::CliqueExpression;
use crate::error::{Error, Result};
use crate::model::MergeModel;
use crate::ranked::{IntervalRanking, RankedMergeModel};
use crate::sequence::MergeSequence;
use crate::structure::{BinaryStructure, Graph};
use crate::twin::TwinModel;

mod bst;
mod cwe;
mod gr;
mod mmod;
mod mseq;
mod tmod;
mod token;

pub use bst::{parse_bst, write_bst};
pub use cwe::{parse_cwe, write_cwe, MAX_DEPTH};
pub use gr::parse_gr;
pub use mmod::{parse_mmod, write_mmod, write_ranked};
pub use mseq::{parse_mseq, write_mseq};
pub use tmod::{parse_tmod, write_tmod};

/// A syntax error at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl FormatError {
    pub(crate) fn at(line: usize, col: usize, message: impl Into<String>) -> Error {
        Error::Format(FormatError {
            line,
            col,
            message: message.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Structure,
    Graph,
    Sequence,
    Model,
    Twin,
    Expression,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Structure => "structure",
            Kind::Graph => "graph",
            Kind::Sequence => "merge sequence",
            Kind::Model => "merge-model",
            Kind::Twin => "twin-model",
            Kind::Expression => "clique-width expression",
        })
    }
}

/// Infers the file kind from its first token.
pub fn detect(text: &str) -> Result<Kind> {
    let lines = token::lines(text)?;
    let Some(first) = lines.first().and_then(|l| l.first()) else {
        return Err(FormatError::at(1, 1, "empty input"));
    };
    Ok(match first.text {
        "structure" => Kind::Structure,
        "p" | "c" => Kind::Graph,
        "mergeseq" => Kind::Sequence,
        "mergemodel" => Kind::Model,
        "twinmodel" => Kind::Twin,
        "signature" | "(" => Kind::Expression,
        other => {
            return Err(FormatError::at(
                first.line,
                first.col,
                format!("unknown header `{other}`"),
            ))
        }
    })
}

/// A merge-model file, with its ranking if every node carries an interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFile {
    pub model: MergeModel,
    pub ranking: Option<IntervalRanking>,
}

impl ModelFile {
    pub fn ranked(&self) -> Option<RankedMergeModel> {
        self.ranking
            .as_ref()
            .map(|r| RankedMergeModel::new(self.model.clone(), r.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Document {
    Structure(BinaryStructure),
    Graph(Graph),
    Sequence(MergeSequence),
    Model(ModelFile),
    Twin(TwinModel),
    Expression(CliqueExpression),
}

impl Document {
    pub fn kind(&self) -> Kind {
        match self {
            Document::Structure(_) => Kind::Structure,
            Document::Graph(_) => Kind::Graph,
            Document::Sequence(_) => Kind::Sequence,
            Document::Model(_) => Kind::Model,
            Document::Twin(_) => Kind::Twin,
            Document::Expression(_) => Kind::Expression,
        }
    }
}

pub fn parse_any(text: &str) -> Result<Document> {
    Ok(match detect(text)? {
        Kind::Structure => Document::Structure(parse_bst(text)?),
        Kind::Graph => Document::Graph(parse_gr(text, "graph")?),
        Kind::Sequence => Document::Sequence(parse_mseq(text)?),
        Kind::Model => Document::Model(parse_mmod(text)?),
        Kind::Twin => Document::Twin(parse_tmod(text)?),
        Kind::Expression => Document::Expression(parse_cwe(text)?),
    })
}
