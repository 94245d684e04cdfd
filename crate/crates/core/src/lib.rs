//! Merge sequences, merge-models, ranked models and twin-models over
//! finite binary structures, together with the conversions between them
//! and an exact merge-width search for small instances.

pub mod cwe;
pub mod dot;
pub mod error;
pub mod format;
pub mod lift;
pub mod model;
pub mod oracle;
pub mod ranked;
pub mod sequence;
pub mod structure;
pub mod tree;
pub mod twin;
pub mod verify;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use model::MergeModel;
pub use ranked::{Interval, IntervalRanking, RankedMergeModel};
pub use sequence::MergeSequence;
pub use structure::{BinaryStructure, Graph, Signature};
pub use tree::TreeOrder;
pub use twin::TwinModel;
