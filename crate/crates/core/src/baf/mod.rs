//! Back-and-forth trees at finite ranks and at the first limit level, their
//! classifier, the tree sequences coding bounded predicates, the
//! like-to-like isomorphism procedure and isolating formulas.

mod build;
mod classify;
mod csequence;
mod iso;
mod isolate;
mod params;

use thiserror::Error;

use crate::logic::LogicError;
use crate::model::ModelError;

pub use build::{build_tree, tree_size, TreeArtifact};
pub use classify::{
    apparent_rank, classify, classify_limit, classify_limit_with, height, shape_kind, LimitClass, RankOracle,
};
pub use csequence::{c_sequence, Matrix, SigmaPredicateSpec};
pub use iso::{iso_baf, iso_baf_with};
pub use isolate::{isolating_formula, tuple_vars};
pub use params::{fundamental, Kind, LimitIndex, TreeKind, TruncationParams, FUNDAMENTAL_SEQUENCE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BafError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("rank {rank} over cap {cap}")]
    RankOverCap { rank: u32, cap: u32 },
    #[error("malformed back-and-forth tree: {0}")]
    Malformed(String),
    #[error("not isomorphic at rank {rank}: {left} vs {right}")]
    NotIsomorphic { rank: u32, left: Kind, right: Kind },
    #[error("incompatible truncations: {0}")]
    IncompatibleTruncations(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
