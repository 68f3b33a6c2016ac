//! First-order formulas over finite structures: syntax, evaluation,
//! relativization, the rank-`n` distinguishing sentences and an
//! Ehrenfeucht–Fraïssé game solver.

mod bounded;
mod corpus;
mod ef;
mod eval;
mod formula;
mod phi;
mod relativize;
mod sexpr;

use thiserror::Error;

use crate::model::ModelError;

pub use bounded::{bounded_domain, eval_via_bounded_substructure};
pub use corpus::{formula_corpus, CorpusConfig, Vocabulary};
pub use ef::{ef_equivalent, ef_equivalent_with, EfLimits};
pub use eval::{assign, eval, satisfiers, Assignment, Evaluator};
pub use formula::{Formula, Var};
pub use phi::phi_n;
pub use relativize::{relativize, relativize_expanded, relativize_to, Scope};
pub use sexpr::parse_formula;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("unbound variable {0}")]
    UnboundVariable(Var),
    #[error("unknown relation symbol {0}")]
    UnknownRelation(String),
    #[error("{name} used with {arity} arguments")]
    Arity { name: String, arity: usize },
    #[error("variable capture: {0} is bound inside the formula")]
    VariableCapture(Var),
    #[error("rank must be at least 1")]
    RankZero,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("too few plain elements in truncation: need {needed}, have {available}")]
    TooFewPlain { needed: usize, available: usize },
    #[error("game search exceeded {states} states")]
    ResourceCap { states: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}
