//! The coding constructions: the stage-coding warm-up pair, spine-and-box
//! structures driven by a monotone approximation, the composites that add a
//! union of E-trees, and everything that reads sets back out of isomorphisms.

mod boxes;
mod composite;
mod modulus_iso;
mod primality;
mod profile;
mod warmup;

use thiserror::Error;

use crate::baf::BafError;
use crate::effective::EffectiveError;
use crate::logic::LogicError;
use crate::model::{Element, FiniteStructure, ModelError, Tree};

pub use boxes::{boxes_canonical_iso, build_boxes, extract_dominator, BoxCaps, BoxPair};
pub use composite::{
    build_composite, build_s_omega, end_to_end, glue_witness, s_omega_iso, CompositeStructure, EndToEndReport, Glue,
    PipelineCaps, SOmegaCaps, Side,
};
pub use modulus_iso::iso_with_modulus;
pub use primality::{primality_report, PrimalityMismatch, PrimalityReport, PrimalityTarget, TupleBudget};
pub use profile::{threshold_profile, SortProfile, ThresholdProfile};
pub use warmup::{
    build_warmup, decode_from_warmup_iso, exhaustive_decode_check, warmup_canonical_iso, warmup_iso_with_d,
    DecodeCoverage, WarmupCaps, WarmupPair,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoderError {
    #[error("invalid caps: {0}")]
    Caps(String),
    #[error("witness invalid: {0}")]
    WitnessInvalid(String),
    #[error("copy malformed: {0}")]
    CopyMalformed(String),
    #[error("copy inconsistent with modulus at sort {n}: expected {expected} E-owning spine elements, found {found}")]
    CopyInconsistent { n: u32, expected: u32, found: u32 },
    #[error("{claim} violated: {detail}")]
    ClaimViolated { claim: &'static str, detail: String },
    #[error("stage {stage} failed: {detail}")]
    Stage { stage: &'static str, detail: String },
    #[error(transparent)]
    Baf(#[from] BafError),
    #[error(transparent)]
    Effective(#[from] EffectiveError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Elements of `s` carrying both `tag_a` and `tag_b`, in id order.
fn tagged_both(s: &FiniteStructure, tag_a: &str, tag_b: &str) -> Vec<Element> {
    match (s.unary_rel(tag_a), s.unary_rel(tag_b)) {
        (Some(a), Some(b)) => a.intersection(b).copied().collect(),
        _ => Vec::new(),
    }
}

/// The level-`m` box of `owner`, read as a tree.
fn box_tree(s: &FiniteStructure, owner: Element, m: u32) -> Result<(Tree, Vec<Element>), ModelError> {
    let members = s.box_members(owner, m);
    if members.is_empty() {
        return Err(ModelError::Malformed(format!("element {owner} has no level-{m} box")));
    }
    Tree::from_elements(s, &members)
}
