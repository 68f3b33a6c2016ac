//! Finite relational structures, rooted trees, isomorphism witnesses and the
//! exhaustive search used as an oracle throughout the crate.

mod index;
mod search;
mod structure;
mod tree;
mod witness;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use index::RelIndex;
pub use search::{
    brute_cap, extend_isomorphism, find_isomorphisms, find_isomorphisms_with, image_set, isomorphic, orbit,
    orbit_with, SearchConfig, BRUTE_CAP_ENV, DEFAULT_BRUTE_CAP,
};
pub use structure::{Element, FiniteStructure, StructureBuilder};
pub use tree::{canonical_form, subtree_codes, CanonicalCode, Tree};
pub use witness::{check_isomorphism, verify_isomorphism, IsoMismatch, IsoWitness};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("partial witness")]
    PartialWitness,
    #[error("too large for exhaustive search: {size} elements exceeds cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("unknown tag {0}")]
    UnknownTag(String),
    #[error("unknown element {0}")]
    UnknownElement(Element),
    #[error("malformed structure: {0}")]
    Malformed(String),
}

/// Induced substructure on the elements carrying the unary tag `tag`.
pub fn extract_sort(s: &FiniteStructure, tag: &str) -> Result<FiniteStructure, ModelError> {
    Ok(extract_sort_with_map(s, tag)?.0)
}

/// As [`extract_sort`], also returning the original id of each new element.
pub fn extract_sort_with_map(s: &FiniteStructure, tag: &str) -> Result<(FiniteStructure, Vec<Element>), ModelError> {
    let members: Vec<Element> = s
        .unary_rel(tag)
        .ok_or_else(|| ModelError::UnknownTag(tag.to_string()))?
        .iter()
        .copied()
        .collect();
    s.induced(&members)
}

/// The level-`m` box of `owner` as a standalone tree structure.
pub fn extract_box(s: &FiniteStructure, owner: Element, m: u32) -> Result<(FiniteStructure, Vec<Element>), ModelError> {
    if !s.contains(owner) {
        return Err(ModelError::UnknownElement(owner));
    }
    let members = s.box_members(owner, m);
    s.induced(&members)
}

/// A seeded relabelling of `s`. Returns the copy and the permutation used
/// (old id → new id), which is an isomorphism from `s` onto the copy.
pub fn scramble(s: &FiniteStructure, seed: u64) -> (FiniteStructure, IsoWitness) {
    let mut perm: Vec<Element> = (0..s.len() as Element).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let copy = s.relabel(&perm).expect("shuffle yields a permutation");
    (copy, IsoWitness::from_images(perm).expect("permutation is injective"))
}
