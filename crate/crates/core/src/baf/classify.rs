use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::{BafError, Kind, TruncationParams};
use crate::logic::{phi_n, Evaluator};
use crate::model::Tree;

/// Checks that the subtree below `v` is a rank-`n` family truncation and
/// returns its half, read off the shape alone.
pub fn shape_kind(t: &Tree, v: usize, n: u32) -> Result<Kind, BafError> {
    let kids = t.children(v);
    if n == 1 {
        if kids.is_empty() {
            return Ok(Kind::A);
        }
        if kids.iter().all(|&c| t.children(c).is_empty()) {
            return Ok(Kind::E);
        }
        return Err(BafError::Malformed(format!("node {v}: rank-1 tree with a grandchild")));
    }
    let (mut a, mut e) = (0, 0);
    for &c in kids {
        match shape_kind(t, c, n - 1)? {
            Kind::A => a += 1,
            Kind::E => e += 1,
        }
    }
    match (a, e) {
        (0, 0) => Err(BafError::Malformed(format!("node {v}: rank-{n} tree without children"))),
        (0, _) => Ok(Kind::A),
        (_, 0) => Err(BafError::Malformed(format!("node {v}: rank-{n} tree with only A-children"))),
        _ => Ok(Kind::E),
    }
}

/// Height of the subtree below `v`.
pub fn height(t: &Tree, v: usize) -> u32 {
    t.children(v).iter().map(|&c| 1 + height(t, c)).max().unwrap_or(0)
}

/// Rank a finite family member must have, judging by height alone.
pub fn apparent_rank(t: &Tree, v: usize) -> u32 {
    height(t, v).max(1)
}

/// Decides `A(n)` versus `E(n)` by evaluating the rank-`n` distinguishing
/// sentence, after checking that the tree has the right shape.
pub fn classify(tree: &Tree, n: u32) -> Result<Kind, BafError> {
    if n == 0 {
        return Err(BafError::InvalidParams("rank must be at least 1".into()));
    }
    let by_shape = shape_kind(tree, tree.root(), n)?;
    let s = tree.to_structure();
    let holds = Evaluator::new(&s).eval_closed(&phi_n(n)?)?;
    let by_sentence = if holds { Kind::E } else { Kind::A };
    if by_sentence != by_shape {
        return Err(BafError::Malformed(format!(
            "sentence says {by_sentence} but shape says {by_shape} at rank {n}"
        )));
    }
    Ok(by_sentence)
}

/// [`classify`] with a call counter, standing in for the rank-`n` jump oracle.
#[derive(Debug, Default)]
pub struct RankOracle {
    calls: AtomicUsize,
}

impl RankOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn classify(&self, tree: &Tree, n: u32) -> Result<Kind, BafError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        classify(tree, n)
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Result of reading a limit-level helper tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitClass {
    Finite(u32),
    /// All kept children are A: the index is at least the cap, or infinite.
    AtLeastOrInfinity(u32),
}

impl fmt::Display for LimitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitClass::Finite(k) => write!(f, "{k}"),
            LimitClass::AtLeastOrInfinity(cap) => write!(f, "≥{cap}-or-∞"),
        }
    }
}

/// Reads `k` from a truncated `L(ω, k)`: one child per index `0..=I`, child
/// `i` of rank `i + 1`, A-children first.
pub fn classify_limit(tree: &Tree, t: &TruncationParams) -> Result<LimitClass, BafError> {
    classify_limit_with(&RankOracle::new(), tree, t)
}

pub fn classify_limit_with(oracle: &RankOracle, tree: &Tree, t: &TruncationParams) -> Result<LimitClass, BafError> {
    let cap = t.limit_index_cap;
    let kids = tree.children(tree.root());
    let mut by_index: Vec<Option<usize>> = vec![None; cap as usize + 1];
    for &c in kids {
        let r = apparent_rank(tree, c);
        let slot = by_index
            .get_mut(r as usize - 1)
            .ok_or_else(|| BafError::Malformed(format!("child of rank {r} beyond index cap {cap}")))?;
        if slot.replace(c).is_some() {
            return Err(BafError::Malformed(format!("two children of rank {r}")));
        }
    }
    let mut leading_a = 0u32;
    let mut seen_e = false;
    for (i, c) in by_index.iter().enumerate() {
        let c = c.ok_or_else(|| BafError::Malformed(format!("no child of rank {}", i + 1)))?;
        let kind = oracle.classify(&tree.subtree(c).0, i as u32 + 1)?;
        match (kind, seen_e) {
            (Kind::A, false) => leading_a += 1,
            (Kind::A, true) => return Err(BafError::Malformed(format!("A-child at index {i} after an E-child"))),
            (Kind::E, _) => seen_e = true,
        }
    }
    match leading_a {
        0 => Err(BafError::Malformed("first child is not A".into())),
        k if k == cap + 1 => Ok(LimitClass::AtLeastOrInfinity(cap)),
        k => Ok(LimitClass::Finite(k - 1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baf::{build_tree, LimitIndex, TreeKind};

    #[test]
    fn finite_ranks_round_trip() {
        for w in 1..=2 {
            let t = TruncationParams::with_width(w);
            for n in 1..=3 {
                assert_eq!(classify(&build_tree(TreeKind::A(n), &t).unwrap(), n).unwrap(), Kind::A);
                assert_eq!(classify(&build_tree(TreeKind::E(n), &t).unwrap(), n).unwrap(), Kind::E);
            }
        }
    }

    #[test]
    fn malformed_is_rejected() {
        let path = Tree::from_parents(vec![None, Some(0), Some(1)]).unwrap();
        assert!(matches!(classify(&path, 1), Err(BafError::Malformed(_))));
        // Root with a single A(1) child is not a rank-2 family member.
        let one = Tree::from_parents(vec![None, Some(0)]).unwrap();
        assert!(matches!(classify(&one, 2), Err(BafError::Malformed(_))));
    }

    #[test]
    fn limit_levels() {
        let t = TruncationParams { w: 1, limit_index_cap: 4, rank_cap: 4 };
        for k in 0..4 {
            let tree = build_tree(TreeKind::L(LimitIndex::Finite(k)), &t).unwrap();
            assert_eq!(classify_limit(&tree, &t).unwrap(), LimitClass::Finite(k));
        }
        let inf = build_tree(TreeKind::L(LimitIndex::Infinity), &t).unwrap();
        let got = classify_limit(&inf, &t).unwrap();
        assert_eq!(got.to_string(), "≥4-or-∞");
    }

    #[test]
    fn oracle_counts_calls() {
        let o = RankOracle::new();
        let t = build_tree(TreeKind::E(2), &TruncationParams::with_width(1)).unwrap();
        o.classify(&t, 2).unwrap();
        o.classify(&t, 2).unwrap();
        assert_eq!(o.calls(), 2);
    }
}
