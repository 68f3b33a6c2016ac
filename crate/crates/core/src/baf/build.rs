use std::collections::HashMap;

use serde::Serialize;

use super::{fundamental, BafError, LimitIndex, TreeKind, TruncationParams, FUNDAMENTAL_SEQUENCE};
use crate::model::{FiniteStructure, Tree};

/// Builds the truncated tree of the given kind, numbered breadth-first.
pub fn build_tree(kind: TreeKind, t: &TruncationParams) -> Result<Tree, BafError> {
    t.validate()?;
    if let Some(n) = kind.rank() {
        if n == 0 {
            return Err(BafError::InvalidParams("rank must be at least 1".into()));
        }
        if n > t.rank_cap {
            return Err(BafError::RankOverCap { rank: n, cap: t.rank_cap });
        }
    }
    if let TreeKind::L(LimitIndex::Finite(k)) = kind {
        if k > t.limit_index_cap {
            return Err(BafError::InvalidParams(format!(
                "limit index {k} exceeds limit_index_cap {}",
                t.limit_index_cap
            )));
        }
    }
    let mut b = Builder { t: *t, memo: HashMap::new() };
    let tree = b.build(kind);
    Ok(tree.subtree(tree.root()).0)
}

struct Builder {
    t: TruncationParams,
    memo: HashMap<TreeKind, Tree>,
}

impl Builder {
    fn build(&mut self, kind: TreeKind) -> Tree {
        if let Some(t) = self.memo.get(&kind) {
            return t.clone();
        }
        let w = self.t.w;
        let cap = self.t.limit_index_cap;
        let children: Vec<(TreeKind, u32)> = match kind {
            TreeKind::A(1) => vec![],
            TreeKind::E(1) => vec![(TreeKind::A(1), 0)],
            TreeKind::A(n) => vec![(TreeKind::E(n - 1), w)],
            TreeKind::E(n) => vec![(TreeKind::A(n - 1), w), (TreeKind::E(n - 1), w)],
            TreeKind::L(k) => (0..=cap)
                .map(|i| {
                    let leading_a = match k {
                        LimitIndex::Finite(k) => i <= k,
                        LimitIndex::Infinity => true,
                    };
                    let half = if leading_a { TreeKind::A(fundamental(i)) } else { TreeKind::E(fundamental(i)) };
                    (half, 1)
                })
                .collect(),
            // `L(ω, cap)` and `L(ω, ∞)` coincide once cut at `cap`, so the
            // A side keeps only the indices that stay distinguishable.
            TreeKind::AOmegaPlusOne => (0..cap).map(|k| (TreeKind::L(LimitIndex::Finite(k)), w)).collect(),
            TreeKind::EOmegaPlusOne => (0..cap)
                .map(|k| (TreeKind::L(LimitIndex::Finite(k)), w))
                .chain([(TreeKind::L(LimitIndex::Infinity), w)])
                .collect(),
        };
        let mut tree = Tree::singleton();
        if kind == TreeKind::E(1) {
            for _ in 0..w {
                tree.graft(0, &Tree::singleton());
            }
        } else {
            for (child, copies) in children {
                let sub = self.build(child);
                for _ in 0..copies {
                    tree.graft(0, &sub);
                }
            }
        }
        self.memo.insert(kind, tree.clone());
        tree
    }
}

/// Tree structure plus the parameters it was cut at.
#[derive(Debug, Clone, Serialize)]
pub struct TreeArtifact {
    pub kind: String,
    pub n: Option<u32>,
    pub w: u32,
    #[serde(rename = "I")]
    pub limit_index_cap: u32,
    pub fundamental_sequence: &'static str,
    pub structure: serde_json::Value,
}

impl TreeArtifact {
    pub fn new(kind: TreeKind, t: &TruncationParams, tree: &Tree) -> Self {
        let s: FiniteStructure = tree.to_structure();
        TreeArtifact {
            kind: kind.to_string(),
            n: kind.rank(),
            w: t.w,
            limit_index_cap: t.limit_index_cap,
            fundamental_sequence: FUNDAMENTAL_SEQUENCE,
            structure: serde_json::from_str(&s.to_json()).expect("structure JSON is valid"),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("artifact serializes")
    }
}

/// Node count of the truncation of `kind`, without building it.
pub fn tree_size(kind: TreeKind, t: &TruncationParams) -> u64 {
    let w = t.w as u64;
    match kind {
        TreeKind::A(1) => 1,
        TreeKind::E(1) => 1 + w,
        TreeKind::A(n) => 1 + w * tree_size(TreeKind::E(n - 1), t),
        TreeKind::E(n) => 1 + w * (tree_size(TreeKind::A(n - 1), t) + tree_size(TreeKind::E(n - 1), t)),
        TreeKind::L(k) => {
            1 + (0..=t.limit_index_cap)
                .map(|i| {
                    let a = matches!(k, LimitIndex::Infinity) || matches!(k, LimitIndex::Finite(k) if i <= k);
                    tree_size(if a { TreeKind::A(i + 1) } else { TreeKind::E(i + 1) }, t)
                })
                .sum::<u64>()
        }
        TreeKind::AOmegaPlusOne => {
            1 + w * (0..t.limit_index_cap).map(|k| tree_size(TreeKind::L(LimitIndex::Finite(k)), t)).sum::<u64>()
        }
        TreeKind::EOmegaPlusOne => {
            tree_size(TreeKind::AOmegaPlusOne, t) + w * tree_size(TreeKind::L(LimitIndex::Infinity), t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::canonical_form;

    #[test]
    fn a1_is_a_single_node() {
        let t = build_tree(TreeKind::A(1), &TruncationParams::default()).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn e2_children() {
        let t = build_tree(TreeKind::E(2), &TruncationParams::with_width(2)).unwrap();
        let kids = t.children(t.root());
        assert_eq!(kids.len(), 4);
        let sizes: Vec<usize> = kids.iter().map(|&c| t.subtree_nodes(c).len()).collect();
        assert_eq!(sizes, vec![1, 1, 3, 3]);
    }

    #[test]
    fn limit_helper_children_in_index_order() {
        let t = TruncationParams { w: 1, limit_index_cap: 3, rank_cap: 4 };
        let tree = build_tree(TreeKind::L(LimitIndex::Finite(1)), &t).unwrap();
        let kids = tree.children(tree.root());
        let want = [TreeKind::A(1), TreeKind::A(2), TreeKind::E(3), TreeKind::E(4)];
        assert_eq!(kids.len(), 4);
        for (&c, kind) in kids.iter().zip(want) {
            let mut wide = t;
            wide.rank_cap = 8;
            let expect = build_tree(kind, &wide).unwrap();
            assert_eq!(canonical_form(&tree.subtree(c).0), canonical_form(&expect), "{kind}");
        }
    }

    #[test]
    fn sizes_match_formula() {
        let t = TruncationParams { w: 2, limit_index_cap: 2, rank_cap: 4 };
        for kind in [
            TreeKind::A(3),
            TreeKind::E(4),
            TreeKind::L(LimitIndex::Finite(0)),
            TreeKind::L(LimitIndex::Infinity),
            TreeKind::AOmegaPlusOne,
            TreeKind::EOmegaPlusOne,
        ] {
            assert_eq!(build_tree(kind, &t).unwrap().len() as u64, tree_size(kind, &t), "{kind}");
        }
    }

    #[test]
    fn breadth_first_numbering() {
        let t = build_tree(TreeKind::E(3), &TruncationParams::with_width(2)).unwrap();
        assert_eq!(t.root(), 0);
        let mut last_depth = 0;
        for v in 1..t.len() {
            let mut d = 0;
            let mut cur = v;
            while let Some(p) = t.parent(cur) {
                d += 1;
                cur = p;
            }
            assert!(d >= last_depth);
            last_depth = d;
        }
    }

    #[test]
    fn rank_cap_enforced() {
        assert!(matches!(
            build_tree(TreeKind::E(5), &TruncationParams::default()),
            Err(BafError::RankOverCap { rank: 5, cap: 4 })
        ));
    }
}
