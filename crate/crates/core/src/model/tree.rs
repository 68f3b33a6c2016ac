use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Element, FiniteStructure, ModelError, StructureBuilder};
use crate::vocab;

/// A finite rooted tree with optional node labels.
///
/// Nodes are `0..len()`. Builders number nodes breadth-first, so the root is
/// normally node 0, but any node may be the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    labels: Vec<u32>,
}

/// AHU canonical code of a labeled rooted tree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalCode(pub String);

impl Tree {
    pub fn singleton() -> Self {
        Tree {
            root: 0,
            parent: vec![None],
            children: vec![Vec::new()],
            labels: vec![0],
        }
    }

    /// Builds a tree from a parent array; exactly one entry must be `None`.
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self, ModelError> {
        let labels = vec![0; parent.len()];
        Self::from_parents_labeled(parent, labels)
    }

    pub fn from_parents_labeled(parent: Vec<Option<usize>>, labels: Vec<u32>) -> Result<Self, ModelError> {
        let n = parent.len();
        if n == 0 {
            return Err(ModelError::Malformed("empty tree".into()));
        }
        if labels.len() != n {
            return Err(ModelError::Malformed("label count mismatch".into()));
        }
        let mut roots = parent.iter().enumerate().filter(|(_, p)| p.is_none());
        let root = roots.next().map(|(i, _)| i).ok_or_else(|| ModelError::Malformed("tree without root".into()))?;
        if roots.next().is_some() {
            return Err(ModelError::Malformed("tree with two roots".into()));
        }
        let mut children = vec![Vec::new(); n];
        for (c, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(ModelError::Malformed(format!("parent {p} out of range")));
                }
                children[p].push(c);
            }
        }
        let t = Tree { root, parent, children, labels };
        if t.preorder().len() != n {
            return Err(ModelError::Malformed("tree is not connected".into()));
        }
        Ok(t)
    }

    /// Reads the tree on `elements` of `s` using `Edge` and the `Root` tag.
    /// Returns the tree together with the structure element behind each node.
    pub fn from_elements(s: &FiniteStructure, elements: &[Element]) -> Result<(Tree, Vec<Element>), ModelError> {
        let pos: BTreeMap<Element, usize> = elements.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut parent = vec![None; elements.len()];
        if let Some(edges) = s.binary_rel(vocab::EDGE) {
            for (i, &x) in elements.iter().enumerate() {
                for &(_, c) in edges.range((x, 0)..=(x, Element::MAX)) {
                    match pos.get(&c) {
                        Some(&j) => parent[j] = Some(i),
                        None => {
                            return Err(ModelError::Malformed(format!(
                                "edge {x}->{c} leaves the selected elements"
                            )))
                        }
                    }
                }
            }
        }
        let tree = Tree::from_parents(parent)?;
        let root_el = elements[tree.root];
        if s.unary_rel(vocab::ROOT).is_some() && !s.holds1(vocab::ROOT, root_el) {
            return Err(ModelError::Malformed(format!("tree root {root_el} is not tagged Root")));
        }
        Ok((tree, elements.to_vec()))
    }

    /// Whole structure as a single tree.
    pub fn from_structure(s: &FiniteStructure) -> Result<Tree, ModelError> {
        Ok(Tree::from_elements(s, s.universe())?.0)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn label(&self, v: usize) -> u32 {
        self.labels[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    /// Nodes of the subtree below `v` (including `v`), preorder.
    pub fn subtree_nodes(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend(self.children[x].iter().rev());
        }
        out
    }

    /// Subtree below `v`, renumbered breadth-first. Also returns the original
    /// node for each new node.
    pub fn subtree(&self, v: usize) -> (Tree, Vec<usize>) {
        let mut order = vec![v];
        let mut i = 0;
        while i < order.len() {
            order.extend_from_slice(&self.children[order[i]]);
            i += 1;
        }
        let mut new_id = vec![usize::MAX; self.len()];
        for (k, &x) in order.iter().enumerate() {
            new_id[x] = k;
        }
        let parent = order
            .iter()
            .map(|&x| if x == v { None } else { self.parent[x].map(|p| new_id[p]) })
            .collect();
        let labels = order.iter().map(|&x| self.labels[x]).collect();
        let t = Tree::from_parents_labeled(parent, labels).expect("subtree of a tree is a tree");
        (t, order)
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0)];
        while let Some((v, d)) = stack.pop() {
            best = best.max(d);
            stack.extend(self.children[v].iter().map(|&c| (c, d + 1)));
        }
        best
    }

    /// Attaches `child` as a new subtree under `at`, numbering its nodes after
    /// the existing ones in breadth-first order. Returns the new node id of the
    /// attached root.
    pub fn graft(&mut self, at: usize, child: &Tree) -> usize {
        let (bfs, order) = child.subtree(child.root);
        let base = self.len();
        for (k, &orig) in order.iter().enumerate() {
            let p = match bfs.parent[k] {
                None => at,
                Some(q) => base + q,
            };
            self.parent.push(Some(p));
            self.children.push(Vec::new());
            self.labels.push(child.labels[orig]);
            self.children[p].push(base + k);
        }
        base
    }

    /// Encodes the tree as a structure over `{Edge, Root}` (plus `L<k>` tags
    /// for nonzero labels). Node `v` becomes element `v`.
    pub fn to_structure(&self) -> FiniteStructure {
        let mut b = StructureBuilder::new();
        b.add_elements(self.len());
        b.declare_binary(vocab::EDGE);
        b.insert_unary(vocab::ROOT, self.root as Element);
        for (c, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                b.insert_binary(vocab::EDGE, *p as Element, c as Element);
            }
        }
        for (v, &l) in self.labels.iter().enumerate() {
            if l != 0 {
                b.insert_unary(&format!("L{l}"), v as Element);
            }
        }
        b.set_root("tree", self.root as Element);
        b.finish_unchecked()
    }

    /// Same tree with nodes renamed by `perm` (old → new).
    pub fn relabel(&self, perm: &[usize]) -> Tree {
        let n = self.len();
        let mut parent = vec![None; n];
        let mut labels = vec![0; n];
        for v in 0..n {
            parent[perm[v]] = self.parent[v].map(|p| perm[p]);
            labels[perm[v]] = self.labels[v];
        }
        Tree::from_parents_labeled(parent, labels).expect("relabeling preserves tree shape")
    }
}

/// AHU canonical form. Equal codes exactly when the labeled rooted trees are
/// isomorphic.
pub fn canonical_form(t: &Tree) -> CanonicalCode {
    let order = t.preorder();
    let mut codes: Vec<String> = vec![String::new(); t.len()];
    for &v in order.iter().rev() {
        let mut kids: Vec<&str> = t.children[v].iter().map(|&c| codes[c].as_str()).collect();
        kids.sort_unstable();
        let mut code = String::with_capacity(2 + kids.iter().map(|k| k.len()).sum::<usize>());
        code.push('(');
        if t.labels[v] != 0 {
            code.push_str(&t.labels[v].to_string());
        }
        for k in kids {
            code.push_str(k);
        }
        code.push(')');
        codes[v] = code;
    }
    CanonicalCode(std::mem::take(&mut codes[t.root]))
}

/// Canonical codes of every subtree, indexed by node.
pub fn subtree_codes(t: &Tree) -> Vec<CanonicalCode> {
    let order = t.preorder();
    let mut codes: Vec<String> = vec![String::new(); t.len()];
    for &v in order.iter().rev() {
        let mut kids: Vec<String> = t.children[v].iter().map(|&c| codes[c].clone()).collect();
        kids.sort_unstable();
        let label = if t.labels[v] != 0 { t.labels[v].to_string() } else { String::new() };
        codes[v] = format!("({label}{})", kids.concat());
    }
    codes.into_iter().map(CanonicalCode).collect()
}
