use super::{shape_kind, BafError, Kind};
use crate::logic::{phi_n, relativize, Formula, Var};
use crate::model::Tree;
use crate::vocab;

/// Free variables of an isolating formula for a tuple of length `k`.
pub fn tuple_vars(k: usize) -> Vec<Var> {
    (0..k).map(|i| Var(format!("a{i}"))).collect()
}

/// A formula in the variables [`tuple_vars`] whose satisfiers in `tree` are
/// exactly the automorphism orbit of `tuple`.
///
/// It walks down from the root along the paths to the tuple nodes. Each
/// child on such a path is named (by its tuple variable when it is itself in
/// the tuple), linked to its parent by `Edge`, kept distinct from its named
/// siblings, and asserted to be A or E at its rank by the bounded
/// distinguishing sentence.
pub fn isolating_formula(tree: &Tree, tuple: &[usize], n: u32) -> Result<Formula, BafError> {
    shape_kind(tree, tree.root(), n)?;
    for &v in tuple {
        if v >= tree.len() {
            return Err(BafError::Malformed(format!("tuple node {v} is not in the tree")));
        }
    }
    let mut b = Isolator { tree, tuple, vars: tuple_vars(tuple.len()), fresh: 0 };
    let root = tree.root();
    Ok(match b.named(root) {
        Some(v) => Formula::and([Formula::rel1(vocab::ROOT, v.clone()), b.describe(root, n, &v)?]),
        None => {
            let v = b.fresh();
            let body = Formula::and([Formula::rel1(vocab::ROOT, v.clone()), b.describe(root, n, &v)?]);
            Formula::exists(v, body)
        }
    })
}

struct Isolator<'a> {
    tree: &'a Tree,
    tuple: &'a [usize],
    vars: Vec<Var>,
    fresh: usize,
}

impl Isolator<'_> {
    fn fresh(&mut self) -> Var {
        self.fresh += 1;
        Var(format!("c{}", self.fresh))
    }

    /// Tuple variable naming node `v`, if any.
    fn named(&self, v: usize) -> Option<Var> {
        self.tuple.iter().position(|&x| x == v).map(|i| self.vars[i].clone())
    }

    fn hosts_tuple(&self, v: usize) -> bool {
        self.tuple.iter().any(|&x| {
            let mut cur = Some(x);
            while let Some(c) = cur {
                if c == v {
                    return true;
                }
                cur = self.tree.parent(c);
            }
            false
        })
    }

    /// Conditions on the tuple nodes inside the subtree of `v` (rank `rank`),
    /// given that `var` denotes `v`.
    fn describe(&mut self, v: usize, rank: u32, var: &Var) -> Result<Formula, BafError> {
        let mut parts = Vec::new();
        for (i, &x) in self.tuple.iter().enumerate() {
            if x == v && self.vars[i] != *var {
                parts.push(Formula::eq(self.vars[i].clone(), var.clone()));
            }
        }
        let mut fresh_here = Vec::new();
        let mut named_children: Vec<Var> = Vec::new();
        for &c in self.tree.children(v) {
            if !self.hosts_tuple(c) {
                continue;
            }
            let cv = match self.named(c) {
                Some(cv) => cv,
                None => {
                    let cv = self.fresh();
                    fresh_here.push(cv.clone());
                    cv
                }
            };
            for other in &named_children {
                parts.push(Formula::neq(other.clone(), cv.clone()));
            }
            named_children.push(cv.clone());
            parts.push(Formula::rel2(vocab::EDGE, var.clone(), cv.clone()));
            if rank >= 2 {
                let sentence = relativize(&phi_n(rank - 1)?, &cv, rank - 1)?;
                parts.push(match shape_kind(self.tree, c, rank - 1)? {
                    Kind::E => sentence,
                    Kind::A => Formula::not(sentence),
                });
            }
            parts.push(self.describe(c, rank.saturating_sub(1), &cv)?);
        }
        let mut f = Formula::and(parts);
        for cv in fresh_here.into_iter().rev() {
            f = Formula::exists(cv, f);
        }
        Ok(f)
    }
}
