use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{build_tree, BafError, TreeKind, TruncationParams};
use crate::model::Tree;

/// Quantifier-free part of a bounded predicate, over `(x, y1, .., yn)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Matrix {
    Const(bool),
    /// True exactly on the listed rows `[x, y1, .., yn]`.
    Table(BTreeSet<Vec<u32>>),
    /// `(c0·x + c1·y1 + ..) mod modulus == residue`.
    Linear { coeffs: Vec<i64>, modulus: u32, residue: u32 },
}

impl Matrix {
    pub fn holds(&self, row: &[u32]) -> bool {
        match self {
            Matrix::Const(b) => *b,
            Matrix::Table(rows) => rows.contains(row),
            Matrix::Linear { coeffs, modulus, residue } => {
                let sum: i64 = coeffs.iter().zip(row).map(|(c, &v)| c * v as i64).sum();
                sum.rem_euclid(*modulus as i64) == *residue as i64
            }
        }
    }
}

/// `S(x) ⟺ ∃y1 ∀y2 ∃y3 … M(x, y1, .., yn)` with every `yi ≤ bound`, for
/// `x < domain_cap`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaPredicateSpec {
    pub rank: u32,
    pub bound: u32,
    pub domain_cap: u32,
    pub matrix: Matrix,
}

impl SigmaPredicateSpec {
    pub fn validate(&self) -> Result<(), BafError> {
        if self.rank == 0 {
            return Err(BafError::InvalidParams("predicate rank must be at least 1".into()));
        }
        if let Matrix::Linear { coeffs, modulus, residue } = &self.matrix {
            if *modulus == 0 || residue >= modulus {
                return Err(BafError::InvalidParams("linear matrix needs 0 <= residue < modulus".into()));
            }
            if coeffs.len() > self.rank as usize + 1 {
                return Err(BafError::InvalidParams("more coefficients than variables".into()));
            }
        }
        Ok(())
    }

    /// Truth by direct search over the alternating bounded quantifiers.
    pub fn holds(&self, x: u32) -> bool {
        let mut row = vec![x];
        self.block(&mut row)
    }

    fn block(&self, row: &mut Vec<u32>) -> bool {
        let j = row.len();
        if j > self.rank as usize {
            return self.matrix.holds(row);
        }
        let existential = j % 2 == 1;
        for y in 0..=self.bound {
            row.push(y);
            let v = self.block(row);
            row.pop();
            if v == existential {
                return existential;
            }
        }
        !existential
    }
}

/// The tree coding `x`: isomorphic to `E(rank)` when the predicate holds at
/// `x`, to `A(rank)` otherwise.
///
/// Level `j` of the prefix is rewritten as `σ_j = ∃y_j ¬σ_{j+1}`. A rank-`k`
/// node for `σ_j` gets one child per `y ≤ bound`, the rank-`(k-1)` tree for
/// `σ_{j+1}` at that `y`, plus `w` padding copies of `E(k-1)`; it is E exactly
/// when some child is A. At rank 1 the node gets `w` leaves as soon as a
/// witness for the innermost existential turns up.
pub fn c_sequence(spec: &SigmaPredicateSpec, x: u32, t: &TruncationParams) -> Result<Tree, BafError> {
    spec.validate()?;
    t.validate()?;
    if x >= spec.domain_cap {
        return Err(BafError::InvalidParams(format!("input {x} outside domain cap {}", spec.domain_cap)));
    }
    if spec.rank > t.rank_cap {
        return Err(BafError::RankOverCap { rank: spec.rank, cap: t.rank_cap });
    }
    let mut pads = Vec::new();
    for k in 1..spec.rank {
        pads.push(build_tree(TreeKind::E(k), t)?);
    }
    let mut row = vec![x];
    let tree = code(spec, t, &pads, &mut row);
    Ok(tree.subtree(tree.root()).0)
}

fn code(spec: &SigmaPredicateSpec, t: &TruncationParams, pads: &[Tree], row: &mut Vec<u32>) -> Tree {
    let n = spec.rank as usize;
    let level = row.len();
    let rank = n + 1 - level;
    let mut tree = Tree::singleton();
    if rank == 1 {
        // Innermost block: ∃y M when the prefix has odd length, ∃y ¬M otherwise.
        let want = n % 2 == 1;
        let witnessed = (0..=spec.bound).any(|y| {
            row.push(y);
            let v = spec.matrix.holds(row);
            row.pop();
            v == want
        });
        if witnessed {
            for _ in 0..t.w {
                tree.graft(0, &Tree::singleton());
            }
        }
        return tree;
    }
    for y in 0..=spec.bound {
        row.push(y);
        let child = code(spec, t, pads, row);
        row.pop();
        tree.graft(0, &child);
    }
    for _ in 0..t.w {
        tree.graft(0, &pads[rank - 2]);
    }
    tree
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baf::{classify, Kind};

    fn t() -> TruncationParams {
        TruncationParams::with_width(1)
    }

    #[test]
    fn parity_at_rank_one() {
        let spec = SigmaPredicateSpec {
            rank: 1,
            bound: 0,
            domain_cap: 20,
            matrix: Matrix::Linear { coeffs: vec![1], modulus: 2, residue: 0 },
        };
        assert_eq!(classify(&c_sequence(&spec, 2, &t()).unwrap(), 1).unwrap(), Kind::E);
        assert_eq!(classify(&c_sequence(&spec, 3, &t()).unwrap(), 1).unwrap(), Kind::A);
    }

    #[test]
    fn table_witness() {
        let spec = SigmaPredicateSpec {
            rank: 1,
            bound: 4,
            domain_cap: 20,
            matrix: Matrix::Table(BTreeSet::from([vec![5, 3]])),
        };
        assert!(spec.holds(5));
        assert!(!spec.holds(4));
        assert_eq!(classify(&c_sequence(&spec, 5, &t()).unwrap(), 1).unwrap(), Kind::E);
        assert_eq!(classify(&c_sequence(&spec, 4, &t()).unwrap(), 1).unwrap(), Kind::A);
    }

    #[test]
    fn constant_false_is_always_a() {
        let spec = SigmaPredicateSpec { rank: 2, bound: 2, domain_cap: 5, matrix: Matrix::Const(false) };
        for x in 0..5 {
            assert_eq!(classify(&c_sequence(&spec, x, &t()).unwrap(), 2).unwrap(), Kind::A);
        }
    }

    #[test]
    fn alternation_at_rank_two() {
        let mut verdicts = BTreeSet::new();
        for coeffs in [vec![1, 1, 1], vec![1, 1, 0], vec![1, 0, 1]] {
            let spec = SigmaPredicateSpec {
                rank: 2,
                bound: 2,
                domain_cap: 6,
                matrix: Matrix::Linear { coeffs, modulus: 3, residue: 0 },
            };
            for x in 0..6 {
                let kind = classify(&c_sequence(&spec, x, &t()).unwrap(), 2).unwrap();
                assert_eq!(kind == Kind::E, spec.holds(x), "x = {x}");
                verdicts.insert(spec.holds(x));
            }
        }
        assert_eq!(verdicts.len(), 2);
    }
}
