use std::collections::BTreeMap;

use super::{BafError, Kind, RankOracle};
use crate::model::{subtree_codes, CanonicalCode, Element, IsoWitness, Tree};

/// Isomorphism between two rank-`n` family truncations of the same half.
///
/// Children are classified one rank down and matched like to like, keyed by
/// (half, canonical code) and taken in index order within a key.
pub fn iso_baf(left: &Tree, right: &Tree, n: u32) -> Result<IsoWitness, BafError> {
    iso_baf_with(&RankOracle::new(), left, right, n)
}

pub fn iso_baf_with(oracle: &RankOracle, left: &Tree, right: &Tree, n: u32) -> Result<IsoWitness, BafError> {
    let kl = oracle.classify(left, n)?;
    let kr = oracle.classify(right, n)?;
    if kl != kr {
        return Err(BafError::NotIsomorphic { rank: n, left: kl, right: kr });
    }
    let m = Matcher {
        oracle,
        left,
        right,
        lcodes: subtree_codes(left),
        rcodes: subtree_codes(right),
    };
    let mut pairs = Vec::with_capacity(left.len());
    m.pair(left.root(), right.root(), n, &mut pairs)?;
    Ok(IsoWitness::total(pairs)?)
}

struct Matcher<'a> {
    oracle: &'a RankOracle,
    left: &'a Tree,
    right: &'a Tree,
    lcodes: Vec<CanonicalCode>,
    rcodes: Vec<CanonicalCode>,
}

type Groups = BTreeMap<(Option<Kind>, CanonicalCode), Vec<usize>>;

impl Matcher<'_> {
    fn groups(&self, t: &Tree, codes: &[CanonicalCode], v: usize, rank: u32) -> Result<Groups, BafError> {
        let mut out: BTreeMap<_, Vec<usize>> = BTreeMap::new();
        let mut kids = t.children(v).to_vec();
        kids.sort_unstable();
        for c in kids {
            let kind = if rank > 1 { Some(self.oracle.classify(&t.subtree(c).0, rank - 1)?) } else { None };
            out.entry((kind, codes[c].clone())).or_default().push(c);
        }
        Ok(out)
    }

    fn pair(&self, l: usize, r: usize, rank: u32, out: &mut Vec<(Element, Element)>) -> Result<(), BafError> {
        out.push((l as Element, r as Element));
        if rank == 0 {
            return Ok(());
        }
        let lg = self.groups(self.left, &self.lcodes, l, rank)?;
        let rg = self.groups(self.right, &self.rcodes, r, rank)?;
        if lg.len() != rg.len() {
            return Err(BafError::IncompatibleTruncations(format!("child types differ below nodes {l} and {r}")));
        }
        for ((key, ls), (rkey, rs)) in lg.iter().zip(&rg) {
            if key != rkey || ls.len() != rs.len() {
                return Err(BafError::IncompatibleTruncations(format!(
                    "children of nodes {l} and {r} differ in kind or multiplicity"
                )));
            }
            for (&a, &b) in ls.iter().zip(rs) {
                self.pair(a, b, rank - 1, out)?;
            }
        }
        Ok(())
    }
}
