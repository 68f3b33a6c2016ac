use std::collections::BTreeMap;

use super::boxes::match_boxes;
use super::{box_tree, tagged_both, BoxPair, CoderError};
use crate::baf::{iso_baf_with, Kind, RankOracle};
use crate::effective::Modulus;
use crate::model::{verify_isomorphism, Element, FiniteStructure, IsoWitness};
use crate::vocab;

/// Least level whose box is E, if any. Every box is classified through the
/// oracle.
pub(super) fn least_e_level(oracle: &RankOracle, s: &FiniteStructure, owner: Element, levels: u32) -> Result<Option<u32>, CoderError> {
    let mut least = None;
    for m in 1..=levels {
        if oracle.classify(&box_tree(s, owner, m)?.0, m)? == Kind::E && least.is_none() {
            least = Some(m);
        }
    }
    Ok(least)
}

/// An isomorphism from the right side of `pair` onto `copy`, computed from
/// the limits `f` and the classifier:
///
/// 1. in each sort, find the spine elements of `copy` owning an E-box; there
///    must be exactly `f(n)` of them;
/// 2. match them to `b_0 .. b_{f(n)-1}` by least E-level, which must agree as
///    multisets, and match the all-A spine elements in id order;
/// 3. fill in each pair of boxes like to like.
pub fn iso_with_modulus(
    pair: &BoxPair,
    copy: &FiniteStructure,
    f: &Modulus,
    oracle: &RankOracle,
) -> Result<IsoWitness, CoderError> {
    let std = &pair.n;
    let levels = pair.caps.levels;
    if f.len() < pair.sorts() as usize {
        return Err(CoderError::Caps(format!("modulus has {} values for {} sorts", f.len(), pair.sorts())));
    }
    let mut pairs = Vec::with_capacity(std.len());
    for n in 0..pair.sorts() {
        let fn_ = f.get(n);
        let tag = vocab::sort_tag(n);
        let copy_spine = tagged_both(copy, vocab::SPINE, &tag);
        let std_spine = &pair.spine[n as usize];
        if copy_spine.len() != std_spine.len() {
            return Err(CoderError::CopyMalformed(format!(
                "sort {n} has {} spine elements, expected {}",
                copy_spine.len(),
                std_spine.len()
            )));
        }
        // Phase 1.
        let mut copy_e: BTreeMap<u32, Vec<Element>> = BTreeMap::new();
        let mut copy_a = Vec::new();
        for &c in &copy_spine {
            match least_e_level(oracle, copy, c, levels)? {
                Some(g) => copy_e.entry(g).or_default().push(c),
                None => copy_a.push(c),
            }
        }
        let found = copy_e.values().map(Vec::len).sum::<usize>() as u32;
        if found != fn_ {
            return Err(CoderError::CopyInconsistent { n, expected: fn_, found });
        }
        // Phase 2.
        let mut std_e: BTreeMap<u32, Vec<Element>> = BTreeMap::new();
        for &b in std_spine.iter().take(fn_ as usize) {
            let beta = least_e_level(oracle, std, b, levels)?.ok_or({
                CoderError::CopyInconsistent { n, expected: fn_, found: 0 }
            })?;
            std_e.entry(beta).or_default().push(b);
        }
        let shape = |m: &BTreeMap<u32, Vec<Element>>| m.iter().map(|(k, v)| (*k, v.len())).collect::<Vec<_>>();
        if shape(&std_e) != shape(&copy_e) {
            return Err(CoderError::CopyMalformed(format!(
                "sort {n}: least E-levels {:?} in the copy, {:?} in the standard side",
                shape(&copy_e),
                shape(&std_e)
            )));
        }
        let mut spine_pairs: Vec<(Element, Element)> = Vec::new();
        for (level, bs) in &std_e {
            spine_pairs.extend(bs.iter().copied().zip(copy_e[level].iter().copied()));
        }
        spine_pairs.extend(std_spine[fn_ as usize..].iter().copied().zip(copy_a));
        // Phase 3.
        for (b, c) in spine_pairs {
            match_boxes(std, b, copy, c, levels, |l, r, m| iso_baf_with(oracle, l, r, m), &mut pairs)?;
        }
    }
    let w = IsoWitness::total(pairs)?;
    if let Err(m) = verify_isomorphism(std, copy, &w)? {
        return Err(CoderError::CopyMalformed(m.0));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coders::{build_boxes, BoxCaps};
    use crate::effective::{Cell, MonotoneApprox};
    use crate::model::{check_isomorphism, scramble};

    /// Sorts with limits `(2, 0, 1)`, reached at assorted levels.
    fn approx() -> MonotoneApprox {
        let rows = [
            vec![(0, 0), (1, 2), (2, 1)],
            vec![(0, 1), (0, 0), (0, 2)],
            vec![(0, 0), (0, 0), (1, 2)],
        ];
        MonotoneApprox {
            index_cap: 3,
            horizon: 2,
            level_cap: 2,
            table: rows
                .iter()
                .map(|r| r.iter().map(|&(value, level)| Cell { value, level }).collect())
                .collect(),
        }
    }

    #[test]
    fn identity_copy() {
        let p = build_boxes(&approx(), BoxCaps { w: 2, levels: 2, i_max: None }).unwrap();
        let f = p.approx.limits();
        let w = iso_with_modulus(&p, &p.n, &f, &RankOracle::new()).unwrap();
        assert!(check_isomorphism(&p.n, &p.n, &w).unwrap());
    }

    #[test]
    fn scrambled_copy() {
        let p = build_boxes(&approx(), BoxCaps { w: 2, levels: 2, i_max: None }).unwrap();
        let f = p.approx.limits();
        assert_eq!(f.values, vec![2, 0, 1]);
        for seed in 0..3 {
            let (copy, _) = scramble(&p.n, seed);
            let oracle = RankOracle::new();
            let w = iso_with_modulus(&p, &copy, &f, &oracle).unwrap();
            assert!(check_isomorphism(&p.n, &copy, &w).unwrap());
            assert!(oracle.calls() > 0);
        }
    }

    #[test]
    fn left_side_is_a_copy_too() {
        let p = build_boxes(&approx(), BoxCaps { w: 1, levels: 2, i_max: None }).unwrap();
        let w = iso_with_modulus(&p, &p.m, &p.approx.limits(), &RankOracle::new()).unwrap();
        let g = w.inverse();
        assert!(check_isomorphism(&p.m, &p.n, &g).unwrap());
    }

    #[test]
    fn wrong_modulus_fails_in_phase_one() {
        let p = build_boxes(&approx(), BoxCaps { w: 1, levels: 2, i_max: None }).unwrap();
        let mut f = p.approx.limits();
        f.values[0] += 1;
        let err = iso_with_modulus(&p, &p.n, &f, &RankOracle::new()).unwrap_err();
        assert_eq!(err, CoderError::CopyInconsistent { n: 0, expected: 3, found: 2 });
    }
}
