use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::CoderError;
use crate::effective::CeSetSpec;
use crate::model::{
    image_set, verify_isomorphism, extract_sort_with_map, Element, FiniteStructure, IsoWitness, SearchConfig,
    StructureBuilder,
};
use crate::vocab;

/// How much of each infinite sort is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarmupCaps {
    /// Elements per sort. Must exceed every entry stage, so that `b_s` exists.
    pub per_sort: u32,
}

impl WarmupCaps {
    /// Two elements past the horizon.
    pub fn for_spec(d: &CeSetSpec) -> Self {
        WarmupCaps { per_sort: d.horizon + 2 }
    }
}

/// The two stage-coding copies. In sort `n`, element `i` has id
/// `n * per_sort + i` on both sides; call it `a_i` on the left and `b_i` on
/// the right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WarmupPair {
    pub m: FiniteStructure,
    pub n: FiniteStructure,
    pub spec: CeSetSpec,
    pub caps: WarmupCaps,
}

impl WarmupPair {
    pub fn element(&self, n: u32, i: u32) -> Element {
        n * self.caps.per_sort + i
    }

    /// `(sort, index)` of an element.
    pub fn locate(&self, x: Element) -> (u32, u32) {
        (x / self.caps.per_sort, x % self.caps.per_sort)
    }
}

pub fn build_warmup(d: &CeSetSpec, caps: WarmupCaps) -> Result<WarmupPair, CoderError> {
    d.validate()?;
    if let Some((&n, &s)) = d.entries.iter().find(|(_, &s)| s >= caps.per_sort) {
        return Err(CoderError::Caps(format!(
            "per_sort {} too small: {n} enters at stage {s}",
            caps.per_sort
        )));
    }
    let side = |right: bool| {
        let mut b = StructureBuilder::new();
        b.add_elements((d.index_cap * caps.per_sort) as usize);
        for s in 0..=d.horizon {
            b.declare_unary(&vocab::stage(s));
        }
        for n in 0..d.index_cap {
            let tag = vocab::sort_tag(n);
            b.declare_unary(&tag);
            for i in 0..caps.per_sort {
                b.insert_unary(&tag, n * caps.per_sort + i);
            }
            if let Some(s) = d.entry_stage(n) {
                let i = if right { s } else { 0 };
                b.insert_unary(&vocab::stage(s), n * caps.per_sort + i);
            }
        }
        b.build()
    };
    Ok(WarmupPair { m: side(false)?, n: side(true)?, spec: d.clone(), caps })
}

/// The shift map: per member sort entering at `s`, `a_0 ↦ b_s`,
/// `a_i ↦ b_{i-1}` for `0 < i ≤ s` and `a_i ↦ b_i` above; identity elsewhere.
pub fn warmup_canonical_iso(pair: &WarmupPair) -> IsoWitness {
    let mut images = Vec::with_capacity(pair.m.len());
    for n in 0..pair.spec.index_cap {
        let s = pair.spec.entry_stage(n);
        for i in 0..pair.caps.per_sort {
            let j = match s {
                Some(s) if i == 0 => s,
                Some(s) if i <= s => i - 1,
                _ => i,
            };
            images.push(pair.element(n, j));
        }
    }
    IsoWitness::from_images(images).expect("the shift map is a bijection")
}

/// Reads `s` from `g(a_0) = b_s` in each sort and keeps the `n` with `D_s(n)`.
pub fn decode_from_warmup_iso(g: &IsoWitness, pair: &WarmupPair) -> Result<BTreeSet<u32>, CoderError> {
    if let Err(m) = verify_isomorphism(&pair.m, &pair.n, g)? {
        return Err(CoderError::WitnessInvalid(m.0));
    }
    let mut out = BTreeSet::new();
    for n in 0..pair.spec.index_cap {
        let y = g.get(pair.element(n, 0)).expect("total witness");
        let (sort, s) = pair.locate(y);
        if sort != n {
            return Err(CoderError::WitnessInvalid(format!("a_0 of sort {n} lands in sort {sort}")));
        }
        if pair.spec.at_stage(n, s) {
            out.insert(n);
        }
    }
    Ok(out)
}

/// An isomorphism from a standard side onto `copy`, built from `d` and the
/// copy's relations alone: in a member sort the unique `U_s` element is
/// matched first, then the remaining elements are paired in id order.
pub fn warmup_iso_with_d(std: &FiniteStructure, copy: &FiniteStructure, d: &CeSetSpec) -> Result<IsoWitness, CoderError> {
    if std.len() != copy.len() {
        return Err(CoderError::CopyMalformed(format!("{} elements, standard side has {}", copy.len(), std.len())));
    }
    let mut pairs = Vec::with_capacity(std.len());
    for n in 0..d.index_cap {
        let tag = vocab::sort_tag(n);
        let members = |s: &FiniteStructure| -> Vec<Element> {
            s.unary_rel(&tag).map(|r| r.iter().copied().collect()).unwrap_or_default()
        };
        let (mut left, mut right) = (members(std), members(copy));
        if left.len() != right.len() {
            return Err(CoderError::CopyMalformed(format!("sort {n} has {} elements, expected {}", right.len(), left.len())));
        }
        if let Some(s) = d.entry_stage(n) {
            let u = vocab::stage(s);
            let find = |side: &[Element], st: &FiniteStructure| side.iter().position(|&x| st.holds1(&u, x));
            let li = find(&left, std)
                .ok_or_else(|| CoderError::WitnessInvalid(format!("standard side has no {u} element in sort {n}")))?;
            let ri = find(&right, copy)
                .ok_or_else(|| CoderError::CopyMalformed(format!("no {u} element in sort {n} although {n} enters at {s}")))?;
            pairs.push((left.remove(li), right.remove(ri)));
        }
        pairs.extend(left.into_iter().zip(right));
    }
    Ok(IsoWitness::total(pairs)?)
}

/// Outcome of decoding over every possible image of each `a_0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodeCoverage {
    /// Per sort, the possible values of `s` in `g(a_0) = b_s`.
    pub images: Vec<BTreeSet<u32>>,
    /// Sorts where some isomorphism would decode the wrong way.
    pub wrong: Vec<u32>,
}

impl DecodeCoverage {
    pub fn exact(&self) -> bool {
        self.wrong.is_empty()
    }
}

/// Decodes against every isomorphism at once. An isomorphism splits into one
/// per sort and the decoding of sort `n` reads only `g(a_0)`, so it is enough
/// to collect, sort by sort, every image `a_0` can take.
pub fn exhaustive_decode_check(pair: &WarmupPair) -> Result<DecodeCoverage, CoderError> {
    let mut images = Vec::new();
    let mut wrong = Vec::new();
    for n in 0..pair.spec.index_cap {
        let tag = vocab::sort_tag(n);
        let (ml, _) = extract_sort_with_map(&pair.m, &tag)?;
        let (nl, _) = extract_sort_with_map(&pair.n, &tag)?;
        // Sort substructures list elements in index order.
        let set = image_set(&ml, &nl, 0, SearchConfig::unbounded())?;
        if set.iter().any(|&s| pair.spec.at_stage(n, s) != pair.spec.contains(n)) {
            wrong.push(n);
        }
        images.push(set);
    }
    Ok(DecodeCoverage { images, wrong })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_isomorphism, find_isomorphisms_with, scramble};

    fn pair(entries: &[(u32, u32)], h: u32, n: u32) -> WarmupPair {
        let d = CeSetSpec::new(entries.iter().copied(), h, n).unwrap();
        build_warmup(&d, WarmupCaps::for_spec(&d)).unwrap()
    }

    #[test]
    fn empty_set_occupies_nothing() {
        let p = pair(&[], 4, 3);
        for s in 0..=4 {
            assert!(p.m.unary_rel(&vocab::stage(s)).unwrap().is_empty());
            assert!(p.n.unary_rel(&vocab::stage(s)).unwrap().is_empty());
        }
        assert_eq!(decode_from_warmup_iso(&warmup_canonical_iso(&p), &p).unwrap(), BTreeSet::new());
    }

    #[test]
    fn entry_at_seven_in_sort_five() {
        let p = pair(&[(5, 7)], 8, 6);
        let u7 = vocab::stage(7);
        assert_eq!(p.m.unary_rel(&u7).unwrap(), &BTreeSet::from([p.element(5, 0)]));
        assert_eq!(p.n.unary_rel(&u7).unwrap(), &BTreeSet::from([p.element(5, 7)]));
        for s in (0..=8).filter(|&s| s != 7) {
            assert!(p.n.unary_rel(&vocab::stage(s)).unwrap().is_empty());
        }
        let g = warmup_canonical_iso(&p);
        assert!(check_isomorphism(&p.m, &p.n, &g).unwrap());
        assert_eq!(g.get(p.element(5, 0)), Some(p.element(5, 7)));
        assert_eq!(g.get(p.element(5, 3)), Some(p.element(5, 2)));
        assert_eq!(g.get(p.element(5, 8)), Some(p.element(5, 8)));
        assert_eq!(g.get(p.element(2, 4)), Some(p.element(2, 4)));
        assert_eq!(decode_from_warmup_iso(&g, &p).unwrap(), BTreeSet::from([5]));
    }

    #[test]
    fn caps_must_cover_entries() {
        let d = CeSetSpec::new([(1, 6)], 6, 2).unwrap();
        let err = build_warmup(&d, WarmupCaps { per_sort: 6 }).unwrap_err();
        assert!(err.to_string().contains("stage 6"));
    }

    #[test]
    fn every_isomorphism_decodes_at_small_caps() {
        let d = CeSetSpec::new([(0, 1), (2, 0)], 2, 3).unwrap();
        let p = build_warmup(&d, WarmupCaps { per_sort: 3 }).unwrap();
        let all = find_isomorphisms_with(&p.m, &p.n, None, SearchConfig::unbounded()).unwrap();
        // Sort 1 is unoccupied (3! maps), sorts 0 and 2 fix one element (2! each).
        assert_eq!(all.len(), 6 * 2 * 2);
        for g in &all {
            assert_eq!(decode_from_warmup_iso(g, &p).unwrap(), d.members());
        }
        let cov = exhaustive_decode_check(&p).unwrap();
        assert!(cov.exact());
        assert_eq!(cov.images[0], BTreeSet::from([1]));
        assert_eq!(cov.images[1], BTreeSet::from([0, 1, 2]));
    }

    #[test]
    fn witness_from_d_on_scrambled_copy() {
        let p = pair(&[(1, 2), (3, 0)], 4, 4);
        for side in [&p.m, &p.n] {
            let (copy, _) = scramble(side, 17);
            let g = warmup_iso_with_d(side, &copy, &p.spec).unwrap();
            assert!(check_isomorphism(side, &copy, &g).unwrap());
        }
    }

    #[test]
    fn empty_spec_gives_order_matching() {
        let p = pair(&[], 3, 2);
        let g = warmup_iso_with_d(&p.n, &p.n, &p.spec).unwrap();
        assert_eq!(g, IsoWitness::identity(p.n.len()));
    }

    #[test]
    fn missing_stage_element_is_reported() {
        let p = pair(&[(0, 1)], 2, 1);
        let stripped = pair(&[], 2, 1);
        let err = warmup_iso_with_d(&p.n, &stripped.n, &p.spec).unwrap_err();
        assert!(matches!(err, CoderError::CopyMalformed(_)));
    }
}
