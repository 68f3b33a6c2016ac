use serde::{Deserialize, Serialize};

use super::{box_tree, CoderError};
use crate::baf::{build_tree, iso_baf, Kind, TreeKind, TruncationParams};
use crate::effective::MonotoneApprox;
use crate::model::{verify_isomorphism, Element, FiniteStructure, IsoWitness, StructureBuilder, Tree};
use crate::vocab;

/// Truncation of a box structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxCaps {
    /// Width of every box tree.
    pub w: u32,
    /// Box levels run over `1..=levels`.
    pub levels: u32,
    /// Spine length of every sort. `None` gives sort `n` a spine of `f(n) + 3`.
    #[serde(default)]
    pub i_max: Option<u32>,
}

impl Default for BoxCaps {
    fn default() -> Self {
        BoxCaps { w: 2, levels: 4, i_max: None }
    }
}

impl BoxCaps {
    pub fn truncation(&self) -> TruncationParams {
        TruncationParams { w: self.w, limit_index_cap: TruncationParams::default().limit_index_cap, rank_cap: self.levels }
    }

    pub fn spine_len(&self, limit: u32) -> u32 {
        self.i_max.unwrap_or(limit + 3)
    }
}

/// Spine-and-box copies built from a monotone approximation `Φ`.
///
/// Sort `n` has spine elements `a_i` (left) and `b_i` (right), each owning
/// one tree per level `m` through `T<m>`. With `f(n)` the limit of `Φ(n, ·)`:
/// the left box `(i, m)` is `E(m)` iff `i ≥ 1` and some stage reaches `i` at
/// level `m`; the right box `(i, m)` is `E(m)` iff some stage exceeds `i` at
/// level `m`. Everything else is `A(m)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoxPair {
    pub m: FiniteStructure,
    pub n: FiniteStructure,
    pub approx: MonotoneApprox,
    pub caps: BoxCaps,
    /// Spine ids per sort. The two sides share a layout.
    pub spine: Vec<Vec<Element>>,
    /// Intended kinds, `[sort][i][m - 1]`, left side.
    pub kinds_m: Vec<Vec<Vec<Kind>>>,
    pub kinds_n: Vec<Vec<Vec<Kind>>>,
}

impl BoxPair {
    /// `f(n)`.
    pub fn limit(&self, n: u32) -> u32 {
        self.approx.limit(n)
    }

    pub fn sorts(&self) -> u32 {
        self.approx.index_cap
    }
}

pub fn build_boxes(a: &MonotoneApprox, caps: BoxCaps) -> Result<BoxPair, CoderError> {
    a.validate()?;
    caps.truncation().validate()?;
    if a.level_cap > caps.levels {
        return Err(CoderError::Caps(format!(
            "approximation reads level {} but boxes stop at level {}",
            a.level_cap, caps.levels
        )));
    }
    for n in 0..a.index_cap {
        let len = caps.spine_len(a.limit(n));
        if len <= a.limit(n) + 1 {
            return Err(CoderError::Caps(format!(
                "spine too short to expose the all-A tail: sort {n} has f = {} and spine {len}",
                a.limit(n)
            )));
        }
    }
    let t = caps.truncation();
    let mut trees = std::collections::BTreeMap::new();
    for m in 1..=caps.levels {
        for kind in [Kind::A, Kind::E] {
            trees.insert((kind, m), build_tree(TreeKind::finite(kind, m), &t)?);
        }
    }
    let kind_of = |e: bool| if e { Kind::E } else { Kind::A };
    let mut kinds_m = Vec::new();
    let mut kinds_n = Vec::new();
    for n in 0..a.index_cap {
        let len = caps.spine_len(a.limit(n));
        kinds_m.push(
            (0..len)
                .map(|i| (1..=caps.levels).map(|m| kind_of(i >= 1 && a.reaches(n, m, i))).collect())
                .collect::<Vec<Vec<Kind>>>(),
        );
        kinds_n.push(
            (0..len)
                .map(|i| (1..=caps.levels).map(|m| kind_of(a.reaches(n, m, i + 1))).collect())
                .collect::<Vec<Vec<Kind>>>(),
        );
    }
    let (m, spine) = assemble(&kinds_m, &trees, caps.levels)?;
    let (n, _) = assemble(&kinds_n, &trees, caps.levels)?;
    Ok(BoxPair { m, n, approx: a.clone(), caps, spine, kinds_m, kinds_n })
}

/// Lays out each sort as its spine followed by the boxes of each spine
/// element, level by level.
fn assemble(
    kinds: &[Vec<Vec<Kind>>],
    trees: &std::collections::BTreeMap<(Kind, u32), Tree>,
    levels: u32,
) -> Result<(FiniteStructure, Vec<Vec<Element>>), CoderError> {
    let mut b = StructureBuilder::new();
    b.declare_unary(vocab::SPINE);
    b.declare_unary(vocab::ROOT);
    b.declare_binary(vocab::EDGE);
    for m in 1..=levels {
        b.declare_binary(&vocab::box_level(m));
    }
    let mut spine = Vec::new();
    for (n, sort) in kinds.iter().enumerate() {
        let tag = vocab::sort_tag(n as u32);
        b.declare_unary(&tag);
        let ids: Vec<Element> = b.add_elements(sort.len()).collect();
        for &x in &ids {
            b.insert_unary(vocab::SPINE, x);
            b.insert_unary(&tag, x);
        }
        for (i, per_level) in sort.iter().enumerate() {
            for (k, &kind) in per_level.iter().enumerate() {
                let m = k as u32 + 1;
                let tree = &trees[&(kind, m)];
                let base = b.add_elements(tree.len()).start;
                let t_m = vocab::box_level(m);
                for v in 0..tree.len() {
                    let x = base + v as Element;
                    b.insert_unary(&tag, x);
                    b.insert_binary(&t_m, ids[i], x);
                    if let Some(p) = tree.parent(v) {
                        b.insert_binary(vocab::EDGE, base + p as Element, x);
                    }
                }
                b.insert_unary(vocab::ROOT, base + tree.root() as Element);
            }
        }
        spine.push(ids);
    }
    Ok((b.build()?, spine))
}

/// Pairs the level-`m` boxes of `l` (left) and `r` (right) for every level.
pub(super) fn match_boxes(
    left: &FiniteStructure,
    l: Element,
    right: &FiniteStructure,
    r: Element,
    levels: u32,
    iso: impl Fn(&Tree, &Tree, u32) -> Result<IsoWitness, crate::baf::BafError>,
    out: &mut Vec<(Element, Element)>,
) -> Result<(), CoderError> {
    out.push((l, r));
    for m in 1..=levels {
        let (lt, lids) = box_tree(left, l, m)?;
        let (rt, rids) = box_tree(right, r, m)?;
        let w = iso(&lt, &rt, m)?;
        out.extend(w.pairs().map(|(x, y)| (lids[x as usize], rids[y as usize])));
    }
    Ok(())
}

/// Shift map on each spine, `a_0 ↦ b_f`, `a_i ↦ b_{i-1}` for `0 < i ≤ f`,
/// `a_i ↦ b_i` above, extended into the boxes like to like.
pub fn boxes_canonical_iso(pair: &BoxPair) -> Result<IsoWitness, CoderError> {
    let mut pairs = Vec::with_capacity(pair.m.len());
    for n in 0..pair.sorts() {
        let f = pair.limit(n);
        let spine = &pair.spine[n as usize];
        for (i, &a) in spine.iter().enumerate() {
            let i = i as u32;
            let j = if i == 0 { f } else if i <= f { i - 1 } else { i };
            match_boxes(&pair.m, a, &pair.n, spine[j as usize], pair.caps.levels, iso_baf, &mut pairs)?;
        }
    }
    Ok(IsoWitness::total(pairs)?)
}

/// `ĝ(n)`: the index `j` with `g(a_0) = b_j`.
pub fn extract_dominator(g: &IsoWitness, pair: &BoxPair) -> Result<Vec<u32>, CoderError> {
    if let Err(m) = verify_isomorphism(&pair.m, &pair.n, g)? {
        return Err(CoderError::WitnessInvalid(m.0));
    }
    let mut out = Vec::new();
    for n in 0..pair.sorts() {
        let spine = &pair.spine[n as usize];
        let y = g.get(spine[0]).expect("total witness");
        let j = spine
            .iter()
            .position(|&b| b == y)
            .ok_or_else(|| CoderError::WitnessInvalid(format!("a_0 of sort {n} maps to {y}, off the spine")))?;
        out.push(j as u32);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baf::classify;
    use crate::effective::Cell;
    use crate::model::{check_isomorphism, find_isomorphisms_with, SearchConfig};

    /// One sort whose row has the given `(value, level)` cells.
    fn single(row: &[(u32, u32)], level_cap: u32) -> MonotoneApprox {
        let a = MonotoneApprox {
            index_cap: 1,
            horizon: row.len() as u32 - 1,
            level_cap,
            table: vec![row.iter().map(|&(value, level)| Cell { value, level }).collect()],
        };
        a.validate().unwrap();
        a
    }

    fn kinds_by_classify(s: &FiniteStructure, owner: Element, levels: u32) -> Vec<Kind> {
        (1..=levels).map(|m| classify(&box_tree(s, owner, m).unwrap().0, m).unwrap()).collect()
    }

    #[test]
    fn constant_zero_is_all_a() {
        let a = MonotoneApprox::zero(2, 3, 2);
        let p = build_boxes(&a, BoxCaps { w: 1, levels: 2, i_max: None }).unwrap();
        for side in [&p.kinds_m, &p.kinds_n] {
            assert!(side.iter().flatten().flatten().all(|&k| k == Kind::A));
        }
        assert_eq!(p.spine[0].len(), 3);
        let g = boxes_canonical_iso(&p).unwrap();
        assert!(check_isomorphism(&p.m, &p.n, &g).unwrap());
        assert_eq!(extract_dominator(&g, &p).unwrap(), vec![0, 0]);
    }

    #[test]
    fn limit_three_marks_first_three_right_spines() {
        let a = single(&[(0, 1), (0, 1), (2, 1), (2, 2), (3, 2)], 2);
        let p = build_boxes(&a, BoxCaps { w: 1, levels: 3, i_max: None }).unwrap();
        assert_eq!(p.spine[0].len(), 6);
        for (i, &b) in p.spine[0].iter().enumerate() {
            let kinds = kinds_by_classify(&p.n, b, 3);
            assert_eq!(kinds, p.kinds_n[0][i]);
            assert_eq!(kinds.contains(&Kind::E), i < 3, "b_{i}");
        }
        assert!(kinds_by_classify(&p.m, p.spine[0][0], 3).iter().all(|&k| k == Kind::A));
        // Value 2 is reached at level 1, value 3 only at level 2.
        assert_eq!(p.kinds_n[0][1], vec![Kind::E, Kind::E, Kind::E]);
        assert_eq!(p.kinds_n[0][2], vec![Kind::A, Kind::E, Kind::E]);
        let g = boxes_canonical_iso(&p).unwrap();
        assert!(check_isomorphism(&p.m, &p.n, &g).unwrap());
        assert_eq!(g.get(p.spine[0][0]), Some(p.spine[0][3]));
        assert_eq!(extract_dominator(&g, &p).unwrap(), vec![3]);
    }

    #[test]
    fn every_isomorphism_dominates_at_small_caps() {
        let a = single(&[(0, 0), (1, 2), (2, 1)], 2);
        let p = build_boxes(&a, BoxCaps { w: 1, levels: 2, i_max: None }).unwrap();
        let all = find_isomorphisms_with(&p.m, &p.n, None, SearchConfig::unbounded()).unwrap();
        assert!(!all.is_empty());
        for g in &all {
            assert!(extract_dominator(g, &p).unwrap()[0] >= 2);
        }
    }

    #[test]
    fn short_spine_is_rejected() {
        let a = single(&[(0, 0), (2, 0)], 0);
        let err = build_boxes(&a, BoxCaps { w: 1, levels: 1, i_max: Some(2) }).unwrap_err();
        assert!(err.to_string().contains("spine too short"));
    }

    #[test]
    fn off_spine_image_is_rejected() {
        let a = MonotoneApprox::zero(1, 0, 1);
        let p = build_boxes(&a, BoxCaps { w: 1, levels: 1, i_max: None }).unwrap();
        let g = IsoWitness::identity(p.m.len());
        assert_eq!(extract_dominator(&g, &p).unwrap(), vec![0]);
        let bad = IsoWitness::identity(p.m.len() - 1);
        assert!(extract_dominator(&bad, &p).is_err());
    }
}
