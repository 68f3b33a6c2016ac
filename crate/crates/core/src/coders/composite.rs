use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{build_boxes, extract_dominator, iso_with_modulus, BoxCaps, BoxPair, CoderError};
use crate::baf::{apparent_rank, build_tree, iso_baf_with, Kind, RankOracle, TreeKind, TruncationParams};
use crate::effective::{modulus_decode, monotone_from_ce, self_modulus, CeSetSpec, LevelPolicy, Modulus};
use crate::model::{
    scramble, verify_isomorphism, Element, FiniteStructure, IsoWitness, StructureBuilder, Tree,
};
use crate::vocab;

/// Truncation of the union of E-trees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SOmegaCaps {
    /// Ranks `1..=n_max` are present.
    pub n_max: u32,
    /// Copies per rank, and the width of each tree.
    pub w: u32,
}

impl Default for SOmegaCaps {
    fn default() -> Self {
        SOmegaCaps { n_max: 2, w: 2 }
    }
}

/// `w` copies of `E(n)` for each `n ≤ n_max`. Components are named `c<k>` in
/// order of their root ids. With a seed the whole presentation is shuffled,
/// so component order and node numbering say nothing about ranks.
pub fn build_s_omega(caps: SOmegaCaps, seed: Option<u64>) -> Result<FiniteStructure, CoderError> {
    let t = TruncationParams { w: caps.w, rank_cap: caps.n_max.max(1), ..TruncationParams::default() };
    t.validate()?;
    let mut trees = Vec::new();
    for n in 1..=caps.n_max {
        let tree = build_tree(TreeKind::E(n), &t)?.to_structure();
        trees.extend(std::iter::repeat_n(tree, caps.w as usize));
    }
    let refs: Vec<&FiniteStructure> = trees.iter().collect();
    let (mut s, _) = FiniteStructure::disjoint_union(&refs, true);
    s.validate()?;
    if let Some(seed) = seed {
        s = scramble(&s, seed).0;
    }
    Ok(rename_components(&s))
}

fn rename_components(s: &FiniteStructure) -> FiniteStructure {
    let roots: BTreeSet<Element> = s.roots().values().copied().collect();
    let mut b = StructureBuilder::new();
    b.add_elements(s.len());
    for (k, rel) in s.unary() {
        b.declare_unary(k);
        rel.iter().for_each(|&x| b.insert_unary(k, x));
    }
    for (k, rel) in s.binary() {
        b.declare_binary(k);
        rel.iter().for_each(|&(x, y)| b.insert_binary(k, x, y));
    }
    for (k, r) in roots.into_iter().enumerate() {
        b.set_root(&format!("c{k}"), r);
    }
    b.build().expect("renaming keeps a valid structure")
}

type Census = BTreeMap<(u32, Kind), Vec<(Tree, Vec<Element>)>>;

/// Root components of a forest, each read as a tree and classified at the
/// rank its height suggests.
fn components(s: &FiniteStructure, oracle: &RankOracle) -> Result<Census, CoderError> {
    let has_parent: BTreeSet<Element> = s.binary_rel(vocab::EDGE).map(|e| e.iter().map(|&(_, c)| c).collect()).unwrap_or_default();
    let mut out = Census::new();
    for &r in s.universe().iter().filter(|x| !has_parent.contains(x)) {
        let mut members = vec![r];
        let mut i = 0;
        while i < members.len() {
            members.extend(s.edge_children(members[i]));
            i += 1;
        }
        let (tree, ids) = Tree::from_elements(s, &members)?;
        let n = apparent_rank(&tree, tree.root());
        let kind = oracle.classify(&tree, n)?;
        out.entry((n, kind)).or_default().push((tree, ids));
    }
    Ok(out)
}

/// Matches the components of two presentations of a union of family trees,
/// classifying every component of both, and fills each matched pair like to
/// like.
pub fn s_omega_iso(std: &FiniteStructure, copy: &FiniteStructure, oracle: &RankOracle) -> Result<IsoWitness, CoderError> {
    let left = components(std, oracle)?;
    let right = components(copy, oracle)?;
    let shape = |m: &Census| {
        m.iter().map(|(k, v)| (*k, v.len())).collect::<Vec<_>>()
    };
    if shape(&left) != shape(&right) {
        return Err(CoderError::CopyMalformed(format!(
            "component census differs: {:?} vs {:?}",
            shape(&left),
            shape(&right)
        )));
    }
    let mut pairs = Vec::with_capacity(std.len());
    for (key, ls) in &left {
        for ((lt, lids), (rt, rids)) in ls.iter().zip(&right[key]) {
            let w = iso_baf_with(oracle, lt, rt, key.0)?;
            pairs.extend(w.pairs().map(|(x, y)| (lids[x as usize], rids[y as usize])));
        }
    }
    let w = IsoWitness::total(pairs)?;
    if let Err(m) = verify_isomorphism(std, copy, &w)? {
        return Err(CoderError::CopyMalformed(m.0));
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Left box side plus the plain union of E-trees.
    Easy,
    /// Right box side plus a shuffled union.
    Hard,
}

/// A box side and a union of E-trees side by side, the latter marked by `R`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompositeStructure {
    pub structure: FiniteStructure,
    pub side: Side,
    pub seed: Option<u64>,
    /// The box side occupies `0..coding_len`; `R` holds exactly above.
    pub coding_len: usize,
}

impl CompositeStructure {
    pub fn coding_part(&self) -> Result<FiniteStructure, CoderError> {
        let ids: Vec<Element> = (0..self.coding_len as Element).collect();
        Ok(self.structure.induced(&ids)?.0)
    }

    pub fn s_omega_part(&self) -> Result<FiniteStructure, CoderError> {
        let ids: Vec<Element> = (self.coding_len as Element..self.structure.len() as Element).collect();
        Ok(self.structure.induced(&ids)?.0)
    }

    /// Restricts an isomorphism `self → other` to the two parts.
    pub fn split_witness(&self, other: &CompositeStructure, g: &IsoWitness) -> Result<(IsoWitness, IsoWitness), CoderError> {
        let (mut code, mut rest) = (Vec::new(), Vec::new());
        for (x, y) in g.pairs() {
            let (xl, yl) = (x as usize >= self.coding_len, y as usize >= other.coding_len);
            if xl != yl {
                return Err(CoderError::WitnessInvalid(format!("{x} and its image {y} lie in different parts")));
            }
            if xl {
                rest.push((x - self.coding_len as Element, y - other.coding_len as Element));
            } else {
                code.push((x, y));
            }
        }
        Ok((IsoWitness::total(code)?, IsoWitness::total(rest)?))
    }
}

pub fn build_composite(pair: &BoxPair, side: Side, caps: SOmegaCaps, seed: u64) -> Result<CompositeStructure, CoderError> {
    let (coding, scramble_seed) = match side {
        Side::Easy => (&pair.m, None),
        Side::Hard => (&pair.n, Some(seed)),
    };
    let s = build_s_omega(caps, scramble_seed)?;
    let (u, offsets) = FiniteStructure::disjoint_union(&[coding, &s], false);
    let structure = u.with_unary(vocab::PART, offsets[1]..offsets[1] + s.len() as Element);
    structure.validate()?;
    Ok(CompositeStructure { structure, side, seed: scramble_seed, coding_len: coding.len() })
}

/// Caps for one encode/decode run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineCaps {
    pub boxes: BoxCaps,
    pub s_omega: SOmegaCaps,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndToEndReport {
    pub spec: String,
    pub expected: BTreeSet<u32>,
    pub modulus: Vec<u32>,
    pub dominator: Vec<u32>,
    pub recovered: BTreeSet<u32>,
    pub exact: bool,
    pub elements: usize,
    /// Classifier calls spent matching the shuffled union of E-trees.
    pub s_omega_oracle_calls: usize,
    pub s_omega_components: usize,
    /// Classifier calls spent on the box sides.
    pub coding_oracle_calls: usize,
}

fn stage<T, E: std::fmt::Display>(stage: &'static str, r: Result<T, E>) -> Result<T, CoderError> {
    r.map_err(|e| CoderError::Stage { stage, detail: e.to_string() })
}

/// An isomorphism from the easy composite onto the hard one and what it cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Glue {
    pub witness: IsoWitness,
    pub coding_oracle_calls: usize,
    pub s_omega_oracle_calls: usize,
    pub s_omega_components: usize,
}

/// Matches the box sides through the limits `f` and the E-tree unions
/// through the classifier, glues the two and verifies the result against
/// the composites as given.
pub fn glue_witness(
    pair: &BoxPair,
    easy: &CompositeStructure,
    hard: &CompositeStructure,
    f: &Modulus,
) -> Result<Glue, CoderError> {
    let coding_oracle = RankOracle::new();
    let code = stage("match box sides", iso_with_modulus(pair, &pair.m, f, &coding_oracle))?.inverse();
    let s_oracle = RankOracle::new();
    let (easy_s, hard_s) = (easy.s_omega_part()?, hard.s_omega_part()?);
    let rest = stage("match E-tree unions", s_omega_iso(&easy_s, &hard_s, &s_oracle))?;
    let glued = code.pairs().chain(rest.pairs().map(|(x, y)| (x + easy.coding_len as Element, y + hard.coding_len as Element)));
    let witness = IsoWitness::total(glued.collect::<Vec<_>>())?;
    if let Err(m) = verify_isomorphism(&easy.structure, &hard.structure, &witness)? {
        return Err(CoderError::Stage { stage: "glue", detail: m.0 });
    }
    Ok(Glue {
        witness,
        coding_oracle_calls: coding_oracle.calls(),
        s_omega_oracle_calls: s_oracle.calls(),
        s_omega_components: hard_s.roots().len(),
    })
}

/// Encodes `d` into the easy and hard composites, builds an isomorphism
/// between them from the self-modulus and the classifier, reads a dominator
/// off it and decodes `d` back.
pub fn end_to_end(d: &CeSetSpec, caps: PipelineCaps, seed: u64) -> Result<EndToEndReport, CoderError> {
    let f = self_modulus(d);
    let approx = stage("approximate", monotone_from_ce(d, &LevelPolicy::Seeded(seed), caps.boxes.levels))?;
    let pair = stage("build boxes", build_boxes(&approx, caps.boxes))?;
    let easy = stage("build easy composite", build_composite(&pair, Side::Easy, caps.s_omega, seed))?;
    let hard = stage("build hard composite", build_composite(&pair, Side::Hard, caps.s_omega, seed))?;

    let glue = glue_witness(&pair, &easy, &hard, &f)?;
    let (code_part, _) = easy.split_witness(&hard, &glue.witness)?;
    let dominator = stage("extract dominator", extract_dominator(&code_part, &pair))?;
    let recovered = stage("decode", modulus_decode(&dominator, d))?;
    let expected = d.members();
    Ok(EndToEndReport {
        spec: d.to_string(),
        exact: recovered == expected,
        expected,
        modulus: f.values,
        dominator,
        recovered,
        elements: easy.structure.len(),
        s_omega_oracle_calls: glue.s_omega_oracle_calls,
        s_omega_components: glue.s_omega_components,
        coding_oracle_calls: glue.coding_oracle_calls,
    })
}
