use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::vocab;

/// Element id. Ids are dense: a structure with `k` elements uses exactly `0..k`.
pub type Element = u32;

/// A finite relational structure over unary and binary relation symbols.
///
/// Relation symbols are declared even when empty, so a structure carries its
/// vocabulary. The order of `universe` is the presentation order of the copy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StructureDoc", into = "StructureDoc")]
pub struct FiniteStructure {
    universe: Vec<Element>,
    unary: BTreeMap<String, BTreeSet<Element>>,
    binary: BTreeMap<String, BTreeSet<(Element, Element)>>,
    roots: BTreeMap<String, Element>,
}

/// Wire form: `{universe, unary, binary, roots}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDoc {
    universe: Vec<Element>,
    unary: BTreeMap<String, Vec<Element>>,
    binary: BTreeMap<String, Vec<[Element; 2]>>,
    roots: BTreeMap<String, Element>,
}

impl From<FiniteStructure> for StructureDoc {
    fn from(s: FiniteStructure) -> Self {
        StructureDoc {
            universe: s.universe,
            unary: s
                .unary
                .into_iter()
                .map(|(k, v)| (k, v.into_iter().collect()))
                .collect(),
            binary: s
                .binary
                .into_iter()
                .map(|(k, v)| (k, v.into_iter().map(|(a, b)| [a, b]).collect()))
                .collect(),
            roots: s.roots,
        }
    }
}

impl TryFrom<StructureDoc> for FiniteStructure {
    type Error = ModelError;

    fn try_from(doc: StructureDoc) -> Result<Self, Self::Error> {
        let mut unary = BTreeMap::new();
        for (name, members) in doc.unary {
            let set: BTreeSet<_> = members.iter().copied().collect();
            if set.len() != members.len() {
                return Err(ModelError::Malformed(format!("duplicate member in {name}")));
            }
            unary.insert(name, set);
        }
        let mut binary = BTreeMap::new();
        for (name, pairs) in doc.binary {
            let set: BTreeSet<_> = pairs.iter().map(|p| (p[0], p[1])).collect();
            if set.len() != pairs.len() {
                return Err(ModelError::Malformed(format!("duplicate pair in {name}")));
            }
            binary.insert(name, set);
        }
        let s = FiniteStructure {
            universe: doc.universe,
            unary,
            binary,
            roots: doc.roots,
        };
        s.validate()?;
        Ok(s)
    }
}

impl FiniteStructure {
    pub fn empty() -> Self {
        FiniteStructure {
            universe: Vec::new(),
            unary: BTreeMap::new(),
            binary: BTreeMap::new(),
            roots: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    /// Elements in presentation order.
    pub fn universe(&self) -> &[Element] {
        &self.universe
    }

    pub fn unary(&self) -> &BTreeMap<String, BTreeSet<Element>> {
        &self.unary
    }

    pub fn binary(&self) -> &BTreeMap<String, BTreeSet<(Element, Element)>> {
        &self.binary
    }

    pub fn roots(&self) -> &BTreeMap<String, Element> {
        &self.roots
    }

    pub fn unary_rel(&self, name: &str) -> Option<&BTreeSet<Element>> {
        self.unary.get(name)
    }

    pub fn binary_rel(&self, name: &str) -> Option<&BTreeSet<(Element, Element)>> {
        self.binary.get(name)
    }

    pub fn holds1(&self, name: &str, x: Element) -> bool {
        self.unary.get(name).is_some_and(|r| r.contains(&x))
    }

    pub fn holds2(&self, name: &str, x: Element, y: Element) -> bool {
        self.binary.get(name).is_some_and(|r| r.contains(&(x, y)))
    }

    pub fn contains(&self, x: Element) -> bool {
        (x as usize) < self.universe.len()
    }

    /// Checks the structural invariants: dense ids, relations inside the
    /// universe, `Edge` a forest, sort tags pairwise disjoint, and every
    /// declared root parentless.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.universe.len();
        let mut seen = vec![false; n];
        for &x in &self.universe {
            let slot = seen
                .get_mut(x as usize)
                .ok_or_else(|| ModelError::Malformed(format!("element {x} is not dense")))?;
            if *slot {
                return Err(ModelError::Malformed(format!("element {x} listed twice")));
            }
            *slot = true;
        }
        for (name, rel) in &self.unary {
            if let Some(&x) = rel.iter().find(|&&x| !self.contains(x)) {
                return Err(ModelError::Malformed(format!("{name} mentions unknown element {x}")));
            }
        }
        for (name, rel) in &self.binary {
            if let Some(&(x, y)) = rel.iter().find(|&&(x, y)| !self.contains(x) || !self.contains(y)) {
                return Err(ModelError::Malformed(format!(
                    "{name} mentions unknown pair ({x}, {y})"
                )));
            }
        }
        for (component, &r) in &self.roots {
            if !self.contains(r) {
                return Err(ModelError::Malformed(format!("root of {component} is unknown element {r}")));
            }
        }
        self.check_forest()?;
        self.check_sort_tags()
    }

    fn check_forest(&self) -> Result<(), ModelError> {
        let Some(edges) = self.binary.get(vocab::EDGE) else {
            return Ok(());
        };
        let n = self.len();
        let mut parent: Vec<Option<Element>> = vec![None; n];
        for &(p, c) in edges {
            if p == c {
                return Err(ModelError::Malformed(format!("Edge loop at {p}")));
            }
            if let Some(old) = parent[c as usize].replace(p) {
                return Err(ModelError::Malformed(format!(
                    "element {c} has two parents ({old} and {p})"
                )));
            }
        }
        // Walk each parent chain; a chain longer than n means a cycle.
        let mut state = vec![0u8; n]; // 0 unseen, 1 on stack, 2 done
        for start in 0..n {
            let mut path = Vec::new();
            let mut cur = Some(start as Element);
            while let Some(x) = cur {
                match state[x as usize] {
                    2 => break,
                    1 => return Err(ModelError::Malformed(format!("Edge cycle through {x}"))),
                    _ => {}
                }
                state[x as usize] = 1;
                path.push(x);
                cur = parent[x as usize];
            }
            for x in path {
                state[x as usize] = 2;
            }
        }
        for (component, &r) in &self.roots {
            if let Some(p) = parent[r as usize] {
                return Err(ModelError::Malformed(format!(
                    "root {r} of {component} has parent {p}"
                )));
            }
        }
        Ok(())
    }

    fn check_sort_tags(&self) -> Result<(), ModelError> {
        let mut owner: BTreeMap<Element, &str> = BTreeMap::new();
        for (name, rel) in &self.unary {
            if vocab::parse_sort_tag(name).is_none() {
                continue;
            }
            for &x in rel {
                if let Some(prev) = owner.insert(x, name) {
                    return Err(ModelError::Malformed(format!(
                        "element {x} carries sort tags {prev} and {name}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Children of `x` along `Edge`, in id order.
    pub fn edge_children(&self, x: Element) -> Vec<Element> {
        match self.binary.get(vocab::EDGE) {
            Some(e) => e.range((x, 0)..=(x, Element::MAX)).map(|&(_, c)| c).collect(),
            None => Vec::new(),
        }
    }

    /// Members of the level-`m` box owned by `owner`.
    pub fn box_members(&self, owner: Element, m: u32) -> Vec<Element> {
        match self.binary.get(&vocab::box_level(m)) {
            Some(t) => t
                .range((owner, 0)..=(owner, Element::MAX))
                .map(|&(_, x)| x)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Induced substructure on `elements` (kept in the given order, renumbered
    /// densely). Returns the substructure and, for each new id, the original id.
    pub fn induced(&self, elements: &[Element]) -> Result<(FiniteStructure, Vec<Element>), ModelError> {
        let mut new_id: BTreeMap<Element, Element> = BTreeMap::new();
        for (i, &x) in elements.iter().enumerate() {
            if !self.contains(x) {
                return Err(ModelError::UnknownElement(x));
            }
            if new_id.insert(x, i as Element).is_some() {
                return Err(ModelError::Malformed(format!("element {x} selected twice")));
            }
        }
        let unary = self
            .unary
            .iter()
            .map(|(k, rel)| {
                let set = rel.iter().filter_map(|x| new_id.get(x).copied()).collect();
                (k.clone(), set)
            })
            .collect();
        let binary = self
            .binary
            .iter()
            .map(|(k, rel)| {
                let set = rel
                    .iter()
                    .filter_map(|(x, y)| Some((*new_id.get(x)?, *new_id.get(y)?)))
                    .collect();
                (k.clone(), set)
            })
            .collect();
        let roots = self
            .roots
            .iter()
            .filter_map(|(k, r)| Some((k.clone(), *new_id.get(r)?)))
            .collect();
        let sub = FiniteStructure {
            universe: (0..elements.len() as Element).collect(),
            unary,
            binary,
            roots,
        };
        Ok((sub, elements.to_vec()))
    }

    /// Relabels every element by `perm` (old id → new id). The universe is
    /// listed in new-id order.
    pub fn relabel(&self, perm: &[Element]) -> Result<FiniteStructure, ModelError> {
        if perm.len() != self.len() {
            return Err(ModelError::Malformed("permutation length mismatch".into()));
        }
        let mut check = vec![false; perm.len()];
        for &p in perm {
            match check.get_mut(p as usize) {
                Some(slot) if !*slot => *slot = true,
                _ => return Err(ModelError::Malformed("not a permutation".into())),
            }
        }
        let map = |x: &Element| perm[*x as usize];
        Ok(FiniteStructure {
            universe: (0..perm.len() as Element).collect(),
            unary: self
                .unary
                .iter()
                .map(|(k, rel)| (k.clone(), rel.iter().map(map).collect()))
                .collect(),
            binary: self
                .binary
                .iter()
                .map(|(k, rel)| (k.clone(), rel.iter().map(|(x, y)| (map(x), map(y))).collect()))
                .collect(),
            roots: self.roots.iter().map(|(k, r)| (k.clone(), map(r))).collect(),
        })
    }

    /// Disjoint union. Element ids of the `i`th part are shifted by the
    /// returned offset; root component names get a `<i>.` prefix when
    /// `prefix_components` is set.
    pub fn disjoint_union(parts: &[&FiniteStructure], prefix_components: bool) -> (FiniteStructure, Vec<Element>) {
        let mut b = StructureBuilder::new();
        let mut offsets = Vec::with_capacity(parts.len());
        for (i, part) in parts.iter().enumerate() {
            let off = b.len() as Element;
            offsets.push(off);
            b.add_elements(part.len());
            for (k, rel) in &part.unary {
                b.declare_unary(k);
                for &x in rel {
                    b.insert_unary(k, x + off);
                }
            }
            for (k, rel) in &part.binary {
                b.declare_binary(k);
                for &(x, y) in rel {
                    b.insert_binary(k, x + off, y + off);
                }
            }
            for (k, &r) in &part.roots {
                let name = if prefix_components { format!("{i}.{k}") } else { k.clone() };
                b.set_root(&name, r + off);
            }
        }
        (b.finish_unchecked(), offsets)
    }

    /// Extra unary tag on the given elements (declared even when empty).
    pub fn with_unary(mut self, name: &str, members: impl IntoIterator<Item = Element>) -> Self {
        let set = self.unary.entry(name.to_string()).or_default();
        set.extend(members);
        self
    }

    /// Serialized JSON, compact, in the canonical field order.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("structure serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))
    }
}

/// Incremental constructor for [`FiniteStructure`].
#[derive(Debug, Default)]
pub struct StructureBuilder {
    size: usize,
    unary: BTreeMap<String, BTreeSet<Element>>,
    binary: BTreeMap<String, BTreeSet<(Element, Element)>>,
    roots: BTreeMap<String, Element>,
}

impl StructureBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn add_element(&mut self) -> Element {
        self.size += 1;
        (self.size - 1) as Element
    }

    pub fn add_elements(&mut self, k: usize) -> std::ops::Range<Element> {
        let start = self.size as Element;
        self.size += k;
        start..self.size as Element
    }

    pub fn declare_unary(&mut self, name: &str) {
        self.unary.entry(name.to_string()).or_default();
    }

    pub fn declare_binary(&mut self, name: &str) {
        self.binary.entry(name.to_string()).or_default();
    }

    pub fn insert_unary(&mut self, name: &str, x: Element) {
        self.unary.entry(name.to_string()).or_default().insert(x);
    }

    pub fn insert_binary(&mut self, name: &str, x: Element, y: Element) {
        self.binary.entry(name.to_string()).or_default().insert((x, y));
    }

    pub fn set_root(&mut self, component: &str, x: Element) {
        self.roots.insert(component.to_string(), x);
    }

    pub fn build(self) -> Result<FiniteStructure, ModelError> {
        let s = self.finish_unchecked();
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn finish_unchecked(self) -> FiniteStructure {
        FiniteStructure {
            universe: (0..self.size as Element).collect(),
            unary: self.unary,
            binary: self.binary,
            roots: self.roots,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FiniteStructure {
        let mut b = StructureBuilder::new();
        b.add_elements(4);
        b.insert_binary(vocab::EDGE, 0, 1);
        b.insert_binary(vocab::EDGE, 0, 2);
        b.insert_binary(vocab::EDGE, 2, 3);
        b.insert_unary(vocab::ROOT, 0);
        b.declare_unary("U3");
        b.set_root("t", 0);
        b.build().unwrap()
    }

    #[test]
    fn json_is_byte_stable() {
        let s = small();
        let text = s.to_json();
        let back = FiniteStructure::from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), text);
        assert!(text.starts_with("{\"universe\":[0,1,2,3],\"unary\":{\"Root\":[0],\"U3\":[]}"));
    }

    #[test]
    fn rejects_second_parent_and_cycles() {
        let mut b = StructureBuilder::new();
        b.add_elements(3);
        b.insert_binary(vocab::EDGE, 0, 2);
        b.insert_binary(vocab::EDGE, 1, 2);
        assert!(b.build().is_err());

        let mut b = StructureBuilder::new();
        b.add_elements(2);
        b.insert_binary(vocab::EDGE, 0, 1);
        b.insert_binary(vocab::EDGE, 1, 0);
        assert!(b.build().is_err());
    }

    #[test]
    fn rejects_overlapping_sort_tags_and_foreign_elements() {
        let mut b = StructureBuilder::new();
        b.add_elements(2);
        b.insert_unary("R0", 1);
        b.insert_unary("R1", 1);
        assert!(b.build().is_err());

        let bad = r#"{"universe":[0],"unary":{"S":[4]},"binary":{},"roots":{}}"#;
        assert!(FiniteStructure::from_json(bad).is_err());
        let sparse = r#"{"universe":[0,2],"unary":{},"binary":{},"roots":{}}"#;
        assert!(FiniteStructure::from_json(sparse).is_err());
        let extra = r#"{"universe":[],"unary":{},"binary":{},"roots":{},"x":1}"#;
        assert!(FiniteStructure::from_json(extra).is_err());
    }

    #[test]
    fn induced_keeps_vocabulary_and_renumbers() {
        let s = small();
        let (sub, orig) = s.induced(&[2, 3]).unwrap();
        assert_eq!(orig, vec![2, 3]);
        assert_eq!(sub.len(), 2);
        assert!(sub.holds2(vocab::EDGE, 0, 1));
        assert!(sub.unary_rel("U3").is_some());
        assert!(sub.roots().is_empty());
    }

    #[test]
    fn relabel_is_an_isomorphic_copy() {
        let s = small();
        let t = s.relabel(&[3, 2, 1, 0]).unwrap();
        assert!(t.holds2(vocab::EDGE, 3, 2));
        assert!(t.holds2(vocab::EDGE, 1, 0));
        assert_eq!(t.roots()["t"], 3);
    }
}
