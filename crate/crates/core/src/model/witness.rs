use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Element, FiniteStructure, ModelError};

/// An injective map between two universes, total or partial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoWitness {
    pairs: BTreeMap<Element, Element>,
    total: bool,
}

impl IsoWitness {
    /// Total witness from an image vector: element `i` maps to `images[i]`.
    pub fn from_images(images: Vec<Element>) -> Result<Self, ModelError> {
        let pairs: BTreeMap<_, _> = images.into_iter().enumerate().map(|(i, y)| (i as Element, y)).collect();
        Self::build(pairs, true)
    }

    pub fn partial(pairs: impl IntoIterator<Item = (Element, Element)>) -> Result<Self, ModelError> {
        Self::build(pairs.into_iter().collect(), false)
    }

    /// Total witness from explicit pairs. The caller asserts coverage of the
    /// left universe; [`check_isomorphism`] re-checks it.
    pub fn total(pairs: impl IntoIterator<Item = (Element, Element)>) -> Result<Self, ModelError> {
        Self::build(pairs.into_iter().collect(), true)
    }

    fn build(pairs: BTreeMap<Element, Element>, total: bool) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for (&x, &y) in &pairs {
            if !seen.insert(y) {
                return Err(ModelError::Malformed(format!("witness not injective: {x} -> {y} repeats an image")));
            }
        }
        Ok(IsoWitness { pairs, total })
    }

    pub fn identity(n: usize) -> Self {
        IsoWitness {
            pairs: (0..n as Element).map(|x| (x, x)).collect(),
            total: true,
        }
    }

    pub fn is_total(&self) -> bool {
        self.total
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, x: Element) -> Option<Element> {
        self.pairs.get(&x).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Element, Element)> + '_ {
        self.pairs.iter().map(|(&x, &y)| (x, y))
    }

    pub fn inverse(&self) -> IsoWitness {
        IsoWitness {
            pairs: self.pairs.iter().map(|(&x, &y)| (y, x)).collect(),
            total: self.total,
        }
    }

    /// `other ∘ self`: first `self`, then `other`.
    pub fn then(&self, other: &IsoWitness) -> Result<IsoWitness, ModelError> {
        let mut pairs = BTreeMap::new();
        for (&x, &y) in &self.pairs {
            let z = other
                .get(y)
                .ok_or_else(|| ModelError::Malformed(format!("composition undefined at {x} -> {y}")))?;
            pairs.insert(x, z);
        }
        Ok(IsoWitness {
            pairs,
            total: self.total && other.total,
        })
    }

    /// Images in left-id order (total witnesses only).
    pub fn images(&self) -> Vec<Element> {
        self.pairs.values().copied().collect()
    }
}

/// First relation clause an alleged isomorphism breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoMismatch(pub String);

impl fmt::Display for IsoMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Verifies `w` relation by relation and reports the first failure.
pub fn verify_isomorphism(
    left: &FiniteStructure,
    right: &FiniteStructure,
    w: &IsoWitness,
) -> Result<Result<(), IsoMismatch>, ModelError> {
    if !w.is_total() {
        return Err(ModelError::PartialWitness);
    }
    let mismatch = |msg: String| Ok(Err(IsoMismatch(msg)));
    if left.len() != right.len() {
        return mismatch(format!("universe sizes differ: {} vs {}", left.len(), right.len()));
    }
    if w.len() != left.len() {
        return mismatch(format!("witness covers {} of {} elements", w.len(), left.len()));
    }
    for (x, y) in w.pairs() {
        if !left.contains(x) {
            return mismatch(format!("witness maps unknown element {x}"));
        }
        if !right.contains(y) {
            return mismatch(format!("witness image {y} is not in the right universe"));
        }
    }
    let empty1 = BTreeSet::new();
    let names1: BTreeSet<&String> = left.unary().keys().chain(right.unary().keys()).collect();
    for name in names1 {
        let l = left.unary_rel(name).unwrap_or(&empty1);
        let r = right.unary_rel(name).unwrap_or(&empty1);
        if l.len() != r.len() {
            return mismatch(format!("{name}: {} members vs {}", l.len(), r.len()));
        }
        for &x in l {
            let y = w.get(x).expect("total");
            if !r.contains(&y) {
                return mismatch(format!("{name}({x}) holds but {name}({y}) fails"));
            }
        }
    }
    let empty2 = BTreeSet::new();
    let names2: BTreeSet<&String> = left.binary().keys().chain(right.binary().keys()).collect();
    for name in names2 {
        let l = left.binary_rel(name).unwrap_or(&empty2);
        let r = right.binary_rel(name).unwrap_or(&empty2);
        if l.len() != r.len() {
            return mismatch(format!("{name}: {} pairs vs {}", l.len(), r.len()));
        }
        for &(x, y) in l {
            let (gx, gy) = (w.get(x).expect("total"), w.get(y).expect("total"));
            if !r.contains(&(gx, gy)) {
                return mismatch(format!("{name}({x},{y}) holds but {name}({gx},{gy}) fails"));
            }
        }
    }
    let lroots: BTreeSet<Element> = left.roots().values().copied().collect();
    let rroots: BTreeSet<Element> = right.roots().values().copied().collect();
    let mapped: BTreeSet<Element> = lroots.iter().map(|&x| w.get(x).expect("total")).collect();
    if mapped != rroots {
        return mismatch("roots are not mapped onto roots".to_string());
    }
    Ok(Ok(()))
}

/// True iff `w` is an isomorphism from `left` onto `right`. Partial witnesses
/// are rejected with [`ModelError::PartialWitness`].
pub fn check_isomorphism(left: &FiniteStructure, right: &FiniteStructure, w: &IsoWitness) -> Result<bool, ModelError> {
    Ok(verify_isomorphism(left, right, w)?.is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StructureBuilder;

    fn path3() -> FiniteStructure {
        let mut b = StructureBuilder::new();
        b.add_elements(3);
        b.insert_binary("Edge", 0, 1);
        b.insert_binary("Edge", 1, 2);
        b.insert_unary("Root", 0);
        b.build().unwrap()
    }

    #[test]
    fn identity_is_an_isomorphism() {
        let s = path3();
        assert!(check_isomorphism(&s, &s, &IsoWitness::identity(3)).unwrap());
    }

    #[test]
    fn partial_witness_is_rejected() {
        let s = path3();
        let w = IsoWitness::partial([(0, 0)]).unwrap();
        assert!(matches!(check_isomorphism(&s, &s, &w), Err(ModelError::PartialWitness)));
    }

    #[test]
    fn swapped_path_fails() {
        let s = path3();
        let w = IsoWitness::from_images(vec![2, 1, 0]).unwrap();
        assert!(!check_isomorphism(&s, &s, &w).unwrap());
    }

    #[test]
    fn non_injective_witness_cannot_be_built() {
        assert!(IsoWitness::from_images(vec![0, 0]).is_err());
    }

    #[test]
    fn composition_and_inverse() {
        let w = IsoWitness::from_images(vec![1, 2, 0]).unwrap();
        let id = w.then(&w.inverse()).unwrap();
        assert_eq!(id, IsoWitness::identity(3));
    }
}
