use std::collections::{BTreeMap, BTreeSet};

use super::{Evaluator, Formula, LogicError, Var};
use crate::model::{Element, FiniteStructure};
use crate::vocab;

/// Elements kept when evaluating a formula with `quantifiers` quantifiers at
/// `tuple` in a structure built from unary relations only.
///
/// Every element in some stage relation `U<s>` is kept. Plain elements are
/// grouped by their remaining unary signature and the first
/// `quantifiers + tuple.len() + 1` of each group are kept, plus the tuple.
pub fn bounded_domain(s: &FiniteStructure, quantifiers: usize, tuple: &[Element]) -> Result<Vec<Element>, LogicError> {
    let need = quantifiers + tuple.len() + 1;
    let mut signature: BTreeMap<Element, Vec<&str>> = s.universe().iter().map(|&x| (x, Vec::new())).collect();
    let mut occupied = BTreeSet::new();
    for (name, members) in s.unary() {
        for &x in members {
            if vocab::parse_stage(name).is_some() {
                occupied.insert(x);
            }
            signature.get_mut(&x).expect("validated").push(name.as_str());
        }
    }
    let plain = s.len() - occupied.len();
    if plain < need {
        return Err(LogicError::TooFewPlain { needed: need, available: plain });
    }
    let mut keep: BTreeSet<Element> = occupied;
    keep.extend(tuple.iter().copied());
    let mut taken: BTreeMap<&Vec<&str>, usize> = BTreeMap::new();
    for (&x, sig) in &signature {
        if keep.contains(&x) {
            continue;
        }
        let k = taken.entry(sig).or_insert(0);
        if *k < need {
            *k += 1;
            keep.insert(x);
        }
    }
    Ok(keep.into_iter().collect())
}

/// Evaluates `phi` on the finite substructure that the decidability argument
/// for stage-coded components uses, instead of on all of `s`.
///
/// `params` binds the free variables of `phi`, in the order of `vars`.
pub fn eval_via_bounded_substructure(
    phi: &Formula,
    s: &FiniteStructure,
    vars: &[Var],
    params: &[Element],
) -> Result<bool, LogicError> {
    if vars.len() != params.len() {
        return Err(LogicError::Arity { name: "parameter tuple".into(), arity: params.len() });
    }
    if let Some(b) = s.binary().keys().next() {
        return Err(LogicError::Model(crate::model::ModelError::Malformed(format!(
            "bounded evaluation needs a purely unary structure, found {b}"
        ))));
    }
    let domain = bounded_domain(s, phi.quantifier_count(), params)?;
    let (sub, orig) = s.induced(&domain)?;
    let new_id: BTreeMap<Element, Element> = orig.iter().enumerate().map(|(i, &x)| (x, i as Element)).collect();
    let a = vars.iter().cloned().zip(params.iter().map(|x| new_id[x])).collect();
    Evaluator::new(&sub).eval(phi, &a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::eval;
    use crate::model::StructureBuilder;

    fn coded(size: usize, occupied: &[(u32, Element)]) -> FiniteStructure {
        let mut b = StructureBuilder::new();
        b.add_elements(size);
        for x in 0..size as Element {
            b.insert_unary("R5", x);
        }
        for s in 0..10 {
            b.declare_unary(&vocab::stage(s));
        }
        for &(s, x) in occupied {
            b.insert_unary(&vocab::stage(s), x);
        }
        b.build().unwrap()
    }

    #[test]
    fn stage_witness_is_always_kept() {
        let s = coded(12, &[(7, 0)]);
        let phi: Formula = "(exists x (U7 x))".parse().unwrap();
        assert!(eval_via_bounded_substructure(&phi, &s, &[], &[]).unwrap());
        let psi: Formula = "(forall x (not (U3 x)))".parse().unwrap();
        assert!(eval_via_bounded_substructure(&psi, &s, &[], &[]).unwrap());
    }

    #[test]
    fn counting_formula_agrees() {
        let s = coded(12, &[(7, 11)]);
        let phi: Formula = "(exists a (exists b (exists c (and (not (= a b)) (not (= b c)) (not (= a c))))))"
            .parse()
            .unwrap();
        let full = eval(&phi, &s, &Default::default()).unwrap();
        assert_eq!(eval_via_bounded_substructure(&phi, &s, &[], &[]).unwrap(), full);
        assert_eq!(bounded_domain(&s, 3, &[]).unwrap().len(), 5);
    }

    #[test]
    fn too_short_truncation_is_an_error() {
        let s = coded(3, &[]);
        let phi: Formula = "(exists a (exists b (exists c true)))".parse().unwrap();
        assert!(matches!(
            eval_via_bounded_substructure(&phi, &s, &[], &[]),
            Err(LogicError::TooFewPlain { needed: 4, available: 3 })
        ));
    }
}
