use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::modulus_iso::least_e_level;
use super::{box_tree, BoxPair, CoderError, WarmupPair};
use crate::baf::{isolating_formula, tuple_vars, RankOracle};
use crate::logic::{phi_n, relativize_to, Evaluator, Formula, Scope, Var};
use crate::model::{extract_sort_with_map, orbit_with, Element, FiniteStructure, SearchConfig, Tree};
use crate::vocab;

#[derive(Clone, Copy, Debug)]
pub enum PrimalityTarget<'a> {
    Boxes(&'a BoxPair),
    Warmup(&'a WarmupPair),
}

/// Random tuples checked per sort, on top of every singleton spine tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleBudget {
    pub samples: usize,
    pub seed: u64,
}

impl Default for TupleBudget {
    fn default() -> Self {
        TupleBudget { samples: 24, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimalityMismatch {
    pub sort: u32,
    /// Ids in the full right-side structure.
    pub tuple: Vec<Element>,
    pub formula: String,
    pub satisfiers: usize,
    pub orbit: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PrimalityReport {
    pub checked: usize,
    pub mismatches: Vec<PrimalityMismatch>,
}

impl PrimalityReport {
    pub fn clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// For sampled tuples of the right side, writes down a formula meant to
/// isolate the tuple's type and compares its satisfiers with the brute-force
/// automorphism orbit. Sorts are handled separately: automorphisms fix every
/// sort tag, so orbits never leave a sort.
pub fn primality_report(target: PrimalityTarget<'_>, budget: TupleBudget) -> Result<PrimalityReport, CoderError> {
    let (side, sorts) = match target {
        PrimalityTarget::Boxes(p) => (&p.n, p.sorts()),
        PrimalityTarget::Warmup(p) => (&p.n, p.spec.index_cap),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut report = PrimalityReport::default();
    for n in 0..sorts {
        let (s, ids) = extract_sort_with_map(side, &vocab::sort_tag(n))?;
        let ctx: Box<dyn Isolator> = match target {
            PrimalityTarget::Boxes(p) => Box::new(BoxSort::new(&s, p.caps.levels)?),
            PrimalityTarget::Warmup(_) => Box::new(StageSort::new(&s)),
        };
        let mut tuples: Vec<Vec<Element>> = ctx.singletons();
        for _ in 0..budget.samples {
            let k = rng.gen_range(1..=2);
            tuples.push((0..k).map(|_| rng.gen_range(0..s.len() as Element)).collect());
        }
        let eval = Evaluator::new(&s);
        for t in tuples {
            let phi = ctx.formula(&t)?;
            let vars = vars(t.len());
            let sat = eval.satisfiers(&phi, &vars)?;
            let orb = orbit_with(&s, &t, SearchConfig::unbounded())?;
            report.checked += 1;
            if sat != orb {
                report.mismatches.push(PrimalityMismatch {
                    sort: n,
                    tuple: t.iter().map(|&x| ids[x as usize]).collect(),
                    formula: phi.to_string(),
                    satisfiers: sat.len(),
                    orbit: orb.len(),
                });
            }
        }
    }
    Ok(report)
}

fn vars(k: usize) -> Vec<Var> {
    (0..k).map(|i| Var(format!("t{i}"))).collect()
}

trait Isolator {
    fn singletons(&self) -> Vec<Vec<Element>>;
    fn formula(&self, tuple: &[Element]) -> Result<Formula, CoderError>;
}

/// One sort of a stage-coding copy: at most one element carries a stage tag.
struct StageSort {
    len: usize,
    occupied: Option<(String, Element)>,
}

impl StageSort {
    fn new(s: &FiniteStructure) -> Self {
        let occupied = s
            .unary()
            .iter()
            .filter(|(k, _)| vocab::parse_stage(k).is_some())
            .find_map(|(k, rel)| rel.iter().next().map(|&x| (k.clone(), x)));
        StageSort { len: s.len(), occupied }
    }
}

impl Isolator for StageSort {
    fn singletons(&self) -> Vec<Vec<Element>> {
        (0..self.len as Element).map(|x| vec![x]).collect()
    }

    fn formula(&self, tuple: &[Element]) -> Result<Formula, CoderError> {
        let vs = vars(tuple.len());
        let mut parts = Vec::new();
        for (i, &x) in tuple.iter().enumerate() {
            if let Some((u, holder)) = &self.occupied {
                let atom = Formula::rel1(u, vs[i].clone());
                parts.push(if x == *holder { atom } else { Formula::not(atom) });
            }
            for j in 0..i {
                parts.push(if tuple[j] == x {
                    Formula::eq(vs[j].clone(), vs[i].clone())
                } else {
                    Formula::neq(vs[j].clone(), vs[i].clone())
                });
            }
        }
        Ok(Formula::and(parts))
    }
}

/// One sort of a box structure.
struct BoxSort {
    spine: Vec<Element>,
    /// Least E-level of each spine element.
    least: BTreeMap<Element, Option<u32>>,
    /// Largest least E-level: the all-A spine elements are A there.
    top: Option<u32>,
    /// Box node → (owner, level, node index in its box tree).
    place: BTreeMap<Element, (Element, u32, usize)>,
    trees: BTreeMap<(Element, u32), Tree>,
}

impl BoxSort {
    fn new(s: &FiniteStructure, levels: u32) -> Result<Self, CoderError> {
        let oracle = RankOracle::new();
        let spine: Vec<Element> = s.unary_rel(vocab::SPINE).map(|r| r.iter().copied().collect()).unwrap_or_default();
        let mut least = BTreeMap::new();
        let mut place = BTreeMap::new();
        let mut trees = BTreeMap::new();
        for &o in &spine {
            least.insert(o, least_e_level(&oracle, s, o, levels)?);
            for m in 1..=levels {
                let (t, ids) = box_tree(s, o, m)?;
                for (v, &x) in ids.iter().enumerate() {
                    place.insert(x, (o, m, v));
                }
                trees.insert((o, m), t);
            }
        }
        let top = least.values().flatten().copied().max();
        Ok(BoxSort { spine, least, top, place, trees })
    }

    fn box_sentence(&self, owner: &Var, m: u32) -> Result<Formula, CoderError> {
        Ok(relativize_to(&phi_n(m)?, &Scope::Box { owner: owner.clone(), level: m })?)
    }

    /// The spine element `o`, described by where its boxes turn to E.
    fn spine_formula(&self, o: Element, v: &Var) -> Result<Formula, CoderError> {
        let mut parts = vec![Formula::rel1(vocab::SPINE, v.clone())];
        match (self.least[&o], self.top) {
            (Some(m), _) => {
                parts.push(self.box_sentence(v, m)?);
                if m > 1 {
                    parts.push(Formula::not(self.box_sentence(v, m - 1)?));
                }
            }
            (None, Some(top)) => parts.push(Formula::not(self.box_sentence(v, top)?)),
            (None, None) => {}
        }
        Ok(Formula::and(parts))
    }
}

impl Isolator for BoxSort {
    fn singletons(&self) -> Vec<Vec<Element>> {
        self.spine.iter().map(|&x| vec![x]).collect()
    }

    fn formula(&self, tuple: &[Element]) -> Result<Formula, CoderError> {
        let vs = vars(tuple.len());
        let owner_of = |x: Element| self.place.get(&x).map_or(x, |p| p.0);
        // Owners in order of appearance, named by a tuple variable when the
        // owner itself occurs in the tuple.
        let mut owners: Vec<(Element, Var, bool)> = Vec::new();
        for &x in tuple {
            let o = owner_of(x);
            if owners.iter().any(|(p, _, _)| *p == o) {
                continue;
            }
            owners.push(match tuple.iter().position(|&y| y == o) {
                Some(k) => (o, vs[k].clone(), false),
                None => (o, Var(format!("o{}", owners.len())), true),
            });
        }
        let var_of = |o: Element| owners.iter().find(|(p, _, _)| *p == o).expect("listed").1.clone();

        let mut cheap = Vec::new();
        let mut boxes = Vec::new();
        for (k, &x) in tuple.iter().enumerate() {
            match self.place.get(&x) {
                Some(&(o, m, _)) => cheap.push(Formula::rel2(&vocab::box_level(m), var_of(o), vs[k].clone())),
                None if var_of(x) != vs[k] => cheap.push(Formula::eq(var_of(x), vs[k].clone())),
                None => {}
            }
        }
        for (i, (_, a, _)) in owners.iter().enumerate() {
            for (_, b, _) in &owners[..i] {
                cheap.push(Formula::neq(a.clone(), b.clone()));
            }
        }
        // One isolating formula per box that the tuple enters.
        let mut groups: BTreeMap<(Element, u32), Vec<usize>> = BTreeMap::new();
        for (k, &x) in tuple.iter().enumerate() {
            if let Some(&(o, m, _)) = self.place.get(&x) {
                groups.entry((o, m)).or_default().push(k);
            }
        }
        for ((o, m), ks) in groups {
            let nodes: Vec<usize> = ks.iter().map(|&k| self.place[&tuple[k]].2).collect();
            let iso = isolating_formula(&self.trees[&(o, m)], &nodes, m)?;
            let rename = tuple_vars(ks.len()).into_iter().zip(ks.iter().map(|&k| vs[k].clone())).collect();
            let iso = iso.rename_free(&rename)?;
            boxes.push(relativize_to(&iso, &Scope::Box { owner: var_of(o), level: m })?);
        }
        let mut spines = Vec::new();
        for (o, v, _) in &owners {
            spines.push(self.spine_formula(*o, v)?);
        }
        let mut f = Formula::and(cheap.into_iter().chain(boxes).chain(spines));
        for (_, v, fresh) in owners.iter().rev() {
            if *fresh {
                f = Formula::exists(v.clone(), f);
            }
        }
        Ok(f)
    }
}
