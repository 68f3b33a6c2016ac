use std::collections::{BTreeSet, HashSet};

use super::{Evaluator, Formula, LogicError, Var};
use crate::model::{Element, FiniteStructure};

/// Relation symbols a corpus may use.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub unary: Vec<String>,
    pub binary: Vec<String>,
}

impl Vocabulary {
    /// Union of the relation names of `structures`.
    pub fn of(structures: &[&FiniteStructure]) -> Self {
        let mut unary = BTreeSet::new();
        let mut binary = BTreeSet::new();
        for s in structures {
            unary.extend(s.unary().keys().cloned());
            binary.extend(s.binary().keys().cloned());
        }
        Vocabulary { unary: unary.into_iter().collect(), binary: binary.into_iter().collect() }
    }
}

/// Corpus generation bounds.
#[derive(Clone, Copy, Debug)]
pub struct CorpusConfig {
    pub max_rank: usize,
    /// Distinct formulas kept per (free variable count, rank) level.
    pub per_level: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig { max_rank: 2, per_level: 48 }
    }
}

/// Closed formulas up to `max_rank` over `vocab`, enumerated bottom-up and
/// de-duplicated by their truth values on `pool`.
///
/// Level `(j, r)` holds formulas whose free variables are among `v0..v{j-1}`
/// with rank at most `r`. Rank 0 is literals and their binary Boolean
/// combinations; rank `r + 1` adds `∃v{j}` and `∀v{j}` over level `(j + 1, r)`
/// and Boolean combinations of the results. Each level is closed under
/// negation up to the cap. Every structure in `pool` must interpret `vocab`.
pub fn formula_corpus(vocab: &Vocabulary, pool: &[&FiniteStructure], cfg: CorpusConfig) -> Result<Vec<Formula>, LogicError> {
    let evals: Vec<Evaluator> = pool.iter().map(|s| Evaluator::new(s)).collect();
    let mut g = Gen { vocab, evals, cap: cfg.per_level };
    let top = g.level(0, cfg.max_rank)?;
    Ok(top.into_iter().map(|(f, _)| f).collect())
}

type Signature = Vec<BTreeSet<Vec<Element>>>;

struct Gen<'a> {
    vocab: &'a Vocabulary,
    evals: Vec<Evaluator<'a>>,
    cap: usize,
}

struct Level {
    vars: Vec<Var>,
    seen: HashSet<Signature>,
    items: Vec<(Formula, Signature)>,
}

fn var(i: usize) -> Var {
    Var(format!("v{i}"))
}

impl Gen<'_> {
    fn signature(&self, f: &Formula, vars: &[Var]) -> Result<Signature, LogicError> {
        self.evals.iter().map(|e| e.satisfiers(f, vars)).collect()
    }

    fn offer(&self, lvl: &mut Level, f: Formula) -> Result<bool, LogicError> {
        if lvl.items.len() >= self.cap {
            return Ok(false);
        }
        let sig = self.signature(&f, &lvl.vars)?;
        if lvl.seen.insert(sig.clone()) {
            lvl.items.push((f, sig));
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn offer_with_negation(&self, lvl: &mut Level, f: Formula) -> Result<(), LogicError> {
        if self.offer(lvl, f.clone())? {
            self.offer(lvl, Formula::not(f))?;
        }
        Ok(())
    }

    fn combine(&self, lvl: &mut Level, from: usize) -> Result<(), LogicError> {
        let base: Vec<Formula> = lvl.items.iter().map(|(f, _)| f.clone()).collect();
        'outer: for i in from..base.len() {
            for j in 0..i {
                if lvl.items.len() >= self.cap {
                    break 'outer;
                }
                self.offer_with_negation(lvl, Formula::And(vec![base[j].clone(), base[i].clone()]))?;
                self.offer_with_negation(lvl, Formula::Or(vec![base[j].clone(), base[i].clone()]))?;
            }
        }
        Ok(())
    }

    fn level(&mut self, j: usize, r: usize) -> Result<Vec<(Formula, Signature)>, LogicError> {
        let mut lvl = Level { vars: (0..j).map(var).collect(), seen: HashSet::new(), items: Vec::new() };
        self.offer_with_negation(&mut lvl, Formula::True)?;
        if r == 0 {
            for a in 0..j {
                for b in a + 1..j {
                    self.offer_with_negation(&mut lvl, Formula::eq(var(a), var(b)))?;
                }
                for u in &self.vocab.unary {
                    self.offer_with_negation(&mut lvl, Formula::rel1(u, var(a)))?;
                }
                for b in 0..j {
                    for e in &self.vocab.binary {
                        self.offer_with_negation(&mut lvl, Formula::rel2(e, var(a), var(b)))?;
                    }
                }
            }
            self.combine(&mut lvl, 0)?;
            return Ok(lvl.items);
        }
        let lower = self.level(j, r - 1)?;
        for (f, _) in lower {
            self.offer(&mut lvl, f)?;
        }
        let start = lvl.items.len();
        for (body, _) in self.level(j + 1, r - 1)? {
            if !body.free_vars().contains(&var(j)) {
                continue;
            }
            self.offer(&mut lvl, Formula::exists(var(j), body.clone()))?;
            self.offer(&mut lvl, Formula::forall(var(j), body))?;
        }
        self.combine(&mut lvl, start)?;
        Ok(lvl.items)
    }
}
