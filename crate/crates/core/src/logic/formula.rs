use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Element variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(pub String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var(s.to_string())
    }
}

/// First-order formula over unary and binary relation symbols.
///
/// `Below { anchor, node, depth }` is the bounded-descendant shorthand: `node`
/// is reachable from `anchor` by at most `depth` `Edge` steps. It is an atom,
/// so it does not add to quantifier rank; [`Formula::expand_below`] unfolds it
/// into plain `Edge` and equality atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Formula {
    True,
    False,
    Eq { left: Var, right: Var },
    Rel { name: String, args: Vec<Var> },
    Below { anchor: Var, node: Var, depth: u32 },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists { var: Var, body: Box<Formula> },
    Forall { var: Var, body: Box<Formula> },
}

impl Formula {
    pub fn eq(a: impl Into<Var>, b: impl Into<Var>) -> Self {
        Formula::Eq { left: a.into(), right: b.into() }
    }

    pub fn neq(a: impl Into<Var>, b: impl Into<Var>) -> Self {
        Formula::not(Formula::eq(a, b))
    }

    pub fn rel1(name: &str, a: impl Into<Var>) -> Self {
        Formula::Rel { name: name.to_string(), args: vec![a.into()] }
    }

    pub fn rel2(name: &str, a: impl Into<Var>, b: impl Into<Var>) -> Self {
        Formula::Rel { name: name.to_string(), args: vec![a.into(), b.into()] }
    }

    pub fn below(anchor: impl Into<Var>, node: impl Into<Var>, depth: u32) -> Self {
        Formula::Below { anchor: anchor.into(), node: node.into(), depth }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Conjunction, flattening nested conjunctions and dropping `True`.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        if out.len() == 1 {
            out.pop().expect("one element")
        } else {
            Formula::And(out)
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        if out.len() == 1 {
            out.pop().expect("one element")
        } else {
            Formula::Or(out)
        }
    }

    pub fn exists(v: impl Into<Var>, body: Formula) -> Self {
        Formula::Exists { var: v.into(), body: Box::new(body) }
    }

    pub fn forall(v: impl Into<Var>, body: Formula) -> Self {
        Formula::Forall { var: v.into(), body: Box::new(body) }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut note = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq { left, right } => {
                note(left, bound);
                note(right, bound);
            }
            Formula::Rel { args, .. } => args.iter().for_each(|a| note(a, bound)),
            Formula::Below { anchor, node, .. } => {
                note(anchor, bound);
                note(node, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Exists { var, body } | Formula::Forall { var, body } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Renames free variables by `map`. Fails if a new name is bound inside.
    pub fn rename_free(&self, map: &BTreeMap<Var, Var>) -> Result<Formula, super::LogicError> {
        let bound = self.bound_vars();
        if let Some(v) = map.values().find(|v| bound.contains(v)) {
            return Err(super::LogicError::VariableCapture(v.clone()));
        }
        Ok(self.rename_rec(map, &mut Vec::new()))
    }

    fn rename_rec(&self, map: &BTreeMap<Var, Var>, bound: &mut Vec<Var>) -> Formula {
        let r = |v: &Var, bound: &Vec<Var>| match map.get(v) {
            Some(n) if !bound.contains(v) => n.clone(),
            _ => v.clone(),
        };
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq { left, right } => Formula::Eq { left: r(left, bound), right: r(right, bound) },
            Formula::Rel { name, args } => Formula::Rel {
                name: name.clone(),
                args: args.iter().map(|a| r(a, bound)).collect(),
            },
            Formula::Below { anchor, node, depth } => Formula::Below {
                anchor: r(anchor, bound),
                node: r(node, bound),
                depth: *depth,
            },
            Formula::Not(f) => Formula::Not(Box::new(f.rename_rec(map, bound))),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.rename_rec(map, bound)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.rename_rec(map, bound)).collect()),
            Formula::Exists { var, body } | Formula::Forall { var, body } => {
                bound.push(var.clone());
                let body = Box::new(body.rename_rec(map, bound));
                bound.pop();
                match self {
                    Formula::Exists { .. } => Formula::Exists { var: var.clone(), body },
                    _ => Formula::Forall { var: var.clone(), body },
                }
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Variables bound by some quantifier inside the formula.
    pub fn bound_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Exists { var, .. } | Formula::Forall { var, .. } = f {
                out.insert(var.clone());
            }
        });
        out
    }

    /// Every variable occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = self.bound_vars();
        out.extend(self.free_vars());
        out
    }

    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(g) => g.visit(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit(f)),
            Formula::Exists { body, .. } | Formula::Forall { body, .. } => body.visit(f),
            _ => {}
        }
    }

    /// Nesting depth of quantifiers.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::quantifier_rank).max().unwrap_or(0),
            Formula::Exists { body, .. } | Formula::Forall { body, .. } => 1 + body.quantifier_rank(),
            _ => 0,
        }
    }

    /// Total number of quantifier occurrences.
    pub fn quantifier_count(&self) -> usize {
        let mut k = 0;
        self.visit(&mut |f| {
            if matches!(f, Formula::Exists { .. } | Formula::Forall { .. }) {
                k += 1;
            }
        });
        k
    }

    /// Relation symbols used, with their arities.
    pub fn relations(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Rel { name, args } => {
                out.insert((name.clone(), args.len()));
            }
            Formula::Below { .. } => {
                out.insert((crate::vocab::EDGE.to_string(), 2));
            }
            _ => {}
        });
        out
    }

    /// Unfolds every `Below` atom into a disjunction over `Edge` paths of
    /// length `0..=depth`, introducing fresh intermediate variables.
    pub fn expand_below(&self) -> Formula {
        let mut counter = 0usize;
        let taken = self.all_vars();
        self.expand_rec(&taken, &mut counter)
    }

    fn expand_rec(&self, taken: &BTreeSet<Var>, counter: &mut usize) -> Formula {
        match self {
            Formula::Below { anchor, node, depth } => {
                let mut alts = vec![Formula::eq(node.clone(), anchor.clone())];
                for len in 1..=*depth {
                    alts.push(edge_path(anchor, node, len, taken, counter));
                }
                Formula::or(alts)
            }
            Formula::Not(f) => Formula::not(f.expand_rec(taken, counter)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.expand_rec(taken, counter)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.expand_rec(taken, counter)).collect()),
            Formula::Exists { var, body } => Formula::exists(var.clone(), body.expand_rec(taken, counter)),
            Formula::Forall { var, body } => Formula::forall(var.clone(), body.expand_rec(taken, counter)),
            other => other.clone(),
        }
    }
}

fn edge_path(from: &Var, to: &Var, len: u32, taken: &BTreeSet<Var>, counter: &mut usize) -> Formula {
    use crate::vocab::EDGE;
    if len == 1 {
        return Formula::rel2(EDGE, from.clone(), to.clone());
    }
    let mid = loop {
        let v = Var(format!("p{}", *counter));
        *counter += 1;
        if !taken.contains(&v) {
            break v;
        }
    };
    let rest = edge_path(&mid, to, len - 1, taken, counter);
    Formula::exists(mid.clone(), Formula::and([Formula::rel2(EDGE, from.clone(), mid), rest]))
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Eq { left, right } => write!(f, "(= {left} {right})"),
            Formula::Rel { name, args } => {
                write!(f, "({name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Formula::Below { anchor, node, depth } => write!(f, "(below {anchor} {node} {depth})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) | Formula::Or(gs) => {
                f.write_str(if matches!(self, Formula::And(_)) { "(and" } else { "(or" })?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                f.write_str(")")
            }
            Formula::Exists { var, body } => write!(f, "(exists {var} {body})"),
            Formula::Forall { var, body } => write!(f, "(forall {var} {body})"),
        }
    }
}
