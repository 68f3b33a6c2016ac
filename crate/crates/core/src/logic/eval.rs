use std::collections::{BTreeMap, BTreeSet};

use super::{Formula, LogicError, Var};
use crate::model::{Element, FiniteStructure, RelIndex};

/// Values for the free variables of a formula.
pub type Assignment = BTreeMap<Var, Element>;

type Slot = usize;

#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    Eq(Slot, Slot),
    Un(usize, Slot),
    Bin(usize, Slot, Slot),
    Below(Slot, Slot, u32),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Exists(Slot, Guard, Box<Node>),
    Forall(Slot, Guard, Box<Node>),
}

/// Where a quantified variable's candidates come from. Every guard yields a
/// superset of the elements for which the guarding atom holds.
#[derive(Debug, Clone, Copy)]
enum Guard {
    All,
    Equal(Slot),
    Out(usize, Slot),
    In(usize, Slot),
    Unary(usize),
    Desc(Slot, u32),
    Anc(Slot, u32),
}

/// Formula evaluator over one structure. Builds the relation index once.
pub struct Evaluator<'s> {
    s: &'s FiniteStructure,
    idx: RelIndex,
    fan: Fan,
}

/// Average out- and in-degree of each binary relation over the elements
/// where it is nonzero, for estimating guard sizes.
struct Fan {
    out: Vec<usize>,
    inn: Vec<usize>,
}

impl Fan {
    fn new(idx: &RelIndex) -> Self {
        let avg = |lists: &Vec<Vec<Element>>| {
            let (total, nonzero) = lists.iter().fold((0, 0), |(t, z), l| (t + l.len(), z + usize::from(!l.is_empty())));
            total.div_ceil(nonzero.max(1))
        };
        Fan { out: idx.out.iter().map(avg).collect(), inn: idx.inn.iter().map(avg).collect() }
    }

    /// Sort key: smaller means fewer candidates.
    fn cost(&self, idx: &RelIndex, g: Guard) -> (u8, usize) {
        match g {
            Guard::Equal(_) => (0, 1),
            Guard::Out(r, _) => (1, self.out[r]),
            Guard::In(r, _) => (1, self.inn[r]),
            Guard::Anc(_, d) => (1, d as usize + 1),
            Guard::Unary(r) => (1, idx.unary_members[r].len()),
            Guard::Desc(..) => (2, 0),
            Guard::All => (3, 0),
        }
    }
}

struct Compiler<'a> {
    idx: &'a RelIndex,
    fan: &'a Fan,
    scope: Vec<(Var, Slot)>,
    next: Slot,
}

impl Compiler<'_> {
    fn slot(&self, v: &Var) -> Result<Slot, LogicError> {
        self.scope
            .iter()
            .rev()
            .find(|(w, _)| w == v)
            .map(|&(_, s)| s)
            .ok_or_else(|| LogicError::UnboundVariable(v.clone()))
    }

    fn compile(&mut self, f: &Formula) -> Result<Node, LogicError> {
        Ok(match f {
            Formula::True => Node::Const(true),
            Formula::False => Node::Const(false),
            Formula::Eq { left, right } => Node::Eq(self.slot(left)?, self.slot(right)?),
            Formula::Rel { name, args } => match args.len() {
                1 => {
                    let r = self.idx.unary_id(name).ok_or_else(|| self.unknown(name, 1))?;
                    Node::Un(r, self.slot(&args[0])?)
                }
                2 => {
                    let r = self.idx.binary_id(name).ok_or_else(|| self.unknown(name, 2))?;
                    Node::Bin(r, self.slot(&args[0])?, self.slot(&args[1])?)
                }
                k => return Err(LogicError::Arity { name: name.clone(), arity: k }),
            },
            Formula::Below { anchor, node, depth } => Node::Below(self.slot(anchor)?, self.slot(node)?, *depth),
            Formula::Not(g) => Node::Not(Box::new(self.compile(g)?)),
            Formula::And(gs) => Node::And(atoms_first(gs.iter().map(|g| self.compile(g)).collect::<Result<_, _>>()?)),
            Formula::Or(gs) => Node::Or(atoms_first(gs.iter().map(|g| self.compile(g)).collect::<Result<_, _>>()?)),
            Formula::Exists { var, body } | Formula::Forall { var, body } => {
                let z = self.next;
                self.next += 1;
                self.scope.push((var.clone(), z));
                let body = self.compile(body)?;
                self.scope.pop();
                if matches!(f, Formula::Exists { .. }) {
                    let guard = pick_guard(self.idx, self.fan, conjuncts(&body), z, |s| s != z);
                    Node::Exists(z, guard, Box::new(body))
                } else {
                    let negs: Vec<&Node> = disjuncts(&body)
                        .into_iter()
                        .filter_map(|d| match d {
                            Node::Not(inner) => Some(&**inner),
                            _ => None,
                        })
                        .collect();
                    let guard = pick_guard(self.idx, self.fan, negs, z, |s| s != z);
                    Node::Forall(z, guard, Box::new(body))
                }
            }
        })
    }

    fn unknown(&self, name: &str, arity: usize) -> LogicError {
        let other = if arity == 1 { self.idx.binary_id(name) } else { self.idx.unary_id(name) };
        if other.is_some() {
            LogicError::Arity { name: name.to_string(), arity }
        } else {
            LogicError::UnknownRelation(name.to_string())
        }
    }
}

fn conjuncts(n: &Node) -> Vec<&Node> {
    match n {
        Node::And(parts) => parts.iter().collect(),
        other => vec![other],
    }
}

fn disjuncts(n: &Node) -> Vec<&Node> {
    match n {
        Node::Or(parts) => parts.iter().collect(),
        other => vec![other],
    }
}

/// Search plan for [`Evaluator::satisfiers`].
struct Plan<'n> {
    parts: Vec<&'n Node>,
    order: Vec<(Slot, Guard)>,
    /// Conjuncts whose last variable is bound at each depth.
    checks: Vec<Vec<usize>>,
    /// Per slot, the elements passing that slot's own conjuncts.
    allowed: Vec<Option<Vec<bool>>>,
    k: usize,
    last_free: Option<usize>,
}

/// Cheap tests go first; `And` and `Or` short-circuit left to right.
fn atoms_first(mut parts: Vec<Node>) -> Vec<Node> {
    parts.sort_by_key(|p| !matches!(p, Node::Const(_) | Node::Eq(..) | Node::Un(..) | Node::Bin(..) | Node::Below(..)));
    parts
}

/// Slots a node reads that it does not bind itself.
fn free_slots(n: &Node) -> BTreeSet<Slot> {
    let mut out = BTreeSet::new();
    let guard_slots = |g: &Guard, out: &mut BTreeSet<Slot>| match *g {
        Guard::Equal(p) | Guard::Out(_, p) | Guard::In(_, p) | Guard::Desc(p, _) | Guard::Anc(p, _) => {
            out.insert(p);
        }
        Guard::All | Guard::Unary(_) => {}
    };
    match n {
        Node::Const(_) => {}
        Node::Eq(p, q) | Node::Bin(_, p, q) | Node::Below(p, q, _) => {
            out.insert(*p);
            out.insert(*q);
        }
        Node::Un(_, p) => {
            out.insert(*p);
        }
        Node::Not(g) => out = free_slots(g),
        Node::And(gs) | Node::Or(gs) => gs.iter().for_each(|g| out.extend(free_slots(g))),
        Node::Exists(z, g, body) | Node::Forall(z, g, body) => {
            out = free_slots(body);
            guard_slots(g, &mut out);
            out.remove(z);
        }
    }
    out
}

/// Most selective atom among `atoms` that pins `z` given the already-fixed slots.
fn pick_guard(idx: &RelIndex, fan: &Fan, atoms: Vec<&Node>, z: Slot, fixed: impl Fn(Slot) -> bool) -> Guard {
    let mut best = Guard::All;
    for a in atoms {
        let cand = match *a {
            Node::Eq(p, q) if p == z && q != z && fixed(q) => Guard::Equal(q),
            Node::Eq(p, q) if q == z && p != z && fixed(p) => Guard::Equal(p),
            Node::Bin(r, p, q) if q == z && p != z && fixed(p) => Guard::Out(r, p),
            Node::Bin(r, p, q) if p == z && q != z && fixed(q) => Guard::In(r, q),
            Node::Un(r, p) if p == z => Guard::Unary(r),
            Node::Below(p, q, d) if q == z && p != z && fixed(p) => Guard::Desc(p, d),
            Node::Below(p, q, d) if p == z && q != z && fixed(q) => Guard::Anc(q, d),
            _ => continue,
        };
        if fan.cost(idx, cand) < fan.cost(idx, best) {
            best = cand;
        }
    }
    best
}

impl<'s> Evaluator<'s> {
    pub fn new(s: &'s FiniteStructure) -> Self {
        let idx = RelIndex::new(s);
        Evaluator { s, fan: Fan::new(&idx), idx }
    }

    pub fn structure(&self) -> &FiniteStructure {
        self.s
    }

    fn compile(&self, phi: &Formula, free: &[Var]) -> Result<(Node, usize), LogicError> {
        let mut c = Compiler {
            idx: &self.idx,
            fan: &self.fan,
            scope: free.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect(),
            next: free.len(),
        };
        let node = c.compile(phi)?;
        Ok((node, c.next))
    }

    pub fn eval(&self, phi: &Formula, a: &Assignment) -> Result<bool, LogicError> {
        let free: Vec<Var> = phi.free_vars().into_iter().collect();
        let mut env = Vec::with_capacity(free.len());
        for v in &free {
            let x = *a.get(v).ok_or_else(|| LogicError::UnboundVariable(v.clone()))?;
            if !self.s.contains(x) {
                return Err(LogicError::Model(crate::model::ModelError::UnknownElement(x)));
            }
            env.push(x);
        }
        let (node, slots) = self.compile(phi, &free)?;
        env.resize(slots, 0);
        Ok(self.run(&node, &mut env))
    }

    pub fn eval_closed(&self, phi: &Formula) -> Result<bool, LogicError> {
        self.eval(phi, &Assignment::new())
    }

    /// All tuples over `vars` (in that order) satisfying `phi`. Variables of
    /// `vars` not free in `phi` range over the whole universe.
    ///
    /// Leading existential quantifiers join the search and are projected away.
    /// Variables are visited in a guard-driven order and every top-level
    /// conjunct is checked as soon as its variables are bound.
    pub fn satisfiers(&self, phi: &Formula, vars: &[Var]) -> Result<BTreeSet<Vec<Element>>, LogicError> {
        for v in phi.free_vars() {
            if !vars.contains(&v) {
                return Err(LogicError::UnboundVariable(v));
            }
        }
        let (node, slots) = self.compile(phi, vars)?;
        let k = vars.len();
        let mut body = &node;
        let mut hidden = Vec::new();
        while let Node::Exists(z, _, inner) = body {
            hidden.push(*z);
            body = inner;
        }
        let parts = conjuncts(body);
        let deps: Vec<BTreeSet<Slot>> = parts.iter().map(|p| free_slots(p)).collect();

        let mut pending: Vec<Slot> = (0..k).chain(hidden).collect();
        let mut bound = BTreeSet::new();
        let mut order = Vec::new();
        while !pending.is_empty() {
            let (pos, guard) = pending
                .iter()
                .enumerate()
                .map(|(pos, &z)| (pos, pick_guard(&self.idx, &self.fan, parts.clone(), z, |s| bound.contains(&s))))
                .min_by_key(|&(pos, g)| (self.fan.cost(&self.idx, g), pos))
                .expect("nonempty");
            let z = pending.remove(pos);
            bound.insert(z);
            order.push((z, guard));
        }
        let mut checks: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
        let mut env = vec![0; slots.max(k)];
        // Conjuncts about a single variable become a precomputed filter.
        let mut allowed: Vec<Option<Vec<bool>>> = vec![None; env.len()];
        for &(z, _) in &order {
            let own: Vec<usize> = (0..parts.len()).filter(|&c| deps[c].len() == 1 && deps[c].contains(&z)).collect();
            if own.is_empty() {
                continue;
            }
            let base = match pick_guard(&self.idx, &self.fan, parts.clone(), z, |_| false) {
                Guard::Unary(r) => self.idx.unary_members[r].clone(),
                _ => self.s.universe().to_vec(),
            };
            let mut ok = vec![false; self.s.len()];
            for x in base {
                env[z] = x;
                ok[x as usize] = own.iter().all(|&c| self.run(parts[c], &mut env));
            }
            allowed[z] = Some(ok);
        }
        for (c, d) in deps.iter().enumerate() {
            if d.len() == 1 && allowed[*d.iter().next().expect("one slot")].is_some() {
                continue;
            }
            match order.iter().rposition(|(z, _)| d.contains(z)) {
                Some(depth) => checks[depth].push(c),
                None => {
                    if !self.run(parts[c], &mut env) {
                        return Ok(BTreeSet::new());
                    }
                }
            }
        }
        let last_free = order.iter().rposition(|&(z, _)| z < k);
        let plan = Plan { parts, order, checks, allowed, k, last_free };
        let mut out = BTreeSet::new();
        self.search(&plan, 0, &mut env, &mut out);
        Ok(out)
    }

    fn search(&self, plan: &Plan<'_>, depth: usize, env: &mut Vec<Element>, out: &mut BTreeSet<Vec<Element>>) -> bool {
        if depth == plan.order.len() {
            out.insert(env[..plan.k].to_vec());
            return true;
        }
        let (z, g) = plan.order[depth];
        // Once every free slot is bound, one witness is enough.
        let settled = plan.last_free.is_none_or(|l| depth > l);
        let mut found = false;
        for x in self.candidates(g, env) {
            if plan.allowed[z].as_ref().is_some_and(|ok| !ok[x as usize]) {
                continue;
            }
            env[z] = x;
            if plan.checks[depth].iter().all(|&c| self.run(plan.parts[c], env)) && self.search(plan, depth + 1, env, out) {
                found = true;
                if settled {
                    return true;
                }
            }
        }
        found
    }

    fn candidates(&self, g: Guard, env: &[Element]) -> Vec<Element> {
        match g {
            Guard::All => self.s.universe().to_vec(),
            Guard::Equal(p) => vec![env[p]],
            Guard::Out(r, p) => self.idx.out[r][env[p] as usize].clone(),
            Guard::In(r, q) => self.idx.inn[r][env[q] as usize].clone(),
            Guard::Unary(r) => self.idx.unary_members[r].clone(),
            Guard::Desc(p, d) => self.idx.descendants(env[p], d),
            Guard::Anc(q, d) => {
                let mut out = vec![env[q]];
                if let Some(e) = self.idx.edge {
                    let mut cur = env[q];
                    for _ in 0..d {
                        match self.idx.inn[e][cur as usize].first() {
                            Some(&p) => {
                                out.push(p);
                                cur = p;
                            }
                            None => break,
                        }
                    }
                }
                out
            }
        }
    }

    fn run(&self, node: &Node, env: &mut Vec<Element>) -> bool {
        match node {
            Node::Const(b) => *b,
            Node::Eq(p, q) => env[*p] == env[*q],
            Node::Un(r, p) => self.idx.unary_bits[*r][env[*p] as usize],
            Node::Bin(r, p, q) => self.idx.has2(*r, env[*p], env[*q]),
            Node::Below(p, q, d) => self.idx.below(env[*p], env[*q], *d),
            Node::Not(g) => !self.run(g, env),
            Node::And(gs) => gs.iter().all(|g| self.run(g, env)),
            Node::Or(gs) => gs.iter().any(|g| self.run(g, env)),
            Node::Exists(z, g, body) => {
                for x in self.candidates(*g, env) {
                    env[*z] = x;
                    if self.run(body, env) {
                        return true;
                    }
                }
                false
            }
            Node::Forall(z, g, body) => {
                for x in self.candidates(*g, env) {
                    env[*z] = x;
                    if !self.run(body, env) {
                        return false;
                    }
                }
                true
            }
        }
    }
}

/// Tarskian truth of `phi` in `s` under `a`.
pub fn eval(phi: &Formula, s: &FiniteStructure, a: &Assignment) -> Result<bool, LogicError> {
    Evaluator::new(s).eval(phi, a)
}

/// Satisfying tuples of `phi` over `vars`.
pub fn satisfiers(phi: &Formula, s: &FiniteStructure, vars: &[Var]) -> Result<BTreeSet<Vec<Element>>, LogicError> {
    Evaluator::new(s).satisfiers(phi, vars)
}

/// Builds an assignment from `(variable, element)` pairs.
pub fn assign<'a>(pairs: impl IntoIterator<Item = (&'a str, Element)>) -> Assignment {
    pairs.into_iter().map(|(v, x)| (Var::from(v), x)).collect()
}
