use std::collections::{BTreeSet, HashMap};

use super::LogicError;
use crate::model::{brute_cap, Element, FiniteStructure, ModelError, RelIndex};

/// Resource limits for the game search.
#[derive(Clone, Copy, Debug)]
pub struct EfLimits {
    /// Bound on `|a| + |b|`.
    pub size_cap: usize,
    /// Bound on memoised positions.
    pub state_cap: usize,
}

impl Default for EfLimits {
    fn default() -> Self {
        EfLimits { size_cap: brute_cap(), state_cap: 2_000_000 }
    }
}

/// Does Duplicator win the `k`-round Ehrenfeucht–Fraïssé game on `a`, `b`?
pub fn ef_equivalent(a: &FiniteStructure, b: &FiniteStructure, k: usize) -> Result<bool, LogicError> {
    ef_equivalent_with(a, b, k, EfLimits::default())
}

pub fn ef_equivalent_with(a: &FiniteStructure, b: &FiniteStructure, k: usize, limits: EfLimits) -> Result<bool, LogicError> {
    let size = a.len() + b.len();
    if size > limits.size_cap {
        return Err(LogicError::Model(ModelError::TooLarge { size, cap: limits.size_cap }));
    }
    let unary: Vec<String> = a.unary().keys().chain(b.unary().keys()).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let binary: Vec<String> =
        a.binary().keys().chain(b.binary().keys()).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let game = Game {
        a: RelIndex::with_names(a, &unary, &binary),
        b: RelIndex::with_names(b, &unary, &binary),
        memo: HashMap::new(),
        state_cap: limits.state_cap,
    };
    game.solve(k)
}

struct Game {
    a: RelIndex,
    b: RelIndex,
    memo: HashMap<(usize, Vec<(Element, Element)>), bool>,
    state_cap: usize,
}

impl Game {
    fn solve(mut self, k: usize) -> Result<bool, LogicError> {
        self.win(&mut Vec::new(), k)
    }

    /// Would adding `(x, y)` keep `pairs` a partial isomorphism?
    fn consistent(&self, pairs: &[(Element, Element)], x: Element, y: Element) -> bool {
        let (a, b) = (&self.a, &self.b);
        if (0..a.unary_bits.len()).any(|r| a.unary_bits[r][x as usize] != b.unary_bits[r][y as usize]) {
            return false;
        }
        for r in 0..a.out.len() {
            if a.has2(r, x, x) != b.has2(r, y, y) {
                return false;
            }
            for &(x2, y2) in pairs {
                if (x == x2) != (y == y2) || a.has2(r, x, x2) != b.has2(r, y, y2) || a.has2(r, x2, x) != b.has2(r, y2, y) {
                    return false;
                }
            }
        }
        if a.out.is_empty() && pairs.iter().any(|&(x2, y2)| (x == x2) != (y == y2)) {
            return false;
        }
        true
    }

    fn win(&mut self, pairs: &mut Vec<(Element, Element)>, rounds: usize) -> Result<bool, LogicError> {
        if rounds == 0 {
            return Ok(true);
        }
        let mut key_pairs = pairs.clone();
        key_pairs.sort_unstable();
        key_pairs.dedup();
        let key = (rounds, key_pairs);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        if self.memo.len() >= self.state_cap {
            return Err(LogicError::ResourceCap { states: self.state_cap });
        }
        let result = self.spoiler_fails(pairs, rounds, true)? && self.spoiler_fails(pairs, rounds, false)?;
        self.memo.insert(key, result);
        Ok(result)
    }

    /// Does every Spoiler move on one side have a winning answer?
    fn spoiler_fails(&mut self, pairs: &mut Vec<(Element, Element)>, rounds: usize, left: bool) -> Result<bool, LogicError> {
        let (n_move, n_answer) = if left { (self.a.size, self.b.size) } else { (self.b.size, self.a.size) };
        for m in 0..n_move as Element {
            if pairs.iter().any(|&(x, y)| if left { x == m } else { y == m }) {
                continue;
            }
            let mut answered = false;
            for r in 0..n_answer as Element {
                let (x, y) = if left { (m, r) } else { (r, m) };
                if !self.consistent(pairs, x, y) {
                    continue;
                }
                pairs.push((x, y));
                let ok = self.win(pairs, rounds - 1);
                pairs.pop();
                if ok? {
                    answered = true;
                    break;
                }
            }
            if !answered {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Tree;

    fn star(leaves: usize) -> FiniteStructure {
        let mut parent = vec![None];
        parent.extend(std::iter::repeat_n(Some(0), leaves));
        Tree::from_parents(parent).unwrap().to_structure()
    }

    #[test]
    fn self_equivalent() {
        let s = star(3);
        for k in 0..4 {
            assert!(ef_equivalent(&s, &s, k).unwrap());
        }
    }

    #[test]
    fn spoiler_picks_a_leaf() {
        assert!(!ef_equivalent(&star(0), &star(2), 1).unwrap());
    }

    #[test]
    fn three_rounds_cannot_count_past_three_leaves() {
        assert!(ef_equivalent(&star(3), &star(5), 3).unwrap());
        assert!(!ef_equivalent(&star(2), &star(3), 4).unwrap());
    }

    #[test]
    fn size_cap_is_enforced() {
        let limits = EfLimits { size_cap: 5, state_cap: 10 };
        assert!(matches!(
            ef_equivalent_with(&star(3), &star(3), 1, limits),
            Err(LogicError::Model(ModelError::TooLarge { .. }))
        ));
    }
}
