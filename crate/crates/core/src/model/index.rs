use super::{Element, FiniteStructure};
use crate::vocab;

/// Adjacency index over a structure for a fixed list of relation names.
/// Relation names absent from the structure index as empty.
#[derive(Debug, Clone)]
pub struct RelIndex {
    pub size: usize,
    pub unary_names: Vec<String>,
    pub binary_names: Vec<String>,
    /// `unary_bits[r][x]`
    pub unary_bits: Vec<Vec<bool>>,
    pub unary_members: Vec<Vec<Element>>,
    /// `out[r][x]` sorted targets, `inn[r][y]` sorted sources.
    pub out: Vec<Vec<Vec<Element>>>,
    pub inn: Vec<Vec<Vec<Element>>>,
    pub edge: Option<usize>,
}

impl RelIndex {
    pub fn new(s: &FiniteStructure) -> Self {
        let unary: Vec<String> = s.unary().keys().cloned().collect();
        let binary: Vec<String> = s.binary().keys().cloned().collect();
        Self::with_names(s, &unary, &binary)
    }

    pub fn with_names(s: &FiniteStructure, unary_names: &[String], binary_names: &[String]) -> Self {
        let n = s.len();
        let mut unary_bits = Vec::with_capacity(unary_names.len());
        let mut unary_members = Vec::with_capacity(unary_names.len());
        for name in unary_names {
            let mut bits = vec![false; n];
            let mut members = Vec::new();
            if let Some(rel) = s.unary_rel(name) {
                for &x in rel {
                    bits[x as usize] = true;
                    members.push(x);
                }
            }
            unary_bits.push(bits);
            unary_members.push(members);
        }
        let mut out = Vec::with_capacity(binary_names.len());
        let mut inn = Vec::with_capacity(binary_names.len());
        for name in binary_names {
            let mut o = vec![Vec::new(); n];
            let mut i = vec![Vec::new(); n];
            if let Some(rel) = s.binary_rel(name) {
                for &(x, y) in rel {
                    o[x as usize].push(y);
                    i[y as usize].push(x);
                }
            }
            out.push(o);
            inn.push(i);
        }
        let edge = binary_names.iter().position(|b| b == vocab::EDGE);
        RelIndex {
            size: n,
            unary_names: unary_names.to_vec(),
            binary_names: binary_names.to_vec(),
            unary_bits,
            unary_members,
            out,
            inn,
            edge,
        }
    }

    pub fn unary_id(&self, name: &str) -> Option<usize> {
        self.unary_names.iter().position(|n| n == name)
    }

    pub fn binary_id(&self, name: &str) -> Option<usize> {
        self.binary_names.iter().position(|n| n == name)
    }

    #[inline]
    pub fn has2(&self, r: usize, x: Element, y: Element) -> bool {
        self.out[r][x as usize].binary_search(&y).is_ok()
    }

    /// Is `z` reachable from `a` by at most `depth` `Edge` steps?
    pub fn below(&self, a: Element, z: Element, depth: u32) -> bool {
        if a == z {
            return true;
        }
        let Some(e) = self.edge else { return false };
        // Walk up from z: parents are unique in a forest.
        let mut cur = z;
        for _ in 0..depth {
            match self.inn[e][cur as usize].first() {
                Some(&p) if p == a => return true,
                Some(&p) => cur = p,
                None => return false,
            }
        }
        false
    }

    /// Elements reachable from `a` in at most `depth` `Edge` steps, `a` first.
    pub fn descendants(&self, a: Element, depth: u32) -> Vec<Element> {
        let mut out = vec![a];
        let Some(e) = self.edge else { return out };
        let mut frontier = vec![a];
        for _ in 0..depth {
            let mut next = Vec::new();
            for x in frontier {
                next.extend_from_slice(&self.out[e][x as usize]);
            }
            if next.is_empty() {
                break;
            }
            out.extend_from_slice(&next);
            frontier = next;
        }
        out
    }
}
