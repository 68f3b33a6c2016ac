//! Exhaustive isomorphism search: colour refinement on the disjoint union of
//! both structures, then backtracking along relation adjacency.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Element, FiniteStructure, IsoWitness, ModelError, RelIndex};

pub const DEFAULT_BRUTE_CAP: usize = 14;
pub const BRUTE_CAP_ENV: &str = "CATWORK_BRUTE_CAP";

/// Brute-force cap, overridable through `CATWORK_BRUTE_CAP`.
pub fn brute_cap() -> usize {
    std::env::var(BRUTE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BRUTE_CAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest admissible universe (combined size for two-structure searches).
    pub cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { cap: brute_cap() }
    }
}

impl SearchConfig {
    pub fn with_cap(cap: usize) -> Self {
        SearchConfig { cap }
    }

    pub fn unbounded() -> Self {
        SearchConfig { cap: usize::MAX }
    }
}

/// All isomorphisms from `left` onto `right`, up to `limit`, under the default
/// cap. Empty iff the structures are not isomorphic.
pub fn find_isomorphisms(
    left: &FiniteStructure,
    right: &FiniteStructure,
    limit: usize,
) -> Result<Vec<IsoWitness>, ModelError> {
    find_isomorphisms_with(left, right, Some(limit), SearchConfig::default())
}

pub fn find_isomorphisms_with(
    left: &FiniteStructure,
    right: &FiniteStructure,
    limit: Option<usize>,
    cfg: SearchConfig,
) -> Result<Vec<IsoWitness>, ModelError> {
    let combined = left.len() + right.len();
    if combined > cfg.cap {
        return Err(ModelError::TooLarge { size: combined, cap: cfg.cap });
    }
    let mut out = Vec::new();
    if let Some(p) = Problem::new(left, right, &[])? {
        p.search(limit, |w| out.push(w));
    }
    Ok(out)
}

/// One isomorphism extending the fixed pairs, if any exists.
pub fn extend_isomorphism(
    left: &FiniteStructure,
    right: &FiniteStructure,
    fixed: &[(Element, Element)],
    cfg: SearchConfig,
) -> Result<Option<IsoWitness>, ModelError> {
    let combined = left.len() + right.len();
    if combined > cfg.cap {
        return Err(ModelError::TooLarge { size: combined, cap: cfg.cap });
    }
    let mut found = None;
    if let Some(p) = Problem::new(left, right, fixed)? {
        p.search(Some(1), |w| found = Some(w));
    }
    Ok(found)
}

pub fn isomorphic(left: &FiniteStructure, right: &FiniteStructure, cfg: SearchConfig) -> Result<bool, ModelError> {
    Ok(extend_isomorphism(left, right, &[], cfg)?.is_some())
}

/// Every element `x` can be sent to by some isomorphism `left → right`.
pub fn image_set(
    left: &FiniteStructure,
    right: &FiniteStructure,
    x: Element,
    cfg: SearchConfig,
) -> Result<BTreeSet<Element>, ModelError> {
    if !left.contains(x) {
        return Err(ModelError::UnknownElement(x));
    }
    let mut out = BTreeSet::new();
    for &y in right.universe() {
        if extend_isomorphism(left, right, &[(x, y)], cfg)?.is_some() {
            out.insert(y);
        }
    }
    Ok(out)
}

/// Automorphism orbit of a tuple under the default cap.
pub fn orbit(s: &FiniteStructure, tuple: &[Element]) -> Result<BTreeSet<Vec<Element>>, ModelError> {
    orbit_with(s, tuple, SearchConfig::default())
}

/// Automorphism orbit of a tuple: every `t'` such that some automorphism maps
/// `tuple` to `t'` position by position. The cap bounds `s.len()`.
pub fn orbit_with(s: &FiniteStructure, tuple: &[Element], cfg: SearchConfig) -> Result<BTreeSet<Vec<Element>>, ModelError> {
    if s.len() > cfg.cap {
        return Err(ModelError::TooLarge { size: s.len(), cap: cfg.cap });
    }
    if let Some(&x) = tuple.iter().find(|&&x| !s.contains(x)) {
        return Err(ModelError::UnknownElement(x));
    }
    let mut fixed = Vec::new();
    stabilizer_orbit(s, &mut fixed, tuple)
}

/// Orbit of `rest` under the automorphisms fixing `fixed` pointwise.
///
/// The orbit of the first entry comes with a transversal (one automorphism
/// per image); the rest is the orbit under the smaller stabilizer, carried
/// over by each transversal element.
fn stabilizer_orbit(s: &FiniteStructure, fixed: &mut Vec<Element>, rest: &[Element]) -> Result<BTreeSet<Vec<Element>>, ModelError> {
    let Some((&x, tail)) = rest.split_first() else {
        return Ok(BTreeSet::from([Vec::new()]));
    };
    let n = s.len();
    let identity: Vec<Element> = (0..n as Element).collect();
    let mut transversal: BTreeMap<Element, Vec<Element>> = BTreeMap::from([(x, identity)]);
    if !fixed.contains(&x) {
        let pins: Vec<(Element, Element)> = fixed.iter().map(|&f| (f, f)).collect();
        let colors = Problem::new(s, s, &pins)?.expect("pinned identity is an automorphism").colors;
        let mut gens: Vec<Vec<Element>> = Vec::new();
        for y in 0..n as Element {
            if colors[n + y as usize] != colors[x as usize] || transversal.contains_key(&y) {
                continue;
            }
            let mut pairs = pins.clone();
            pairs.push((x, y));
            let Some(h) = extend_isomorphism(s, s, &pairs, SearchConfig::unbounded())? else {
                continue;
            };
            gens.push(h.images());
            let mut queue: Vec<Element> = transversal.keys().copied().collect();
            while let Some(z) = queue.pop() {
                for g in &gens {
                    let gz = g[z as usize];
                    if !transversal.contains_key(&gz) {
                        let w: Vec<Element> = transversal[&z].iter().map(|&i| g[i as usize]).collect();
                        transversal.insert(gz, w);
                        queue.push(gz);
                    }
                }
            }
        }
    }
    fixed.push(x);
    let inner = stabilizer_orbit(s, fixed, tail)?;
    fixed.pop();
    let mut out = BTreeSet::new();
    for (&y, w) in &transversal {
        for t in &inner {
            let mut v = Vec::with_capacity(rest.len());
            v.push(y);
            v.extend(t.iter().map(|&z| w[z as usize]));
            out.insert(v);
        }
    }
    Ok(out)
}

struct Problem {
    n: usize,
    left: RelIndex,
    right: RelIndex,
    /// Stable colours of the disjoint union: left `0..n`, right `n..2n`.
    colors: Vec<u32>,
    fixed: Vec<Option<Element>>,
}

impl Problem {
    /// `None` when a cheap invariant already rules out any isomorphism.
    fn new(left: &FiniteStructure, right: &FiniteStructure, fixed: &[(Element, Element)]) -> Result<Option<Self>, ModelError> {
        if left.len() != right.len() {
            return Ok(None);
        }
        let n = left.len();
        let mut fixed_map = vec![None; n];
        let mut used = BTreeSet::new();
        for &(x, y) in fixed {
            if !left.contains(x) {
                return Err(ModelError::UnknownElement(x));
            }
            if !right.contains(y) {
                return Err(ModelError::UnknownElement(y));
            }
            match fixed_map[x as usize] {
                Some(prev) if prev != y => return Ok(None),
                Some(_) => continue,
                None => {}
            }
            if !used.insert(y) {
                return Ok(None);
            }
            fixed_map[x as usize] = Some(y);
        }
        let unary: Vec<String> = left
            .unary()
            .keys()
            .chain(right.unary().keys())
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let binary: Vec<String> = left
            .binary()
            .keys()
            .chain(right.binary().keys())
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let li = RelIndex::with_names(left, &unary, &binary);
        let ri = RelIndex::with_names(right, &unary, &binary);
        for r in 0..unary.len() {
            if li.unary_members[r].len() != ri.unary_members[r].len() {
                return Ok(None);
            }
        }
        for r in 0..binary.len() {
            let lc: usize = li.out[r].iter().map(Vec::len).sum();
            let rc: usize = ri.out[r].iter().map(Vec::len).sum();
            if lc != rc {
                return Ok(None);
            }
        }
        let lroots: BTreeSet<Element> = left.roots().values().copied().collect();
        let rroots: BTreeSet<Element> = right.roots().values().copied().collect();
        if lroots.len() != rroots.len() {
            return Ok(None);
        }
        let colors = refine(&li, &ri, &fixed_map, &lroots, &rroots);
        let mut counts: HashMap<u32, i64> = HashMap::new();
        for v in 0..n {
            *counts.entry(colors[v]).or_default() += 1;
            *counts.entry(colors[n + v]).or_default() -= 1;
        }
        if counts.values().any(|&c| c != 0) {
            return Ok(None);
        }
        for (x, y) in fixed_map.iter().enumerate() {
            if let Some(y) = y {
                if colors[x] != colors[n + *y as usize] {
                    return Ok(None);
                }
            }
        }
        Ok(Some(Problem {
            n,
            left: li,
            right: ri,
            colors,
            fixed: fixed_map,
        }))
    }

    fn order(&self) -> Vec<Element> {
        let n = self.n;
        let mut class_size: HashMap<u32, usize> = HashMap::new();
        for v in 0..n {
            *class_size.entry(self.colors[v]).or_default() += 1;
        }
        let mut seeds: Vec<Element> = (0..n as Element).collect();
        seeds.sort_by_key(|&v| {
            let fixed_first = self.fixed[v as usize].is_none();
            (fixed_first, class_size[&self.colors[v as usize]], v)
        });
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for s in seeds {
            if seen[s as usize] {
                continue;
            }
            seen[s as usize] = true;
            let mut head = order.len();
            order.push(s);
            while head < order.len() {
                let x = order[head] as usize;
                head += 1;
                for r in 0..self.left.out.len() {
                    for &z in self.left.out[r][x].iter().chain(&self.left.inn[r][x]) {
                        if !seen[z as usize] {
                            seen[z as usize] = true;
                            order.push(z);
                        }
                    }
                }
            }
        }
        order
    }

    fn search(&self, limit: Option<usize>, mut emit: impl FnMut(IsoWitness)) {
        let n = self.n;
        if limit == Some(0) {
            return;
        }
        if n == 0 {
            emit(IsoWitness::identity(0));
            return;
        }
        let order = self.order();
        let mut right_classes: HashMap<u32, Vec<Element>> = HashMap::new();
        for y in 0..n {
            right_classes.entry(self.colors[n + y]).or_default().push(y as Element);
        }
        let mut l2r: Vec<Option<Element>> = vec![None; n];
        let mut r2l: Vec<Option<Element>> = vec![None; n];
        let mut stack: Vec<(Vec<Element>, usize)> = Vec::with_capacity(n);
        let mut found = 0usize;
        stack.push((self.candidates(order[0], &l2r, &right_classes), 0));
        loop {
            let k = stack.len() - 1;
            let x = order[k];
            let mut advanced = false;
            {
                let (cands, idx) = stack.last_mut().expect("non-empty");
                while *idx < cands.len() {
                    let y = cands[*idx];
                    *idx += 1;
                    if r2l[y as usize].is_none() && self.consistent(x, y, &l2r, &r2l) {
                        l2r[x as usize] = Some(y);
                        r2l[y as usize] = Some(x);
                        advanced = true;
                        break;
                    }
                }
            }
            if advanced {
                if k + 1 == n {
                    emit(IsoWitness::from_images(l2r.iter().map(|y| y.expect("complete")).collect()).expect("bijective"));
                    found += 1;
                    if limit.is_some_and(|l| found >= l) {
                        return;
                    }
                    let y = l2r[x as usize].take().expect("assigned");
                    r2l[y as usize] = None;
                } else {
                    let next = order[k + 1];
                    stack.push((self.candidates(next, &l2r, &right_classes), 0));
                }
            } else {
                stack.pop();
                if stack.is_empty() {
                    return;
                }
                let prev = order[stack.len() - 1];
                let y = l2r[prev as usize].take().expect("assigned");
                r2l[y as usize] = None;
            }
        }
    }

    fn candidates(
        &self,
        x: Element,
        l2r: &[Option<Element>],
        classes: &HashMap<u32, Vec<Element>>,
    ) -> Vec<Element> {
        let n = self.n;
        let want = self.colors[x as usize];
        if let Some(y) = self.fixed[x as usize] {
            return vec![y];
        }
        // Narrow through the smallest adjacency list of an assigned neighbour.
        let mut best: Option<&[Element]> = None;
        for r in 0..self.left.out.len() {
            for &z in &self.left.inn[r][x as usize] {
                if let Some(gz) = l2r[z as usize] {
                    let list = &self.right.out[r][gz as usize];
                    if best.is_none_or(|b| list.len() < b.len()) {
                        best = Some(list);
                    }
                }
            }
            for &z in &self.left.out[r][x as usize] {
                if let Some(gz) = l2r[z as usize] {
                    let list = &self.right.inn[r][gz as usize];
                    if best.is_none_or(|b| list.len() < b.len()) {
                        best = Some(list);
                    }
                }
            }
        }
        match best {
            Some(list) => list.iter().copied().filter(|&y| self.colors[n + y as usize] == want).collect(),
            None => classes.get(&want).cloned().unwrap_or_default(),
        }
    }

    fn consistent(&self, x: Element, y: Element, l2r: &[Option<Element>], r2l: &[Option<Element>]) -> bool {
        if self.colors[x as usize] != self.colors[self.n + y as usize] {
            return false;
        }
        let (l, r) = (&self.left, &self.right);
        for rel in 0..l.out.len() {
            if l.has2(rel, x, x) != r.has2(rel, y, y) {
                return false;
            }
            for &z in &l.out[rel][x as usize] {
                if let Some(gz) = l2r[z as usize] {
                    if !r.has2(rel, y, gz) {
                        return false;
                    }
                }
            }
            for &z in &l.inn[rel][x as usize] {
                if let Some(gz) = l2r[z as usize] {
                    if !r.has2(rel, gz, y) {
                        return false;
                    }
                }
            }
            for &u in &r.out[rel][y as usize] {
                if let Some(pu) = r2l[u as usize] {
                    if !l.has2(rel, x, pu) {
                        return false;
                    }
                }
            }
            for &u in &r.inn[rel][y as usize] {
                if let Some(pu) = r2l[u as usize] {
                    if !l.has2(rel, pu, x) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Colour refinement over the disjoint union of both structures. Unary
/// memberships, loops, root status and individualised pairs seed the colours.
fn refine(
    left: &RelIndex,
    right: &RelIndex,
    fixed: &[Option<Element>],
    lroots: &BTreeSet<Element>,
    rroots: &BTreeSet<Element>,
) -> Vec<u32> {
    let n = left.size;
    let mut individual = vec![0u64; 2 * n];
    for (k, (x, y)) in fixed.iter().enumerate().filter_map(|(x, y)| y.map(|y| (x, y))).enumerate() {
        individual[x] = k as u64 + 1;
        individual[n + y as usize] = k as u64 + 1;
    }
    let side = |v: usize| -> (&RelIndex, usize) {
        if v < n {
            (left, v)
        } else {
            (right, v - n)
        }
    };
    let mut sigs: Vec<Vec<u64>> = (0..2 * n)
        .map(|v| {
            let (idx, x) = side(v);
            let root = if v < n { lroots.contains(&(x as Element)) } else { rroots.contains(&(x as Element)) };
            let mut sig = vec![individual[v], root as u64];
            sig.extend(idx.unary_bits.iter().map(|bits| bits[x] as u64));
            sig.extend((0..idx.out.len()).map(|r| idx.has2(r, x as Element, x as Element) as u64));
            sig
        })
        .collect();
    let mut colors = compress(&sigs);
    let mut classes = colors.iter().collect::<BTreeSet<_>>().len();
    loop {
        for (v, sig) in sigs.iter_mut().enumerate() {
            let (idx, x) = side(v);
            let off = if v < n { 0 } else { n };
            sig.clear();
            sig.push(colors[v] as u64);
            let start = sig.len();
            for r in 0..idx.out.len() {
                for &z in &idx.out[r][x] {
                    sig.push(((2 * r as u64) << 32) | colors[off + z as usize] as u64);
                }
                for &z in &idx.inn[r][x] {
                    sig.push(((2 * r as u64 + 1) << 32) | colors[off + z as usize] as u64);
                }
            }
            sig[start..].sort_unstable();
        }
        let next = compress(&sigs);
        let next_classes = next.iter().collect::<BTreeSet<_>>().len();
        colors = next;
        if next_classes == classes {
            return colors;
        }
        classes = next_classes;
    }
}

fn compress(sigs: &[Vec<u64>]) -> Vec<u32> {
    let mut distinct: BTreeMap<&[u64], u32> = BTreeMap::new();
    for s in sigs {
        distinct.entry(s.as_slice()).or_insert(0);
    }
    for (i, v) in distinct.values_mut().enumerate() {
        *v = i as u32;
    }
    sigs.iter().map(|s| distinct[s.as_slice()]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_isomorphism, Tree};

    fn star(k: usize) -> FiniteStructure {
        let mut p = vec![None];
        p.extend(std::iter::repeat_n(Some(0), k));
        Tree::from_parents(p).unwrap().to_structure()
    }

    #[test]
    fn star_automorphisms_are_leaf_permutations() {
        let s = star(3);
        let all = find_isomorphisms(&s, &s, 100).unwrap();
        assert_eq!(all.len(), 6);
        for w in &all {
            assert!(check_isomorphism(&s, &s, w).unwrap());
        }
    }

    #[test]
    fn different_sizes_have_no_isomorphism() {
        assert!(find_isomorphisms(&star(0), &star(1), 10).unwrap().is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        let s = star(9);
        assert!(matches!(
            find_isomorphisms(&s, &s, 1),
            Err(ModelError::TooLarge { size: 20, cap: _ })
        ));
        assert_eq!(find_isomorphisms_with(&s, &s, Some(3), SearchConfig::with_cap(20)).unwrap().len(), 3);
    }

    #[test]
    fn root_orbit_is_trivial_and_leaves_are_transitive() {
        let s = star(3);
        assert_eq!(orbit(&s, &[0]).unwrap(), BTreeSet::from([vec![0]]));
        let leaves = orbit(&s, &[1]).unwrap();
        assert_eq!(leaves, BTreeSet::from([vec![1], vec![2], vec![3]]));
        let pairs = orbit(&s, &[1, 1]).unwrap();
        assert_eq!(pairs.len(), 3);
        let distinct = orbit(&s, &[1, 2]).unwrap();
        assert_eq!(distinct.len(), 6);
    }

    #[test]
    fn extension_respects_fixed_pairs() {
        let s = star(2);
        assert!(extend_isomorphism(&s, &s, &[(0, 1)], SearchConfig::default()).unwrap().is_none());
        let w = extend_isomorphism(&s, &s, &[(1, 2)], SearchConfig::default()).unwrap().unwrap();
        assert_eq!(w.get(2), Some(1));
        assert_eq!(image_set(&s, &s, 1, SearchConfig::default()).unwrap(), BTreeSet::from([1, 2]));
    }

    #[test]
    fn empty_structures_have_exactly_one_isomorphism() {
        let e = FiniteStructure::empty();
        assert_eq!(find_isomorphisms(&e, &e, 5).unwrap().len(), 1);
    }

    #[test]
    fn orbits_match_the_full_automorphism_group() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let size = rng.gen_range(1..=7);
            let s = crate::sample::random_structure(&mut rng, size, &["P"], &["E"], 0.3);
            let autos = find_isomorphisms_with(&s, &s, None, SearchConfig::unbounded()).unwrap();
            for _ in 0..4 {
                let k = rng.gen_range(1..=3);
                let t: Vec<Element> = (0..k).map(|_| rng.gen_range(0..size as Element)).collect();
                let want: BTreeSet<Vec<Element>> =
                    autos.iter().map(|g| t.iter().map(|&x| g.get(x).unwrap()).collect()).collect();
                assert_eq!(orbit(&s, &t).unwrap(), want, "{t:?}");
            }
        }
    }
}
