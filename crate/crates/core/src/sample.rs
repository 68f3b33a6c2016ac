//! Seeded generators for randomized checks: c.e. set specifications,
//! monotone approximations and small relational structures.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::effective::{CeSetSpec, Cell, MonotoneApprox};
use crate::model::{FiniteStructure, StructureBuilder};

/// Each `n < index_cap` enters with probability 1/2, at a uniform stage in
/// `0..=horizon`.
pub fn random_ce_spec(rng: &mut impl Rng, index_cap: u32, horizon: u32) -> CeSetSpec {
    let mut entries = Vec::new();
    for n in 0..index_cap {
        if rng.gen_bool(0.5) {
            entries.push((n, rng.gen_range(0..=horizon)));
        }
    }
    CeSetSpec::new(entries, horizon, index_cap).expect("stages drawn within the horizon")
}

/// Random nondecreasing rows with limits in `0..=max_limit` and independent
/// use levels in `0..=level_cap`.
pub fn random_monotone(
    rng: &mut impl Rng,
    index_cap: u32,
    horizon: u32,
    level_cap: u32,
    max_limit: u32,
) -> MonotoneApprox {
    let mut table = Vec::with_capacity(index_cap as usize);
    for _ in 0..index_cap {
        let limit = rng.gen_range(0..=max_limit);
        // Stages at which the value steps up, one per unit of the limit.
        let mut steps: Vec<u32> = (0..limit).map(|_| rng.gen_range(0..=horizon)).collect();
        steps.sort_unstable();
        let row = (0..=horizon)
            .map(|s| Cell {
                value: steps.iter().filter(|&&t| t <= s).count() as u32,
                level: rng.gen_range(0..=level_cap),
            })
            .collect();
        table.push(row);
    }
    let a = MonotoneApprox { index_cap, horizon, level_cap, table };
    a.validate().expect("rows built nondecreasing");
    a
}

/// A structure on `size` elements where each unary relation holds with
/// probability `p` and each binary pair with probability `p / 2`.
pub fn random_structure(rng: &mut impl Rng, size: usize, unary: &[&str], binary: &[&str], p: f64) -> FiniteStructure {
    let mut b = StructureBuilder::new();
    b.add_elements(size);
    for &u in unary {
        b.declare_unary(u);
        for x in 0..size as u32 {
            if rng.gen_bool(p) {
                b.insert_unary(u, x);
            }
        }
    }
    for &r in binary {
        b.declare_binary(r);
        for x in 0..size as u32 {
            for y in 0..size as u32 {
                if rng.gen_bool(p / 2.0) {
                    b.insert_binary(r, x, y);
                }
            }
        }
    }
    b.build().expect("no forest or sort constraints on these names")
}

/// A random relabelling of `s` when `shuffle` is set, otherwise a fresh
/// random structure of the same size. Pairs drawn this way are equivalent
/// often enough to exercise both verdicts of a game solver.
pub fn random_pair(rng: &mut impl Rng, size: usize, unary: &[&str], binary: &[&str], p: f64) -> (FiniteStructure, FiniteStructure) {
    let a = random_structure(rng, size, unary, binary, p);
    let b = if rng.gen_bool(0.5) {
        let mut perm: Vec<u32> = (0..size as u32).collect();
        perm.shuffle(rng);
        a.relabel(&perm).expect("permutation")
    } else {
        random_structure(rng, size, unary, binary, p)
    };
    (a, b)
}
