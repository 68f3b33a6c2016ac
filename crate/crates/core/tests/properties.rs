use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use catwork::baf::{build_tree, classify, classify_limit, iso_baf, Kind, LimitClass, LimitIndex, TreeKind, TruncationParams};
use catwork::cli::{build_structures, Scenario};
use catwork::coders::{
    boxes_canonical_iso, build_boxes, build_warmup, decode_from_warmup_iso, end_to_end, warmup_canonical_iso, BoxCaps,
    PipelineCaps, WarmupCaps,
};
use catwork::effective::{dominates, modulus_decode, monotone_from_ce, phi_at_level, self_modulus, CeSetSpec, LevelPolicy};
use catwork::logic::{
    assign, ef_equivalent, eval, formula_corpus, relativize, CorpusConfig, Evaluator, Var, Vocabulary,
};
use catwork::model::{
    canonical_form, check_isomorphism, extract_sort, find_isomorphisms_with, orbit, scramble, Element,
    FiniteStructure, IsoWitness, SearchConfig, Tree,
};
use catwork::sample::{random_ce_spec, random_monotone, random_structure};
use catwork::vocab;

fn tree_from(parents: &[usize]) -> Tree {
    // Node i + 1 hangs below some earlier node.
    let mut p = vec![None];
    p.extend(parents.iter().enumerate().map(|(i, &x)| Some(x % (i + 1))));
    Tree::from_parents(p).unwrap()
}

fn tree_strategy(max: usize) -> impl Strategy<Value = Tree> {
    prop::collection::vec(any::<usize>(), 0..max).prop_map(|p| tree_from(&p))
}

fn structure_strategy(max: usize) -> impl Strategy<Value = FiniteStructure> {
    (1..=max, any::<u64>()).prop_map(|(n, seed)| random_structure(&mut ChaCha8Rng::seed_from_u64(seed), n, &["P"], &["E"], 0.4))
}

fn spec_strategy(max_sorts: u32, max_horizon: u32) -> impl Strategy<Value = CeSetSpec> {
    (1..=max_sorts, 0..=max_horizon, any::<u64>())
        .prop_map(|(n, h, seed)| random_ce_spec(&mut ChaCha8Rng::seed_from_u64(seed), n, h))
}

fn t(w: u32) -> TruncationParams {
    TruncationParams { w, limit_index_cap: 4, rank_cap: 4 }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn identity_is_an_isomorphism(s in structure_strategy(10)) {
        prop_assert!(check_isomorphism(&s, &s, &IsoWitness::identity(s.len())).unwrap());
    }

    #[test]
    fn trees_are_isomorphic_iff_codes_agree(a in tree_strategy(7), b in tree_strategy(7)) {
        let (sa, sb) = (a.to_structure(), b.to_structure());
        let found = !find_isomorphisms_with(&sa, &sb, Some(1), SearchConfig::unbounded()).unwrap().is_empty();
        prop_assert_eq!(found, canonical_form(&a) == canonical_form(&b));
    }

    #[test]
    fn orbits_partition_tuples(s in structure_strategy(6), x in any::<u32>(), y in any::<u32>()) {
        let n = s.len() as u32;
        let tuple = vec![x % n, y % n];
        let o = orbit(&s, &tuple).unwrap();
        prop_assert!(o.contains(&tuple));
        for other in &o {
            prop_assert_eq!(&orbit(&s, other).unwrap(), &o);
        }
    }

    #[test]
    fn sorts_reassemble(d in spec_strategy(4, 4)) {
        let p = build_warmup(&d, WarmupCaps::for_spec(&d)).unwrap();
        let parts: Vec<FiniteStructure> = (0..d.index_cap).map(|n| extract_sort(&p.n, &vocab::sort_tag(n)).unwrap()).collect();
        let refs: Vec<&FiniteStructure> = parts.iter().collect();
        let (union, _) = FiniteStructure::disjoint_union(&refs, false);
        prop_assert_eq!(union.len(), p.n.len());
        // Unary structures: isomorphic iff every relation profile has the same count.
        let profile = |s: &FiniteStructure| {
            let mut v: Vec<Vec<String>> = s.universe().iter().map(|&x| s.unary().iter().filter(|(_, r)| r.contains(&x)).map(|(k, _)| k.clone()).collect()).collect();
            v.sort();
            v
        };
        prop_assert_eq!(profile(&union), profile(&p.n));
    }

    #[test]
    fn relativization_reads_the_subtree(tree in tree_strategy(7), pick in any::<usize>()) {
        let r = pick % tree.len();
        let s = tree.to_structure();
        let sub = tree.subtree(r).0;
        let pool = [&s, &sub.to_structure()];
        let corpus = formula_corpus(&Vocabulary { unary: vec![vocab::ROOT.into()], binary: vec![vocab::EDGE.into()] }, &pool, CorpusConfig { max_rank: 2, per_level: 16 }).unwrap();
        let anchor = Var::new("anchor");
        let sub_s = sub.to_structure();
        for phi in &corpus {
            let rel = relativize(phi, &anchor, sub.depth() as u32).unwrap();
            let inside = eval(&rel, &s, &assign([("anchor", r as Element)])).unwrap();
            prop_assert_eq!(inside, Evaluator::new(&sub_s).eval_closed(phi).unwrap(), "{}", phi);
        }
    }

    #[test]
    fn ef_equivalence_implies_agreement(a in structure_strategy(4), b in structure_strategy(4), k in 0usize..=2) {
        if ef_equivalent(&a, &b, k).unwrap() {
            let corpus = formula_corpus(&Vocabulary::of(&[&a, &b]), &[&a, &b], CorpusConfig { max_rank: k, per_level: 24 }).unwrap();
            for phi in &corpus {
                prop_assert_eq!(Evaluator::new(&a).eval_closed(phi).unwrap(), Evaluator::new(&b).eval_closed(phi).unwrap(), "{}", phi);
            }
        }
    }

    #[test]
    fn scrambled_family_trees_match(n in 1u32..=3, w in 1u32..=2, e in any::<bool>(), seed in any::<u64>()) {
        let kind = if e { Kind::E } else { Kind::A };
        let tree = build_tree(TreeKind::finite(kind, n), &t(w)).unwrap();
        let (copy, _) = scramble(&tree.to_structure(), seed);
        let copy = Tree::from_structure(&copy).unwrap();
        let g = iso_baf(&tree, &copy, n).unwrap();
        prop_assert!(check_isomorphism(&tree.to_structure(), &copy.to_structure(), &g).unwrap());
    }

    #[test]
    fn self_modulus_is_the_limit(d in spec_strategy(8, 10), levels in 1u32..=4, seed in any::<u64>()) {
        let a = monotone_from_ce(&d, &LevelPolicy::Seeded(seed), levels).unwrap();
        prop_assert_eq!(a.limits(), self_modulus(&d));
    }

    #[test]
    fn approximations_are_monotone_in_level(seed in any::<u64>()) {
        let a = random_monotone(&mut ChaCha8Rng::seed_from_u64(seed), 3, 4, 3, 3);
        for n in 0..a.index_cap {
            for s in 0..=a.horizon {
                for m in 0..a.level_cap {
                    if let Some(v) = phi_at_level(&a, n, s, m) {
                        prop_assert_eq!(phi_at_level(&a, n, s, m + 1), Some(v));
                    }
                }
            }
            // {(i, m) : some stage exceeds i at level m}: down in i, up in m.
            let reach = |i: u32, m: u32| (0..=a.horizon).any(|s| phi_at_level(&a, n, s, m).is_some_and(|v| v > i));
            for i in 0..4 {
                for m in 0..=a.level_cap {
                    if reach(i + 1, m) { prop_assert!(reach(i, m)); }
                    if m < a.level_cap && reach(i, m) { prop_assert!(reach(i, m + 1)); }
                }
            }
        }
    }

    #[test]
    fn dominating_functions_decode(d in spec_strategy(6, 8), bumps in prop::collection::vec(0u32..5, 6)) {
        let f = self_modulus(&d);
        let g: Vec<u32> = f.values.iter().zip(&bumps).map(|(v, b)| v + b).collect();
        prop_assert!(dominates(&g, &f, d.index_cap).holds);
        prop_assert_eq!(modulus_decode(&g, &d).unwrap(), d.members());
    }

    #[test]
    fn canonical_isomorphisms_check(d in spec_strategy(3, 3), seed in any::<u64>()) {
        let w = build_warmup(&d, WarmupCaps::for_spec(&d)).unwrap();
        let g = warmup_canonical_iso(&w);
        prop_assert!(check_isomorphism(&w.m, &w.n, &g).unwrap());
        prop_assert_eq!(decode_from_warmup_iso(&g, &w).unwrap(), d.members());
        let a = monotone_from_ce(&d, &LevelPolicy::Seeded(seed), 2).unwrap();
        let p = build_boxes(&a, BoxCaps { w: 1, levels: 2, i_max: None }).unwrap();
        prop_assert!(check_isomorphism(&p.m, &p.n, &boxes_canonical_iso(&p).unwrap()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn round_trip_recovers_the_set(d in spec_strategy(3, 4), seed in any::<u64>()) {
        let caps = PipelineCaps { boxes: BoxCaps { w: 1, levels: 3, i_max: None }, ..PipelineCaps::default() };
        let r = end_to_end(&d, caps, seed).unwrap();
        prop_assert!(r.exact);
        prop_assert!(r.s_omega_oracle_calls >= r.s_omega_components);
    }

    #[test]
    fn builds_are_deterministic(d in spec_strategy(3, 3), seed in any::<u64>()) {
        let text = serde_json::json!({
            "name": "p", "seed": seed,
            "caps": { "w": 1, "I": 4, "M": 2, "N_max": 2, "H": d.horizon, "I_max": null, "brute_cap": 14 },
            "composite": d,
        }).to_string();
        let s = Scenario::parse(&text).unwrap();
        let [a1, b1] = build_structures(&s).unwrap();
        let [a2, b2] = build_structures(&Scenario::parse(&serde_json::to_string(&s).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(a1.to_json(), a2.to_json());
        prop_assert_eq!(b1.to_json(), b2.to_json());
    }
}

#[test]
fn family_verdicts_survive_wider_truncation() {
    // Every corpus sentence of rank k gets the same verdict at widths w and
    // w + 1 once w >= k.
    for n in 1..=3 {
        for kind in [Kind::A, Kind::E] {
            for w in 1..=2u32 {
                let small = build_tree(TreeKind::finite(kind, n), &t(w)).unwrap();
                let big = build_tree(TreeKind::finite(kind, n), &t(w + 1)).unwrap();
                assert_eq!(classify(&small, n).unwrap(), classify(&big, n).unwrap());
                let (ss, sb) = (small.to_structure(), big.to_structure());
                let pool = [&ss, &sb];
                let vocab = Vocabulary { unary: vec![vocab::ROOT.into()], binary: vec![vocab::EDGE.into()] };
                let corpus = formula_corpus(&vocab, &pool, CorpusConfig { max_rank: w as usize, per_level: 24 }).unwrap();
                for phi in corpus {
                    assert_eq!(
                        Evaluator::new(&ss).eval_closed(&phi).unwrap(),
                        Evaluator::new(&sb).eval_closed(&phi).unwrap(),
                        "{kind}({n}) at w = {w}: {phi}"
                    );
                }
            }
        }
    }
}

#[test]
fn limit_reading_is_stable_in_the_index_cap() {
    for cap in 2..=5u32 {
        for k in 0..cap {
            let read = |cap: u32| {
                let p = TruncationParams { w: 1, limit_index_cap: cap, rank_cap: 4 };
                classify_limit(&build_tree(TreeKind::L(LimitIndex::Finite(k)), &p).unwrap(), &p).unwrap()
            };
            assert_eq!(read(cap), LimitClass::Finite(k));
            assert_eq!(read(cap), read(cap + 1));
        }
    }
    let seen: BTreeSet<_> = (1..=3).map(|w| classify(&build_tree(TreeKind::E(2), &t(w)).unwrap(), 2).unwrap()).collect();
    assert_eq!(seen.len(), 1);
}
