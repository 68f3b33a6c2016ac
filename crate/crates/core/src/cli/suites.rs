//! The invariant suites behind `verify`.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::report::{ClaimResult, SuiteReport};
use super::scenario::{Scenario, ScenarioKind};
use crate::baf::{build_tree, classify, classify_limit, Kind, LimitIndex, RankOracle, TreeKind, TruncationParams};
use crate::coders::{
    boxes_canonical_iso, build_boxes, build_composite, build_warmup, decode_from_warmup_iso, exhaustive_decode_check,
    extract_dominator, glue_witness, iso_with_modulus, primality_report, threshold_profile, warmup_canonical_iso,
    warmup_iso_with_d, BoxPair, CoderError, CompositeStructure, PrimalityTarget, Side, TupleBudget, WarmupPair,
};
use crate::effective::{modulus_decode, self_modulus, CeSetSpec};
use crate::logic::{
    ef_equivalent_with, eval_via_bounded_substructure, formula_corpus, phi_n, CorpusConfig, EfLimits, Evaluator,
    LogicError, Vocabulary,
};
use crate::model::{
    extract_sort_with_map, find_isomorphisms_with, image_set, scramble, verify_isomorphism, FiniteStructure,
    SearchConfig,
};
use crate::sample::{random_ce_spec, random_pair};
use crate::vocab;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Warmup,
    Boxes,
    Composite,
    Primality,
    Logic,
    All,
}

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Warmup, Suite::Boxes, Suite::Composite, Suite::Primality, Suite::Logic],
            s => vec![s],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Warmup => "warmup",
            Suite::Boxes => "boxes",
            Suite::Composite => "composite",
            Suite::Primality => "primality",
            Suite::Logic => "logic",
            Suite::All => "all",
        }
    }
}

/// Structures read back from `build` output, replacing the rebuilt ones.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub kind: ScenarioKind,
    pub first: FiniteStructure,
    pub second: FiniteStructure,
}

pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub brute_cap: usize,
    pub loaded: Option<Loaded>,
}

impl Context<'_> {
    fn loaded(&self, kind: ScenarioKind) -> Option<&Loaded> {
        self.loaded.as_ref().filter(|l| l.kind == kind)
    }

    fn warmup_pair(&self, d: &CeSetSpec) -> Result<WarmupPair, CoderError> {
        let mut p = build_warmup(d, self.scenario.warmup_caps())?;
        if let Some(l) = self.loaded(ScenarioKind::Warmup) {
            p.m = l.first.clone();
            p.n = l.second.clone();
        }
        Ok(p)
    }

    fn box_pair(&self) -> Result<BoxPair, CoderError> {
        let approx = self.scenario.approx().map_err(|e| CoderError::Caps(e.to_string()))?;
        let mut p = build_boxes(&approx, self.scenario.box_caps())?;
        if let Some(l) = self.loaded(ScenarioKind::Boxes) {
            p.m = l.first.clone();
            p.n = l.second.clone();
        }
        Ok(p)
    }
}

pub fn run_suite(ctx: &Context<'_>, suite: Suite) -> SuiteReport {
    let claims = match suite {
        Suite::Warmup => warmup(ctx),
        Suite::Boxes => boxes(ctx),
        Suite::Composite => composite(ctx),
        Suite::Primality => primality(ctx),
        Suite::Logic => logic(ctx),
        Suite::All => unreachable!("expanded by the caller"),
    };
    SuiteReport { suite: suite.name().to_string(), claims }
}

/// Runs a check; an error becomes a failure carrying the error text.
fn claim(id: &str, anchor: &'static str, f: impl FnOnce() -> Result<ClaimResult, CoderError>) -> ClaimResult {
    f().unwrap_or_else(|e| ClaimResult::fail(id, anchor, e.to_string(), error_payload(&e)))
}

fn error_payload(e: &CoderError) -> Value {
    match e {
        CoderError::ClaimViolated { claim, detail } => json!({ "violated": claim, "detail": detail }),
        CoderError::CopyInconsistent { n, expected, found } => {
            json!({ "violated": "E-owning spine count equals the limit", "sort": n, "expected": expected, "found": found })
        }
        other => json!({ "error": other.to_string() }),
    }
}

// ---------------------------------------------------------------- warm-up

const W_LAYOUT: &str = "stage coding: U_s holds only at a_0 on the left and at b_s on the right, for n entering at s";
const W_CANON: &str = "the shift map a_0 -> b_s, a_i -> b_(i-1) for 0 < i <= s is an isomorphism";
const W_DECODE: &str = "n is in D iff the image of a_0 is b_s with n in D_s";
const W_EVERY: &str = "every isomorphism decodes to D";
const W_FROM_D: &str = "D computes an isomorphism onto any copy";
const W_BRUTE: &str = "every enumerated isomorphism decodes to D";

fn warmup(ctx: &Context<'_>) -> Vec<ClaimResult> {
    let ids = ["warmup.layout", "warmup.canonical_iso", "warmup.decode", "warmup.every_iso_decodes", "warmup.iso_from_d", "warmup.full_enumeration"];
    let anchors = [W_LAYOUT, W_CANON, W_DECODE, W_EVERY, W_FROM_D, W_BRUTE];
    let Some(d) = ctx.scenario.spec() else {
        return ids.iter().zip(anchors).map(|(id, a)| ClaimResult::skipped(id, a, "the scenario gives a table, not a set")).collect();
    };
    let pair = match ctx.warmup_pair(d) {
        Ok(p) => p,
        Err(e) => return ids.iter().zip(anchors).map(|(id, a)| ClaimResult::fail(id, a, e.to_string(), error_payload(&e))).collect(),
    };
    let seed = ctx.scenario.seed;
    vec![
        claim(ids[0], W_LAYOUT, || {
            Ok(match stage_layout_violation(&pair) {
                None => ClaimResult::pass(ids[0], W_LAYOUT, format!("{} sorts, {} per sort", d.index_cap, pair.caps.per_sort)),
                Some(cx) => ClaimResult::fail(ids[0], W_LAYOUT, cx["detail"].as_str().unwrap_or_default().to_string(), cx),
            })
        }),
        claim(ids[1], W_CANON, || {
            let g = warmup_canonical_iso(&pair);
            Ok(match verify_isomorphism(&pair.m, &pair.n, &g)? {
                Ok(()) => ClaimResult::pass(ids[1], W_CANON, ""),
                Err(m) => ClaimResult::fail(ids[1], W_CANON, m.0.clone(), json!({ "violated": "isomorphism", "mismatch": m.0 })),
            })
        }),
        claim(ids[2], W_DECODE, || {
            let got = decode_from_warmup_iso(&warmup_canonical_iso(&pair), &pair)?;
            Ok(set_result(ids[2], W_DECODE, &d.members(), &got))
        }),
        claim(ids[3], W_EVERY, || {
            let cov = exhaustive_decode_check(&pair)?;
            Ok(if cov.exact() {
                ClaimResult::pass(ids[3], W_EVERY, "images of every a_0 collected sort by sort").with_witness(json!({ "images": cov.images }))
            } else {
                ClaimResult::fail(ids[3], W_EVERY, format!("sorts {:?} can decode wrongly", cov.wrong), json!({ "wrong_sorts": cov.wrong, "images": cov.images }))
            })
        }),
        claim(ids[4], W_FROM_D, || {
            let (copy, _) = scramble(&pair.n, seed);
            let g = warmup_iso_with_d(&pair.n, &copy, d)?;
            Ok(match verify_isomorphism(&pair.n, &copy, &g)? {
                Ok(()) => ClaimResult::pass(ids[4], W_FROM_D, format!("copy shuffled with seed {seed}")),
                Err(m) => ClaimResult::fail(ids[4], W_FROM_D, m.0.clone(), json!({ "violated": "isomorphism", "mismatch": m.0 })),
            })
        }),
        claim(ids[5], W_BRUTE, || {
            let size = pair.m.len() + pair.n.len();
            if size > ctx.brute_cap {
                return Ok(ClaimResult::skipped(ids[5], W_BRUTE, format!("combined size {size} exceeds the brute-force cap {}", ctx.brute_cap)));
            }
            let all = find_isomorphisms_with(&pair.m, &pair.n, None, SearchConfig::with_cap(ctx.brute_cap))?;
            for g in &all {
                let got = decode_from_warmup_iso(g, &pair)?;
                if got != d.members() {
                    return Ok(ClaimResult::fail(ids[5], W_BRUTE, "an isomorphism decodes wrongly", json!({ "images": g.images(), "decoded": got })));
                }
            }
            Ok(ClaimResult::pass(ids[5], W_BRUTE, format!("{} isomorphisms", all.len())))
        }),
    ]
}

fn set_result(id: &str, anchor: &'static str, want: &BTreeSet<u32>, got: &BTreeSet<u32>) -> ClaimResult {
    if want == got {
        ClaimResult::pass(id, anchor, format!("recovered {got:?}"))
    } else {
        ClaimResult::fail(id, anchor, format!("expected {want:?}, recovered {got:?}"), json!({ "expected": want, "recovered": got }))
    }
}

/// First place where a side departs from the stage-coding layout.
fn stage_layout_violation(p: &WarmupPair) -> Option<Value> {
    for (side, s, right) in [("M", &p.m, false), ("N", &p.n, true)] {
        let size = (p.spec.index_cap * p.caps.per_sort) as usize;
        if s.len() != size {
            return Some(json!({ "violated": "universe size", "side": side, "expected": size, "found": s.len(),
                "detail": format!("{side} has {} elements, the layout has {size}", s.len()) }));
        }
        for n in 0..p.spec.index_cap {
            let tag = vocab::sort_tag(n);
            let want: BTreeSet<u32> = (0..p.caps.per_sort).map(|i| p.element(n, i)).collect();
            let found = s.unary_rel(&tag).cloned().unwrap_or_default();
            if found != want {
                return Some(json!({ "violated": "sort tag", "side": side, "relation": tag,
                    "detail": format!("{tag} in {side} is not the block of sort {n}") }));
            }
        }
        for (name, rel) in s.unary() {
            let Some(stage) = vocab::parse_stage(name) else { continue };
            let want: BTreeSet<u32> = p
                .spec
                .entries
                .iter()
                .filter(|(_, &st)| st == stage)
                .map(|(&n, _)| p.element(n, if right { stage } else { 0 }))
                .collect();
            if *rel != want {
                let extra: Vec<u32> = rel.difference(&want).copied().collect();
                let missing: Vec<u32> = want.difference(rel).copied().collect();
                return Some(json!({ "violated": "stage relation", "side": side, "relation": name,
                    "unexpected": extra, "missing": missing,
                    "detail": format!("{name} in {side}: unexpected {extra:?}, missing {missing:?}") }));
            }
        }
    }
    None
}

// ------------------------------------------------------------------ boxes

const B_SPLIT: &str = "left row j+1 and right row j agree; for j < f(n) they are A below a threshold and E from it on, otherwise all A; thresholds never decrease";
const B_CANON: &str = "the shift map along each spine, extended box by box, is an isomorphism";
const B_DOM: &str = "the dominator read off the shift map equals the limit f";
const B_MOD: &str = "the limits and the classifier compute an isomorphism onto any copy";
const B_DOMINATE: &str = "every isomorphism sends a_0 to some b_j with j >= f(n)";
const B_BRUTE: &str = "every enumerated isomorphism yields a dominator of f";

fn boxes(ctx: &Context<'_>) -> Vec<ClaimResult> {
    let ids = ["boxes.threshold_split", "boxes.canonical_iso", "boxes.dominator", "boxes.iso_with_modulus", "boxes.domination", "boxes.full_enumeration"];
    let anchors = [B_SPLIT, B_CANON, B_DOM, B_MOD, B_DOMINATE, B_BRUTE];
    let pair = match ctx.box_pair() {
        Ok(p) => p,
        Err(e) => return ids.iter().zip(anchors).map(|(id, a)| ClaimResult::fail(id, a, e.to_string(), error_payload(&e))).collect(),
    };
    let f = pair.approx.limits();
    let seed = ctx.scenario.seed;
    vec![
        claim(ids[0], B_SPLIT, || {
            let prof = threshold_profile(&pair)?;
            Ok(ClaimResult::pass(ids[0], B_SPLIT, format!("{} boxes classified", prof.classify_calls))
                .with_witness(serde_json::to_value(&prof.sorts).expect("serializable")))
        }),
        claim(ids[1], B_CANON, || {
            let g = boxes_canonical_iso(&pair)?;
            Ok(match verify_isomorphism(&pair.m, &pair.n, &g)? {
                Ok(()) => ClaimResult::pass(ids[1], B_CANON, format!("{} elements per side", pair.m.len())),
                Err(m) => ClaimResult::fail(ids[1], B_CANON, m.0.clone(), json!({ "violated": "isomorphism", "mismatch": m.0 })),
            })
        }),
        claim(ids[2], B_DOM, || {
            let g = extract_dominator(&boxes_canonical_iso(&pair)?, &pair)?;
            Ok(if g == f.values {
                ClaimResult::pass(ids[2], B_DOM, format!("g = f = {g:?}"))
            } else {
                ClaimResult::fail(ids[2], B_DOM, format!("g = {g:?}, f = {:?}", f.values), json!({ "dominator": g, "limits": f.values }))
            })
        }),
        claim(ids[3], B_MOD, || {
            let (copy, _) = scramble(&pair.n, seed);
            let oracle = RankOracle::new();
            iso_with_modulus(&pair, &copy, &f, &oracle)?;
            Ok(ClaimResult::pass(ids[3], B_MOD, format!("{} classifier calls", oracle.calls())))
        }),
        claim(ids[4], B_DOMINATE, || {
            let mut images = Vec::new();
            for n in 0..pair.sorts() {
                let tag = vocab::sort_tag(n);
                let (ml, mids) = extract_sort_with_map(&pair.m, &tag)?;
                let (nl, nids) = extract_sort_with_map(&pair.n, &tag)?;
                let spine = &pair.spine[n as usize];
                let a0 = mids.iter().position(|&x| x == spine[0]).expect("a_0 lies in its sort") as u32;
                let mut js = Vec::new();
                for y in image_set(&ml, &nl, a0, SearchConfig::unbounded())? {
                    let y = nids[y as usize];
                    match spine.iter().position(|&b| b == y) {
                        Some(j) if j as u32 >= f.get(n) => js.push(j as u32),
                        j => {
                            return Ok(ClaimResult::fail(ids[4], B_DOMINATE, format!("sort {n}: a_0 can map to {y}"),
                                json!({ "sort": n, "image": y, "spine_index": j, "limit": f.get(n) })));
                        }
                    }
                }
                images.push(js);
            }
            Ok(ClaimResult::pass(ids[4], B_DOMINATE, "possible images of each a_0 enumerated").with_witness(json!({ "spine_indices": images })))
        }),
        claim(ids[5], B_BRUTE, || {
            let size = pair.m.len() + pair.n.len();
            if size > ctx.brute_cap {
                return Ok(ClaimResult::skipped(ids[5], B_BRUTE, format!("combined size {size} exceeds the brute-force cap {}", ctx.brute_cap)));
            }
            let all = find_isomorphisms_with(&pair.m, &pair.n, None, SearchConfig::with_cap(ctx.brute_cap))?;
            for g in &all {
                let dom = extract_dominator(g, &pair)?;
                if dom.iter().zip(&f.values).any(|(a, b)| a < b) {
                    return Ok(ClaimResult::fail(ids[5], B_BRUTE, format!("dominator {dom:?} below {:?}", f.values), json!({ "dominator": dom })));
                }
            }
            Ok(ClaimResult::pass(ids[5], B_BRUTE, format!("{} isomorphisms", all.len())))
        }),
    ]
}

// -------------------------------------------------------------- composite

const C_PART: &str = "R marks exactly the union of E-trees in both composites";
const C_GLUE: &str = "the limits and the classifier compute an isomorphism between the easy and the hard composite";
const C_DECODE: &str = "the dominator read off that isomorphism decodes to D";
const C_CALLS: &str = "matching the shuffled union consults the classifier at least once per component";

fn composite(ctx: &Context<'_>) -> Vec<ClaimResult> {
    let ids = ["composite.partition", "composite.glued_iso", "composite.decode", "composite.oracle_calls"];
    let anchors = [C_PART, C_GLUE, C_DECODE, C_CALLS];
    let sc = ctx.scenario;
    let Some(d) = sc.spec() else {
        return ids.iter().zip(anchors).map(|(id, a)| ClaimResult::skipped(id, a, "the scenario gives a table, not a set")).collect();
    };
    let built = (|| {
        let approx = sc.approx().map_err(|e| CoderError::Caps(e.to_string()))?;
        let pair = build_boxes(&approx, sc.box_caps())?;
        let mut easy = build_composite(&pair, Side::Easy, sc.s_omega_caps(), sc.seed)?;
        let mut hard = build_composite(&pair, Side::Hard, sc.s_omega_caps(), sc.seed)?;
        if let Some(l) = ctx.loaded(ScenarioKind::Composite) {
            easy.structure = l.first.clone();
            hard.structure = l.second.clone();
        }
        Ok::<_, CoderError>((pair, easy, hard))
    })();
    let (pair, easy, hard) = match built {
        Ok(b) => b,
        Err(e) => return ids.iter().zip(anchors).map(|(id, a)| ClaimResult::fail(id, a, e.to_string(), error_payload(&e))).collect(),
    };
    let f = self_modulus(d);
    let glue = glue_witness(&pair, &easy, &hard, &f);
    vec![
        claim(ids[0], C_PART, || {
            for (side, c) in [("easy", &easy), ("hard", &hard)] {
                if let Some(cx) = partition_violation(c) {
                    return Ok(ClaimResult::fail(ids[0], C_PART, format!("{side}: R is not the upper block"), json!({ "side": side, "element": cx })));
                }
            }
            Ok(ClaimResult::pass(ids[0], C_PART, format!("{} + {} elements", easy.coding_len, easy.structure.len() - easy.coding_len)))
        }),
        claim(ids[1], C_GLUE, || {
            let g = glue.clone()?;
            Ok(ClaimResult::pass(ids[1], C_GLUE, format!("{} classifier calls on the box sides", g.coding_oracle_calls)))
        }),
        claim(ids[2], C_DECODE, || {
            let g = glue.clone()?;
            let (code, _) = easy.split_witness(&hard, &g.witness)?;
            let dom = extract_dominator(&code, &pair)?;
            let got = modulus_decode(&dom, d)?;
            Ok(set_result(ids[2], C_DECODE, &d.members(), &got).with_witness(json!({ "dominator": dom, "modulus": f.values })))
        }),
        claim(ids[3], C_CALLS, || {
            let g = glue.clone()?;
            let detail = format!("{} calls for {} components", g.s_omega_oracle_calls, g.s_omega_components);
            Ok(if g.s_omega_oracle_calls >= g.s_omega_components {
                ClaimResult::pass(ids[3], C_CALLS, detail)
            } else {
                ClaimResult::fail(ids[3], C_CALLS, detail, json!({ "calls": g.s_omega_oracle_calls, "components": g.s_omega_components }))
            })
        }),
    ]
}

/// An element on the wrong side of the `R` split, if any.
fn partition_violation(c: &CompositeStructure) -> Option<u32> {
    let r = c.structure.unary_rel(vocab::PART).cloned().unwrap_or_default();
    c.structure.universe().iter().copied().find(|&x| r.contains(&x) != (x as usize >= c.coding_len))
}

// -------------------------------------------------------------- primality

const P_BOX: &str = "each sampled tuple of the box structure has an isolating formula whose satisfiers are its orbit";
const P_WARM: &str = "each sampled tuple of the stage-coding structure has an isolating formula whose satisfiers are its orbit";

fn primality(ctx: &Context<'_>) -> Vec<ClaimResult> {
    let budget = TupleBudget { samples: 24, seed: ctx.scenario.seed };
    let report = |id: &str, anchor: &'static str, r: crate::coders::PrimalityReport| {
        if r.clean() {
            ClaimResult::pass(id, anchor, format!("{} tuples checked", r.checked))
        } else {
            let first = &r.mismatches[0];
            ClaimResult::fail(id, anchor, format!("{} of {} tuples mismatch", r.mismatches.len(), r.checked), serde_json::to_value(first).expect("serializable"))
        }
    };
    let mut out = vec![claim("primality.boxes", P_BOX, || {
        let pair = ctx.box_pair()?;
        Ok(report("primality.boxes", P_BOX, primality_report(PrimalityTarget::Boxes(&pair), budget)?))
    })];
    out.push(match ctx.scenario.spec() {
        None => ClaimResult::skipped("primality.warmup", P_WARM, "the scenario gives a table, not a set"),
        Some(d) => claim("primality.warmup", P_WARM, || {
            let pair = ctx.warmup_pair(d)?;
            Ok(report("primality.warmup", P_WARM, primality_report(PrimalityTarget::Warmup(&pair), budget)?))
        }),
    });
    out
}

// ------------------------------------------------------------------ logic

const L_SEP: &str = "phi_n holds in E(n) and fails in A(n)";
const L_STABLE: &str = "classifier and phi_n verdicts do not change from width w to w+1";
const L_BOUNDED: &str = "truth in a stage-coding structure is decided on its bounded substructure";
const L_EF: &str = "Duplicator winning k rounds implies agreement on every corpus sentence of rank at most k";

fn logic(ctx: &Context<'_>) -> Vec<ClaimResult> {
    let c = ctx.scenario.caps;
    let trunc = |w: u32| TruncationParams { w, limit_index_cap: c.limit_index_cap, rank_cap: c.n_max };
    vec![
        claim("logic.separation", L_SEP, || {
            let mut checked = 0;
            for n in 1..=c.n_max {
                let phi = phi_n(n)?;
                for w in 1..=c.w {
                    for kind in [Kind::A, Kind::E] {
                        let t = build_tree(TreeKind::finite(kind, n), &trunc(w))?.to_structure();
                        let holds = Evaluator::new(&t).eval_closed(&phi)?;
                        if holds != (kind == Kind::E) {
                            return Ok(ClaimResult::fail("logic.separation", L_SEP, format!("phi_{n} is {holds} in {kind}({n}) at w = {w}"),
                                json!({ "n": n, "w": w, "kind": kind, "holds": holds })));
                        }
                        checked += 1;
                    }
                }
            }
            Ok(ClaimResult::pass("logic.separation", L_SEP, format!("{checked} trees")))
        }),
        claim("logic.truncation_stability", L_STABLE, || {
            for w in 1..=c.w {
                for n in 1..=c.n_max {
                    let phi = phi_n(n)?;
                    for kind in [Kind::A, Kind::E] {
                        let verdict = |w: u32| -> Result<(Kind, bool), CoderError> {
                            let t = build_tree(TreeKind::finite(kind, n), &trunc(w))?;
                            Ok((classify(&t, n)?, Evaluator::new(&t.to_structure()).eval_closed(&phi)?))
                        };
                        let (a, b) = (verdict(w)?, verdict(w + 1)?);
                        if a != b || a.0 != kind {
                            return Ok(ClaimResult::fail("logic.truncation_stability", L_STABLE, format!("{kind}({n}) changes between w = {w} and {}", w + 1),
                                json!({ "tree": format!("{kind}({n})"), "w": w, "at_w": a, "at_w_plus_1": b })));
                        }
                    }
                }
                let indices = (0..c.limit_index_cap).map(LimitIndex::Finite).chain([LimitIndex::Infinity]);
                for k in indices {
                    let read = |w: u32| -> Result<_, CoderError> { Ok(classify_limit(&build_tree(TreeKind::L(k), &trunc(w))?, &trunc(w))?) };
                    let (a, b) = (read(w)?, read(w + 1)?);
                    if a != b {
                        return Ok(ClaimResult::fail("logic.truncation_stability", L_STABLE, format!("L({k}) reads {a} at w = {w} and {b} at w = {}", w + 1),
                            json!({ "tree": format!("L({k})"), "w": w })));
                    }
                }
            }
            Ok(ClaimResult::pass("logic.truncation_stability", L_STABLE, format!("widths 1..={} against the next width", c.w)))
        }),
        claim("logic.bounded_substructure", L_BOUNDED, || {
            let fallback = CeSetSpec::new([(0, 1)], 2, 2)?;
            let d = ctx.scenario.spec().unwrap_or(&fallback);
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.scenario.seed);
            let mut specs = vec![d.clone()];
            specs.extend((0..3).map(|_| random_ce_spec(&mut rng, d.index_cap, d.horizon)));
            let pairs = specs.iter().map(|d| build_warmup(d, ctx.scenario.warmup_caps())).collect::<Result<Vec<_>, _>>()?;
            let pool: Vec<&FiniteStructure> = pairs.iter().flat_map(|p| [&p.m, &p.n]).collect();
            let (agree, skipped) = bounded_agreement(&pool, CorpusConfig { max_rank: 3, per_level: 24 })?;
            Ok(match agree {
                Ok(n) => ClaimResult::pass("logic.bounded_substructure", L_BOUNDED, format!("{n} sentence evaluations agree, {skipped} need more plain elements")),
                Err(cx) => ClaimResult::fail("logic.bounded_substructure", L_BOUNDED, "bounded and full evaluation disagree", cx),
            })
        }),
        claim("logic.ef_consistency", L_EF, || {
            let (n, cx) = ef_consistency(ctx.scenario.seed, 10, ctx.brute_cap)?;
            Ok(match cx {
                None => ClaimResult::pass("logic.ef_consistency", L_EF, format!("{n} equivalent pairs checked")),
                Some(cx) => ClaimResult::fail("logic.ef_consistency", L_EF, "an EF-equivalent pair disagrees on a sentence", cx),
            })
        }),
    ]
}

/// Compares bounded and full evaluation of every corpus sentence on each
/// structure. Returns the number of agreeing evaluations or the first
/// disagreement, and how many evaluations were skipped for lack of plain
/// elements.
pub fn bounded_agreement(structures: &[&FiniteStructure], cfg: CorpusConfig) -> Result<(Result<usize, Value>, usize), CoderError> {
    let corpus = formula_corpus(&Vocabulary::of(structures), structures, cfg)?;
    let mut agree = 0;
    let mut skipped = 0;
    for (i, s) in structures.iter().enumerate() {
        let full = Evaluator::new(s);
        for phi in &corpus {
            let bounded = match eval_via_bounded_substructure(phi, s, &[], &[]) {
                Ok(b) => b,
                Err(LogicError::TooFewPlain { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let truth = full.eval_closed(phi)?;
            if bounded != truth {
                return Ok((Err(json!({ "structure": i, "sentence": phi.to_string(), "full": truth, "bounded": bounded })), skipped));
            }
            agree += 1;
        }
    }
    Ok((Ok(agree), skipped))
}

/// Random pairs within `cap`: whenever Duplicator wins `k` rounds, every
/// corpus sentence of rank at most `k` gets the same verdict on both sides.
/// Returns the number of equivalent pairs and the first counterexample.
pub fn ef_consistency(seed: u64, pairs: usize, cap: usize) -> Result<(usize, Option<Value>), CoderError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut equivalent = 0;
    let half = (cap / 2).clamp(1, 5);
    for _ in 0..pairs {
        let size = rng.gen_range(1..=half);
        let (a, b) = random_pair(&mut rng, size, &["P"], &["E"], 0.4);
        let k = rng.gen_range(0..=2);
        if !ef_equivalent_with(&a, &b, k, EfLimits { size_cap: cap, ..EfLimits::default() })? {
            continue;
        }
        equivalent += 1;
        let corpus = formula_corpus(&Vocabulary::of(&[&a, &b]), &[&a, &b], CorpusConfig { max_rank: k, per_level: 32 })?;
        let (ea, eb) = (Evaluator::new(&a), Evaluator::new(&b));
        for phi in corpus {
            let (va, vb) = (ea.eval_closed(&phi)?, eb.eval_closed(&phi)?);
            if va != vb {
                return Ok((equivalent, Some(json!({ "k": k, "sentence": phi.to_string(), "left": a, "right": b }))));
            }
        }
    }
    Ok((equivalent, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coders::{SOmegaCaps, WarmupCaps};
    use crate::model::StructureBuilder;

    fn pair() -> WarmupPair {
        let d = CeSetSpec::new([(1, 2)], 3, 2).unwrap();
        build_warmup(&d, WarmupCaps::for_spec(&d)).unwrap()
    }

    #[test]
    fn layout_holds_for_built_pairs() {
        assert_eq!(stage_layout_violation(&pair()), None);
    }

    #[test]
    fn moved_stage_marker_is_named() {
        let mut p = pair();
        let holder = p.element(1, 2);
        let mut b = StructureBuilder::new();
        b.add_elements(p.n.len());
        for (k, rel) in p.n.unary() {
            b.declare_unary(k);
            for &x in rel {
                b.insert_unary(k, if x == holder && vocab::parse_stage(k).is_some() { holder + 1 } else { x });
            }
        }
        p.n = b.build().unwrap();
        let cx = stage_layout_violation(&p).unwrap();
        assert_eq!(cx["relation"], "U2");
        assert_eq!(cx["side"], "N");
        assert_eq!(cx["missing"], json!([holder]));
    }

    #[test]
    fn partition_is_checked_both_ways() {
        let approx = crate::effective::MonotoneApprox::zero(1, 0, 1);
        let boxes = build_boxes(&approx, crate::coders::BoxCaps { w: 1, levels: 1, i_max: None }).unwrap();
        let c = build_composite(&boxes, Side::Hard, SOmegaCaps { n_max: 1, w: 1 }, 0).unwrap();
        assert_eq!(partition_violation(&c), None);
        let mut bad = c.clone();
        bad.structure = bad.structure.with_unary(vocab::PART, [0]);
        assert_eq!(partition_violation(&bad), Some(0));
    }

    #[test]
    fn suites_expand() {
        assert_eq!(Suite::All.expand().len(), 5);
        assert_eq!(Suite::Logic.expand(), vec![Suite::Logic]);
    }
}
