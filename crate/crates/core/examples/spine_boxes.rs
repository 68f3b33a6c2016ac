//! Spine-and-box structures driven by a monotone approximation: profile the
//! box kinds, build an isomorphism from the limits and read a dominator back.

use std::error::Error;

use catwork::baf::RankOracle;
use catwork::coders::{boxes_canonical_iso, build_boxes, extract_dominator, iso_with_modulus, threshold_profile, BoxCaps};
use catwork::effective::{Cell, MonotoneApprox};
use catwork::model::{check_isomorphism, scramble};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // Two sorts with limits 2 and 1.
    let cell = |value, level| Cell { value, level };
    let a = MonotoneApprox {
        index_cap: 2,
        horizon: 2,
        level_cap: 2,
        table: vec![vec![cell(0, 0), cell(1, 1), cell(2, 2)], vec![cell(1, 2), cell(1, 0), cell(1, 1)]],
    };
    let pair = build_boxes(&a, BoxCaps { w: 2, levels: 2, i_max: None })?;
    println!("{} elements per side", pair.m.len());
    for sp in threshold_profile(&pair)?.sorts {
        println!("sort {}: f = {}, thresholds {:?}, all-A tail {:?}", sp.n, sp.f, sp.thresholds, sp.all_a_tail);
    }
    let g = boxes_canonical_iso(&pair)?;
    println!("dominator from the shift map: {:?}", extract_dominator(&g, &pair)?);

    let (copy, _) = scramble(&pair.n, 9);
    let oracle = RankOracle::new();
    let h = iso_with_modulus(&pair, &copy, &a.limits(), &oracle)?;
    assert!(check_isomorphism(&pair.n, &copy, &h)?);
    println!("isomorphism onto a shuffled copy after {} classifier calls", oracle.calls());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
