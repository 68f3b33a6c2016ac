//! Code a c.e. set into two unary structures so that any isomorphism between
//! them reveals the set, and compute an isomorphism from the set.

use std::error::Error;

use catwork::coders::{build_warmup, decode_from_warmup_iso, exhaustive_decode_check, warmup_canonical_iso, warmup_iso_with_d, WarmupCaps};
use catwork::effective::CeSetSpec;
use catwork::model::{check_isomorphism, scramble};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let d = CeSetSpec::new([(1, 3), (4, 0)], 5, 6)?;
    let pair = build_warmup(&d, WarmupCaps::for_spec(&d))?;
    println!("D = {d}: {} elements per side", pair.m.len());

    let g = warmup_canonical_iso(&pair);
    println!("shift map decodes to {:?}", decode_from_warmup_iso(&g, &pair)?);
    let cov = exhaustive_decode_check(&pair)?;
    println!("possible images of each a_0: {:?}", cov.images);
    assert!(cov.exact());

    let (copy, _) = scramble(&pair.n, 42);
    let h = warmup_iso_with_d(&pair.n, &copy, &d)?;
    assert!(check_isomorphism(&pair.n, &copy, &h)?);
    println!("D computes an isomorphism onto a shuffled copy");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
