//! Encode a set into an easy and a hard composite, match them with the limits
//! and the classifier, and decode the set from the matching.

use std::error::Error;

use catwork::coders::{end_to_end, PipelineCaps};
use catwork::effective::CeSetSpec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for d in [CeSetSpec::new([(0, 2), (2, 1)], 3, 3)?, CeSetSpec::empty(2, 2)] {
        let r = end_to_end(&d, PipelineCaps::default(), 1)?;
        println!(
            "D = {}: recovered {:?} from dominator {:?}; {} elements; {} classifier calls for {} shuffled components",
            r.spec, r.recovered, r.dominator, r.elements, r.s_omega_oracle_calls, r.s_omega_components
        );
        assert!(r.exact);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
