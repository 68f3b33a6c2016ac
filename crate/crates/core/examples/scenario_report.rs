//! Drive the verification suites from a scenario document and print the report.

use std::error::Error;

use catwork::cli::{cmd_verify, Scenario, Suite};

const SCENARIO: &str = r#"{
    "name": "inline",
    "seed": 3,
    "caps": { "w": 1, "I": 4, "M": 2, "N_max": 2, "H": 3, "I_max": null, "brute_cap": 14 },
    "composite": { "entries": { "1": 2 }, "horizon": 3, "index_cap": 2 }
}"#;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let scenario = Scenario::parse(SCENARIO)?;
    for suite in [Suite::Warmup, Suite::Composite] {
        let report = cmd_verify(&scenario, suite, None)?;
        print!("{}", report.to_text());
        assert!(report.pass);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
