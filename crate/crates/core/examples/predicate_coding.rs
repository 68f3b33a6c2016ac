//! Code a bounded alternating predicate into a sequence of trees: the tree
//! for `x` is E exactly when the predicate holds at `x`.

use std::error::Error;

use catwork::baf::{c_sequence, classify, Kind, Matrix, SigmaPredicateSpec, TruncationParams};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // ∃y1 ∀y2: x + y1 is 0 mod 4, with y1, y2 <= 2. Fails exactly when x is 1 mod 4.
    let spec = SigmaPredicateSpec {
        rank: 2,
        bound: 2,
        domain_cap: 12,
        matrix: Matrix::Table(
            (0..12u32)
                .flat_map(|x| (0..=2).flat_map(move |a| (0..=2).map(move |b| vec![x, a, b])))
                .filter(|r| (r[0] + r[1]) % 4 == 0)
                .collect(),
        ),
    };
    let t = TruncationParams::with_width(1);
    let mut line = String::new();
    for x in 0..spec.domain_cap {
        let tree = c_sequence(&spec, x, &t)?;
        let kind = classify(&tree, spec.rank)?;
        assert_eq!(kind == Kind::E, spec.holds(x));
        line.push_str(&format!("{x}:{kind} "));
    }
    println!("{}", line.trim_end());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
