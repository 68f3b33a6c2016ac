//! Parse and evaluate first-order sentences, play Ehrenfeucht–Fraïssé games
//! and evaluate on a bounded substructure of a purely unary structure.

use std::error::Error;

use catwork::logic::{ef_equivalent, eval_via_bounded_substructure, parse_formula, Evaluator};
use catwork::model::StructureBuilder;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // A directed path 0 -> 1 -> 2 and a directed 3-cycle.
    let graph = |edges: &[(u32, u32)]| {
        let mut b = StructureBuilder::new();
        b.add_elements(3);
        b.declare_binary("E");
        for &(x, y) in edges {
            b.insert_binary("E", x, y);
        }
        b.build()
    };
    let path = graph(&[(0, 1), (1, 2)])?;
    let cycle = graph(&[(0, 1), (1, 2), (2, 0)])?;
    let source = parse_formula("(exists x (not (exists y (E y x))))")?;
    println!("{source}: path {}, cycle {}", Evaluator::new(&path).eval_closed(&source)?, Evaluator::new(&cycle).eval_closed(&source)?);
    for k in 0..=2 {
        println!("EF game with {k} rounds: Duplicator wins = {}", ef_equivalent(&path, &cycle, k)?);
    }

    let mut b = StructureBuilder::new();
    b.add_elements(12);
    b.declare_unary("U0");
    b.insert_unary("U0", 4);
    let unary = b.build()?;
    let phi = parse_formula("(exists x (exists y (and (not (= x y)) (not (U0 x)) (not (U0 y)))))")?;
    let bounded = eval_via_bounded_substructure(&phi, &unary, &[], &[])?;
    assert_eq!(bounded, Evaluator::new(&unary).eval_closed(&phi)?);
    println!("two plain elements exist: {bounded} (decided on a bounded substructure)");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
