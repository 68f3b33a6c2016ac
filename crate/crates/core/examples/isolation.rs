//! Write down a formula isolating a tuple of tree nodes and check that its
//! satisfiers are exactly the automorphism orbit of the tuple.

use std::error::Error;

use catwork::baf::{build_tree, isolating_formula, tuple_vars, TreeKind, TruncationParams};
use catwork::logic::Evaluator;
use catwork::model::{orbit, Element};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let tree = build_tree(TreeKind::E(2), &TruncationParams::with_width(2))?;
    let s = tree.to_structure();
    let leaf = (0..tree.len()).find(|&v| tree.children(v).is_empty() && tree.parent(v) != Some(tree.root())).expect("a deep leaf");
    for tuple in [vec![tree.root()], vec![leaf], vec![leaf, tree.parent(leaf).unwrap()]] {
        let phi = isolating_formula(&tree, &tuple, 2)?;
        let sat = Evaluator::new(&s).satisfiers(&phi, &tuple_vars(tuple.len()))?;
        let elems: Vec<Element> = tuple.iter().map(|&v| v as Element).collect();
        assert_eq!(sat, orbit(&s, &elems)?);
        println!("tuple {tuple:?}: orbit of size {}\n  {phi}", sat.len());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
