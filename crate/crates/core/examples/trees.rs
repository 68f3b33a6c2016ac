//! Build truncated back-and-forth trees, tell them apart with the classifier
//! and with the separating sentence, and read a limit-level helper tree.

use std::error::Error;

use catwork::baf::{build_tree, classify, classify_limit, tree_size, Kind, LimitIndex, TreeKind, TruncationParams};
use catwork::logic::{phi_n, Evaluator};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let t = TruncationParams { w: 2, limit_index_cap: 4, rank_cap: 4 };
    for n in 1..=3 {
        let phi = phi_n(n)?;
        for kind in [Kind::A, Kind::E] {
            let tree = build_tree(TreeKind::finite(kind, n), &t)?;
            let holds = Evaluator::new(&tree.to_structure()).eval_closed(&phi)?;
            println!(
                "{kind}({n}): {} nodes (formula {}), classified {}, phi_{n} {}",
                tree.len(),
                tree_size(TreeKind::finite(kind, n), &t),
                classify(&tree, n)?,
                if holds { "holds" } else { "fails" }
            );
            assert_eq!(holds, kind == Kind::E);
        }
    }
    for k in [LimitIndex::Finite(1), LimitIndex::Finite(3), LimitIndex::Infinity] {
        let tree = build_tree(TreeKind::L(k), &t)?;
        println!("L({k}) reads as {}", classify_limit(&tree, &t)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
