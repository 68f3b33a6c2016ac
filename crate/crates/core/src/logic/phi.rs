use super::{relativize, Formula, LogicError, Var};
use crate::vocab;

/// The rank-`n` distinguishing sentence: true in `E(n)` trees, false in `A(n)`.
///
/// `phi(1) = ∃x ∃y x≠y`, and `phi(n+1) = ∃x (x is a child of the root ∧
/// ¬phi(n) bounded below x)`, the bound having depth `n`.
pub fn phi_n(n: u32) -> Result<Formula, LogicError> {
    if n == 0 {
        return Err(LogicError::RankZero);
    }
    let mut phi = Formula::exists("x", Formula::exists("y", Formula::neq("x", "y")));
    for k in 2..=n {
        let x = Var(format!("x{k}"));
        let r = Var(format!("r{k}"));
        let child_of_root = Formula::exists(
            r.clone(),
            Formula::and([Formula::rel2(vocab::EDGE, r.clone(), x.clone()), Formula::rel1(vocab::ROOT, r)]),
        );
        let inner = relativize(&phi, &x, k - 1)?;
        phi = Formula::exists(x, Formula::and([child_of_root, Formula::not(inner)]));
    }
    Ok(phi)
}
