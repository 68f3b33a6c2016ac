use super::{Formula, LogicError, Var};
use crate::vocab;

/// Region that quantifiers get bounded to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scope {
    /// The subtree below `anchor`, at most `depth` `Edge` steps down. `Root`
    /// atoms are read as "is the anchor".
    Below { anchor: Var, depth: u32 },
    /// The level-`level` box of `owner`: elements `z` with `T<level>(owner, z)`.
    /// The box carries its own `Root` tag, so `Root` atoms are kept.
    Box { owner: Var, level: u32 },
}

impl Scope {
    fn anchor(&self) -> &Var {
        match self {
            Scope::Below { anchor, .. } => anchor,
            Scope::Box { owner, .. } => owner,
        }
    }

    fn guard(&self, z: &Var) -> Formula {
        match self {
            Scope::Below { anchor, depth } => Formula::below(anchor.clone(), z.clone(), *depth),
            Scope::Box { owner, level } => Formula::rel2(&vocab::box_level(*level), owner.clone(), z.clone()),
        }
    }
}

/// Bounds every quantifier of `phi` to the subtree below `x` (depth `depth`).
pub fn relativize(phi: &Formula, x: &Var, depth: u32) -> Result<Formula, LogicError> {
    relativize_to(phi, &Scope::Below { anchor: x.clone(), depth })
}

/// As [`relativize`], with the `Below` shorthand unfolded into `Edge` chains.
pub fn relativize_expanded(phi: &Formula, x: &Var, depth: u32) -> Result<Formula, LogicError> {
    Ok(relativize(phi, x, depth)?.expand_below())
}

pub fn relativize_to(phi: &Formula, scope: &Scope) -> Result<Formula, LogicError> {
    if phi.bound_vars().contains(scope.anchor()) {
        return Err(LogicError::VariableCapture(scope.anchor().clone()));
    }
    Ok(rewrite(phi, scope))
}

fn rewrite(phi: &Formula, scope: &Scope) -> Formula {
    match phi {
        Formula::Rel { name, args } if name == vocab::ROOT && args.len() == 1 => match scope {
            Scope::Below { anchor, .. } => Formula::eq(args[0].clone(), anchor.clone()),
            Scope::Box { .. } => phi.clone(),
        },
        Formula::Not(f) => Formula::not(rewrite(f, scope)),
        Formula::And(fs) => Formula::And(fs.iter().map(|f| rewrite(f, scope)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|f| rewrite(f, scope)).collect()),
        Formula::Exists { var, body } => {
            Formula::exists(var.clone(), Formula::and([scope.guard(var), rewrite(body, scope)]))
        }
        Formula::Forall { var, body } => {
            Formula::forall(var.clone(), Formula::or([Formula::not(scope.guard(var)), rewrite(body, scope)]))
        }
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_of_single_quantifier() {
        let phi = Formula::exists("y", Formula::eq("y", "y"));
        let r = relativize_expanded(&phi, &Var::from("x"), 1).unwrap();
        assert_eq!(
            r,
            Formula::exists(
                "y",
                Formula::and([
                    Formula::or([Formula::eq("y", "x"), Formula::rel2("Edge", "x", "y")]),
                    Formula::eq("y", "y")
                ])
            )
        );
    }

    #[test]
    fn capture_is_rejected() {
        let phi = Formula::exists("x", Formula::True);
        assert!(matches!(relativize(&phi, &Var::from("x"), 2), Err(LogicError::VariableCapture(_))));
    }

    #[test]
    fn rank_is_unchanged() {
        let phi = Formula::exists("a", Formula::forall("b", Formula::rel2("Edge", "a", "b")));
        let r = relativize(&phi, &Var::from("x"), 3).unwrap();
        assert_eq!(r.quantifier_rank(), phi.quantifier_rank());
    }

    #[test]
    fn root_becomes_anchor_below_but_not_in_boxes() {
        let phi = Formula::exists("r", Formula::rel1("Root", "r"));
        let below = relativize(&phi, &Var::from("x"), 2).unwrap();
        assert!(below.to_string().contains("(= r x)"));
        let boxed = relativize_to(&phi, &Scope::Box { owner: Var::from("o"), level: 2 }).unwrap();
        assert_eq!(boxed.to_string(), "(exists r (and (T2 o r) (Root r)))");
    }
}
