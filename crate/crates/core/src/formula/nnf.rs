use super::{Atom, Expr, Formula};
use crate::error::{Error, Result};

/// Pushes negations down to the atoms, where they are absorbed by reversing
/// the comparison.
///
/// `!(a U[0,b] c)` is rewritten to `G[0,b] !c || (!c U[0,b] (!a && !c))`.
/// That identity does not hold for windows with a positive lower bound under
/// pointwise semantics, so a negated until with `a > 0` keeps its `Not` (with
/// both operands normalized).
pub fn negation_normal_form(f: &Formula) -> Formula {
    pos(f)
}

fn pos(f: &Formula) -> Formula {
    match f {
        Formula::Atom(a) => Formula::Atom(a.clone()),
        Formula::Not(g) => neg(g),
        Formula::And(a, b) => Formula::and(pos(a), pos(b)),
        Formula::Or(a, b) => Formula::or(pos(a), pos(b)),
        Formula::Always(w, a) => Formula::always(*w, pos(a)),
        Formula::Eventually(w, a) => Formula::eventually(*w, pos(a)),
        Formula::Until(w, a, b) => Formula::until(*w, pos(a), pos(b)),
        Formula::Freeze(v, a) => Formula::Freeze(*v, Box::new(pos(a))),
    }
}

fn neg(f: &Formula) -> Formula {
    match f {
        Formula::Atom(a) => Formula::Atom(a.negated()),
        Formula::Not(g) => pos(g),
        Formula::And(a, b) => Formula::or(neg(a), neg(b)),
        Formula::Or(a, b) => Formula::and(neg(a), neg(b)),
        Formula::Always(w, a) => Formula::eventually(*w, neg(a)),
        Formula::Eventually(w, a) => Formula::always(*w, neg(a)),
        Formula::Until(w, a, b) if w.a == 0.0 => Formula::or(
            Formula::always(*w, neg(b)),
            Formula::until(*w, neg(b), Formula::and(neg(a), neg(b))),
        ),
        Formula::Until(w, a, b) => Formula::not(Formula::until(*w, pos(a), pos(b))),
        Formula::Freeze(v, a) => Formula::Freeze(*v, Box::new(neg(a))),
    }
}

fn shift(e: &Expr, r: f64) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(c + r),
        other => Expr::add(other.clone(), Expr::Const(r)),
    }
}

/// Replaces every atom `lhs > rhs` by `lhs > rhs + r` and every `lhs < rhs`
/// by `lhs < rhs - r`, so that the result holds only where the robustness of
/// the input is at least `r` and fails only where it is at most `r`.
///
/// The input must be in negation normal form; a `Not` directly above an until
/// is handled through `T(!g, r) = !T(g, -r)`.
pub fn threshold_transform(f: &Formula, r: f64) -> Result<Formula> {
    if r == 0.0 {
        return check_nnf(f).map(|_| f.clone());
    }
    transform(f, r)
}

fn check_nnf(f: &Formula) -> Result<()> {
    match f {
        Formula::Not(g) if matches!(**g, Formula::Until(..)) => {
            g.children().into_iter().try_for_each(check_nnf)
        }
        Formula::Not(_) => Err(Error::NotNegationFree),
        _ => f.children().into_iter().try_for_each(check_nnf),
    }
}

fn transform(f: &Formula, r: f64) -> Result<Formula> {
    Ok(match f {
        Formula::Atom(a) => {
            let rhs = if a.cmp.is_greater() {
                shift(&a.rhs, r)
            } else {
                shift(&a.rhs, -r)
            };
            Formula::Atom(Atom {
                lhs: a.lhs.clone(),
                cmp: a.cmp,
                rhs,
            })
        }
        Formula::Not(g) if matches!(**g, Formula::Until(..)) => Formula::not(transform(g, -r)?),
        Formula::Not(_) => return Err(Error::NotNegationFree),
        Formula::And(a, b) => Formula::and(transform(a, r)?, transform(b, r)?),
        Formula::Or(a, b) => Formula::or(transform(a, r)?, transform(b, r)?),
        Formula::Always(w, a) => Formula::always(*w, transform(a, r)?),
        Formula::Eventually(w, a) => Formula::eventually(*w, transform(a, r)?),
        Formula::Until(w, a, b) => Formula::until(*w, transform(a, r)?, transform(b, r)?),
        Formula::Freeze(v, a) => Formula::Freeze(*v, Box::new(transform(a, r)?)),
    })
}
