//! STL* formulas: syntax, parsing, normalization and the syntax tree.

mod expr;
mod nnf;
mod parser;
mod tree;

use std::collections::BTreeSet;
use std::fmt;

pub use expr::{Expr, FreezeVar, Range};
pub use nnf::{negation_normal_form, threshold_transform};
pub use parser::parse;
pub use tree::{NodeKind, Scope, SyntaxTree, TreeNode};

/// Comparison operator of an atomic formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Ge => lhs >= rhs,
        }
    }

    /// The operator obtained by swapping the two operands.
    pub fn swapped(self) -> Cmp {
        match self {
            Cmp::Lt => Cmp::Gt,
            Cmp::Le => Cmp::Ge,
            Cmp::Gt => Cmp::Lt,
            Cmp::Ge => Cmp::Le,
        }
    }

    /// The operator of the logical negation.
    pub fn negated(self) -> Cmp {
        match self {
            Cmp::Lt => Cmp::Ge,
            Cmp::Le => Cmp::Gt,
            Cmp::Gt => Cmp::Le,
            Cmp::Ge => Cmp::Lt,
        }
    }

    pub fn is_greater(self) -> bool {
        matches!(self, Cmp::Gt | Cmp::Ge)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

/// Atomic formula `lhs cmp rhs` in canonical shape: `rhs` never mentions a
/// current signal value. An atom that mentions no frozen value is a signal
/// predicate, otherwise it is a signal constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub lhs: Expr,
    pub cmp: Cmp,
    pub rhs: Expr,
}

impl Atom {
    /// Builds a canonical atom from an arbitrary comparison.
    pub fn new(lhs: Expr, cmp: Cmp, rhs: Expr) -> Atom {
        match (lhs.has_signal(), rhs.has_signal()) {
            (false, true) => Atom {
                lhs: rhs,
                cmp: cmp.swapped(),
                rhs: lhs,
            },
            (true, true) => Atom {
                lhs: Expr::sub(lhs, rhs),
                cmp,
                rhs: Expr::Const(0.0),
            },
            _ => Atom { lhs, cmp, rhs },
        }
    }

    pub fn is_constraint(&self) -> bool {
        self.lhs.has_frozen() || self.rhs.has_frozen()
    }

    pub fn holds<S, Z>(&self, signal: &S, frozen: &Z) -> bool
    where
        S: Fn(usize) -> f64 + ?Sized,
        Z: Fn(FreezeVar) -> f64 + ?Sized,
    {
        self.cmp
            .holds(self.lhs.eval(signal, frozen), self.rhs.eval(signal, frozen))
    }

    /// Robustness of the atom: `lhs - rhs` for `>`/`>=`, `rhs - lhs` otherwise.
    pub fn robustness<S, Z>(&self, signal: &S, frozen: &Z) -> f64
    where
        S: Fn(usize) -> f64 + ?Sized,
        Z: Fn(FreezeVar) -> f64 + ?Sized,
    {
        let l = self.lhs.eval(signal, frozen);
        let r = self.rhs.eval(signal, frozen);
        if self.cmp.is_greater() {
            l - r
        } else {
            r - l
        }
    }

    pub fn negated(&self) -> Atom {
        Atom {
            lhs: self.lhs.clone(),
            cmp: self.cmp.negated(),
            rhs: self.rhs.clone(),
        }
    }

    pub fn frozen_vars(&self) -> BTreeSet<FreezeVar> {
        let mut out = BTreeSet::new();
        self.lhs.frozen_vars(&mut out);
        self.rhs.frozen_vars(&mut out);
        out
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.cmp.symbol(), self.rhs)
    }
}

/// Time window `[a, b]` of a temporal operator; `b` may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub a: f64,
    pub b: f64,
}

impl Window {
    pub const UNBOUNDED: Window = Window {
        a: 0.0,
        b: f64::INFINITY,
    };

    pub fn new(a: f64, b: f64) -> Window {
        Window { a, b }
    }

    pub fn is_unbounded(&self) -> bool {
        self.b.is_infinite()
    }

    /// Whether `t_j` lies in `t_i + [a, b]`.
    #[inline]
    pub fn contains(&self, t_i: f64, t_j: f64) -> bool {
        t_i + self.a <= t_j && t_j <= t_i + self.b
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_infinite() {
            if self.a == 0.0 {
                Ok(())
            } else {
                write!(f, "[{},inf]", self.a)
            }
        } else {
            write!(f, "[{},{}]", self.a, self.b)
        }
    }
}

/// STL* abstract syntax.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Always(Window, Box<Formula>),
    Eventually(Window, Box<Formula>),
    Until(Window, Box<Formula>, Box<Formula>),
    Freeze(FreezeVar, Box<Formula>),
}

#[allow(clippy::should_implement_trait)]
impl Formula {
    pub fn atom(lhs: Expr, cmp: Cmp, rhs: Expr) -> Formula {
        Formula::Atom(Atom::new(lhs, cmp, rhs))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn always(w: Window, f: Formula) -> Formula {
        Formula::Always(w, Box::new(f))
    }

    pub fn eventually(w: Window, f: Formula) -> Formula {
        Formula::Eventually(w, Box::new(f))
    }

    pub fn until(w: Window, a: Formula, b: Formula) -> Formula {
        Formula::Until(w, Box::new(a), Box::new(b))
    }

    pub fn freeze(dim: usize, tag: u32, f: Formula) -> Formula {
        Formula::Freeze(FreezeVar::new(dim, tag), Box::new(f))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) => vec![],
            Formula::Not(a)
            | Formula::Always(_, a)
            | Formula::Eventually(_, a)
            | Formula::Freeze(_, a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => vec![a, b],
        }
    }

    /// Number of syntax-tree nodes.
    pub fn size(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::size)
            .sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }

    /// Freeze variables bound anywhere in the formula.
    pub fn freeze_vars(&self) -> BTreeSet<FreezeVar> {
        let mut out = BTreeSet::new();
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut BTreeSet<FreezeVar>) {
        if let Formula::Freeze(v, _) = self {
            out.insert(*v);
        }
        for c in self.children() {
            c.collect_binders(out);
        }
    }

    /// Highest signal dimension referenced by any atom or binder.
    pub fn max_dim(&self) -> usize {
        let own = match self {
            Formula::Atom(a) => {
                let mut dims = BTreeSet::new();
                a.lhs.signal_dims(&mut dims);
                a.rhs.signal_dims(&mut dims);
                let fz = a.frozen_vars();
                dims.into_iter()
                    .chain(fz.into_iter().map(|v| v.dim))
                    .max()
                    .unwrap_or(0)
            }
            Formula::Freeze(v, _) => v.dim,
            _ => 0,
        };
        self.children()
            .into_iter()
            .map(Formula::max_dim)
            .fold(own, usize::max)
    }

    pub fn is_negation_free(&self) -> bool {
        !matches!(self, Formula::Not(_))
            && self.children().into_iter().all(Formula::is_negation_free)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "({a})"),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::And(a, b) => write!(f, "({a} && {b})"),
            Formula::Or(a, b) => write!(f, "({a} || {b})"),
            Formula::Always(w, a) => write!(f, "G{w} {a}"),
            Formula::Eventually(w, a) => write!(f, "F{w} {a}"),
            Formula::Until(w, a, b) => write!(f, "({a} U{w} {b})"),
            Formula::Freeze(v, a) => write!(f, "(freeze({v}). {a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_atom_moves_signals_left() {
        let a = Atom::new(Expr::frozen(1, 1), Cmp::Lt, Expr::signal(1));
        assert_eq!(a.lhs, Expr::signal(1));
        assert_eq!(a.cmp, Cmp::Gt);
        assert!(a.is_constraint());
        let b = Atom::new(Expr::signal(1), Cmp::Le, Expr::signal(2));
        assert!(!b.rhs.has_signal());
        assert!(!b.is_constraint());
    }

    #[test]
    fn atom_robustness_sign() {
        let a = Atom::new(Expr::signal(1), Cmp::Ge, Expr::constant(2.0));
        assert_eq!(a.robustness(&|_| 5.0, &|_| 0.0), 3.0);
        assert_eq!(a.negated().robustness(&|_| 5.0, &|_| 0.0), -3.0);
    }

    #[test]
    fn display_reparses() {
        let src = "F (s1 >= 2 && freeze(s1*1). G[2,inf] (s1 <= 0.4 * (s1*1 + 2)))";
        let f = parse(src).unwrap();
        assert_eq!(parse(&f.to_string()).unwrap(), f);
    }
}
