use std::collections::BTreeSet;
use std::fmt;

/// A freeze variable `sK*H`: signal dimension `dim` (1-based) frozen by the
/// binder with occurrence tag `tag`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreezeVar {
    pub dim: usize,
    pub tag: u32,
}

impl FreezeVar {
    pub fn new(dim: usize, tag: u32) -> Self {
        FreezeVar { dim, tag }
    }
}

impl fmt::Display for FreezeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}*{}", self.dim, self.tag)
    }
}

/// Arithmetic over current signal values and frozen values.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Current value of a signal dimension (1-based).
    Signal(usize),
    Frozen(FreezeVar),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

/// Closed real range used for conservative bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn point(v: f64) -> Self {
        Range { lo: v, hi: v }
    }

    pub fn hull(self, other: Range) -> Range {
        Range {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn neg(self) -> Range {
        Range {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    fn from_corners(c: [f64; 4]) -> Range {
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Range { lo, hi }
    }
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn signal(dim: usize) -> Expr {
        Expr::Signal(dim)
    }

    pub fn frozen(dim: usize, tag: u32) -> Expr {
        Expr::Frozen(FreezeVar::new(dim, tag))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn abs(a: Expr) -> Expr {
        Expr::Abs(Box::new(a))
    }

    /// Evaluates with caller-supplied lookups for signal dimensions and
    /// frozen variables.
    pub fn eval<S, Z>(&self, signal: &S, frozen: &Z) -> f64
    where
        S: Fn(usize) -> f64 + ?Sized,
        Z: Fn(FreezeVar) -> f64 + ?Sized,
    {
        match self {
            Expr::Const(c) => *c,
            Expr::Signal(d) => signal(*d),
            Expr::Frozen(v) => frozen(*v),
            Expr::Neg(a) => -a.eval(signal, frozen),
            Expr::Add(a, b) => a.eval(signal, frozen) + b.eval(signal, frozen),
            Expr::Sub(a, b) => a.eval(signal, frozen) - b.eval(signal, frozen),
            Expr::Mul(a, b) => a.eval(signal, frozen) * b.eval(signal, frozen),
            Expr::Div(a, b) => a.eval(signal, frozen) / b.eval(signal, frozen),
            Expr::Abs(a) => a.eval(signal, frozen).abs(),
            Expr::Min(a, b) => a.eval(signal, frozen).min(b.eval(signal, frozen)),
            Expr::Max(a, b) => a.eval(signal, frozen).max(b.eval(signal, frozen)),
        }
    }

    /// Interval extension of [`Expr::eval`]. Sound (never narrower than the
    /// true image) for any boxes of inputs.
    pub fn eval_range<S, Z>(&self, signal: &S, frozen: &Z) -> Range
    where
        S: Fn(usize) -> Range + ?Sized,
        Z: Fn(FreezeVar) -> Range + ?Sized,
    {
        match self {
            Expr::Const(c) => Range::point(*c),
            Expr::Signal(d) => signal(*d),
            Expr::Frozen(v) => frozen(*v),
            Expr::Neg(a) => a.eval_range(signal, frozen).neg(),
            Expr::Add(a, b) => {
                let (x, y) = (a.eval_range(signal, frozen), b.eval_range(signal, frozen));
                Range {
                    lo: x.lo + y.lo,
                    hi: x.hi + y.hi,
                }
            }
            Expr::Sub(a, b) => {
                let (x, y) = (a.eval_range(signal, frozen), b.eval_range(signal, frozen));
                Range {
                    lo: x.lo - y.hi,
                    hi: x.hi - y.lo,
                }
            }
            Expr::Mul(a, b) => {
                let (x, y) = (a.eval_range(signal, frozen), b.eval_range(signal, frozen));
                Range::from_corners([x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi])
            }
            Expr::Div(a, b) => {
                let (x, y) = (a.eval_range(signal, frozen), b.eval_range(signal, frozen));
                if y.lo <= 0.0 && y.hi >= 0.0 {
                    Range {
                        lo: f64::NEG_INFINITY,
                        hi: f64::INFINITY,
                    }
                } else {
                    Range::from_corners([x.lo / y.lo, x.lo / y.hi, x.hi / y.lo, x.hi / y.hi])
                }
            }
            Expr::Abs(a) => {
                let x = a.eval_range(signal, frozen);
                if x.lo >= 0.0 {
                    x
                } else if x.hi <= 0.0 {
                    x.neg()
                } else {
                    Range {
                        lo: 0.0,
                        hi: x.hi.max(-x.lo),
                    }
                }
            }
            Expr::Min(a, b) => {
                let (x, y) = (a.eval_range(signal, frozen), b.eval_range(signal, frozen));
                Range {
                    lo: x.lo.min(y.lo),
                    hi: x.hi.min(y.hi),
                }
            }
            Expr::Max(a, b) => {
                let (x, y) = (a.eval_range(signal, frozen), b.eval_range(signal, frozen));
                Range {
                    lo: x.lo.max(y.lo),
                    hi: x.hi.max(y.hi),
                }
            }
        }
    }

    fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Signal(_) | Expr::Frozen(_) => vec![],
            Expr::Neg(a) | Expr::Abs(a) => vec![a],
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => vec![a, b],
        }
    }

    pub fn has_signal(&self) -> bool {
        matches!(self, Expr::Signal(_)) || self.children().into_iter().any(Expr::has_signal)
    }

    pub fn has_frozen(&self) -> bool {
        matches!(self, Expr::Frozen(_)) || self.children().into_iter().any(Expr::has_frozen)
    }

    pub fn frozen_vars(&self, out: &mut BTreeSet<FreezeVar>) {
        if let Expr::Frozen(v) = self {
            out.insert(*v);
        }
        for c in self.children() {
            c.frozen_vars(out);
        }
    }

    pub fn signal_dims(&self, out: &mut BTreeSet<usize>) {
        if let Expr::Signal(d) = self {
            out.insert(*d);
        }
        for c in self.children() {
            c.signal_dims(out);
        }
    }

    /// Decomposes the expression as a monotone function of one signal-only
    /// sub-expression (the sort key). Returns the key and `true` when the
    /// expression is non-decreasing in it, `false` when non-increasing.
    ///
    /// Every other operand on the path must be free of signal variables, and
    /// scaling factors must be signal- and freeze-free with a known sign.
    pub fn monotone_key(&self) -> Option<(&Expr, bool)> {
        if !self.has_signal() {
            return None;
        }
        if !self.has_frozen() && !matches!(self, Expr::Abs(_) | Expr::Min(..) | Expr::Max(..)) {
            // Pure signal expressions are the key themselves.
            return Some((self, true));
        }
        match self {
            Expr::Neg(a) => a.monotone_key().map(|(k, up)| (k, !up)),
            Expr::Add(a, b) => {
                if !a.has_signal() {
                    b.monotone_key()
                } else if !b.has_signal() {
                    a.monotone_key()
                } else {
                    None
                }
            }
            Expr::Sub(a, b) => {
                if !b.has_signal() {
                    a.monotone_key()
                } else if !a.has_signal() {
                    b.monotone_key().map(|(k, up)| (k, !up))
                } else {
                    None
                }
            }
            Expr::Mul(a, b) => {
                let (inner, factor) = if b.has_signal() { (b, a) } else { (a, b) };
                if factor.has_signal() || factor.has_frozen() {
                    return None;
                }
                let c = factor.eval(&|_| 0.0, &|_| 0.0);
                let (k, up) = inner.monotone_key()?;
                if c > 0.0 {
                    Some((k, up))
                } else if c < 0.0 {
                    Some((k, !up))
                } else {
                    None
                }
            }
            Expr::Div(a, b) => {
                if b.has_signal() || b.has_frozen() {
                    return None;
                }
                let c = b.eval(&|_| 0.0, &|_| 0.0);
                let (k, up) = a.monotone_key()?;
                if c > 0.0 {
                    Some((k, up))
                } else if c < 0.0 {
                    Some((k, !up))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            _ => 4,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{})", -c)
            }
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Signal(d) => write!(f, "s{d}"),
            Expr::Frozen(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_operand(f, a, 4)
            }
            Expr::Add(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, " + ")?;
                write_operand(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, " - ")?;
                write_operand(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, " * ")?;
                write_operand(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, " / ")?;
                write_operand(f, b, 3)
            }
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Min(a, b) => write!(f, "min({a}, {b})"),
            Expr::Max(a, b) => write!(f, "max({a}, {b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval0(e: &Expr, s: f64, z: f64) -> f64 {
        e.eval(&|_| s, &|_| z)
    }

    #[test]
    fn evaluates_arithmetic() {
        let e = Expr::mul(
            Expr::constant(0.4),
            Expr::add(Expr::frozen(1, 1), Expr::frozen(1, 2)),
        );
        assert_eq!(eval0(&e, 0.0, 3.0), 0.4 * 6.0);
        let m = Expr::Min(Box::new(Expr::signal(1)), Box::new(Expr::constant(2.0)));
        assert_eq!(eval0(&m, 5.0, 0.0), 2.0);
    }

    #[test]
    fn monotone_key_shapes() {
        let s = Expr::signal(1);
        let z = Expr::frozen(1, 1);
        let d = Expr::sub(z.clone(), s.clone());
        let (k, up) = d.monotone_key().unwrap();
        assert_eq!(k, &s);
        assert!(!up);
        let scaled = Expr::mul(Expr::constant(-2.0), Expr::sub(s.clone(), z.clone()));
        assert_eq!(scaled.monotone_key().map(|(_, u)| u), Some(false));
        assert!(Expr::mul(z.clone(), s.clone()).monotone_key().is_none());
        assert!(Expr::abs(d).monotone_key().is_none());
    }

    #[test]
    fn range_contains_samples() {
        let e = Expr::abs(Expr::sub(Expr::frozen(1, 1), Expr::signal(1)));
        let r = e.eval_range(&|_| Range { lo: -1.0, hi: 2.0 }, &|_| Range {
            lo: 0.5,
            hi: 0.5,
        });
        assert_eq!(r, Range { lo: 0.0, hi: 1.5 });
    }
}
