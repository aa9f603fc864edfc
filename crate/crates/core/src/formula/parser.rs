use std::collections::{BTreeSet, HashMap};

use super::{Atom, Cmp, Expr, Formula, FreezeVar, Window};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    /// Current value of dimension `k`.
    Signal(usize),
    /// Frozen value `sK*H`.
    Frozen(usize, u32),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 20] = [
    "->", "&&", "||", "<=", ">=", "<", ">", "!", "(", ")", "[", "]", ",", ".", ";", "=", "+", "-",
    "*", "/",
];

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| Error::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tl, tc) = (line, col);
        let start = i;
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| err(tl, tc, format!("bad number '{text}'")))?;
            col += i - start;
            out.push(Token {
                tok: Tok::Num(v),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let dim = signal_dim(&text);
            let tok = match dim {
                Some(d) if chars.get(i) == Some(&'*') => {
                    i += 1;
                    let ds = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let tag = if ds == i {
                        1
                    } else {
                        let t: String = chars[ds..i].iter().collect();
                        t.parse::<u32>()
                            .map_err(|_| err(tl, tc, format!("bad freeze tag '{t}'")))?
                    };
                    Tok::Frozen(d, tag)
                }
                Some(d) => Tok::Signal(d),
                None => Tok::Ident(text),
            };
            col += i - start;
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let sym = SYMBOLS
            .iter()
            .find(|s| rest.starts_with(**s))
            .ok_or_else(|| err(tl, tc, format!("unexpected character '{c}'")))?;
        i += sym.len();
        col += sym.len();
        out.push(Token {
            tok: Tok::Sym(sym),
            line: tl,
            col: tc,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

fn signal_dim(text: &str) -> Option<usize> {
    let rest = text.strip_prefix('s')?;
    if rest.is_empty() {
        return Some(1);
    }
    if rest.chars().all(|c| c.is_ascii_digit()) && !rest.starts_with('0') {
        return rest.parse().ok();
    }
    None
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    defs: HashMap<String, Formula>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{s}'"))
        }
    }

    fn file(&mut self) -> Result<Formula> {
        while self.is_ident("let") {
            self.bump();
            let name = match self.bump() {
                Tok::Ident(n) => n,
                _ => {
                    self.pos -= 1;
                    return self.error("expected a name after 'let'");
                }
            };
            self.expect_sym("=")?;
            let f = self.formula()?;
            self.expect_sym(";")?;
            self.defs.insert(name, f);
        }
        let f = self.formula()?;
        if *self.peek() != Tok::Eof {
            return self.error("unexpected trailing input");
        }
        Ok(f)
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.is_sym("->") {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::or(Formula::not(lhs), rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while self.is_sym("||") {
            self.bump();
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.until()?;
        while self.is_sym("&&") {
            self.bump();
            f = Formula::and(f, self.until()?);
        }
        Ok(f)
    }

    fn until(&mut self) -> Result<Formula> {
        let lhs = self.unary()?;
        if self.is_ident("U") {
            self.bump();
            let w = self.window()?;
            let rhs = self.until()?;
            return Ok(Formula::until(w, lhs, rhs));
        }
        Ok(lhs)
    }

    fn window(&mut self) -> Result<Window> {
        if !self.is_sym("[") {
            return Ok(Window::UNBOUNDED);
        }
        self.bump();
        let a = self.number()?;
        self.expect_sym(",")?;
        let b = if self.is_ident("inf") {
            self.bump();
            f64::INFINITY
        } else {
            self.number()?
        };
        self.expect_sym("]")?;
        if !(a >= 0.0 && a <= b) {
            return Err(Error::Window { a, b });
        }
        Ok(Window::new(a, b))
    }

    fn number(&mut self) -> Result<f64> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(v)
            }
            _ => self.error("expected a number"),
        }
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.is_sym("!") {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_ident("G") || self.is_ident("F") {
            let always = self.is_ident("G");
            self.bump();
            let w = self.window()?;
            let body = self.unary()?;
            return Ok(if always {
                Formula::always(w, body)
            } else {
                Formula::eventually(w, body)
            });
        }
        if self.is_ident("freeze") {
            self.bump();
            self.expect_sym("(")?;
            let v = match self.bump() {
                Tok::Frozen(d, h) => FreezeVar::new(d, h),
                _ => {
                    self.pos -= 1;
                    return self.error("expected a freeze variable such as s*1");
                }
            };
            self.expect_sym(")")?;
            self.expect_sym(".")?;
            let body = self.formula()?;
            return Ok(Formula::Freeze(v, Box::new(body)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula> {
        if let Tok::Ident(name) = self.peek().clone() {
            if let Some(f) = self.defs.get(&name) {
                let f = f.clone();
                self.bump();
                return Ok(f);
            }
        }
        let save = self.pos;
        match self.atom() {
            Ok(f) => Ok(f),
            Err(atom_err) => {
                let atom_pos = self.pos;
                self.pos = save;
                if self.is_sym("(") {
                    self.bump();
                    if let Ok(f) = self.formula() {
                        if self.is_sym(")") {
                            self.bump();
                            return Ok(f);
                        }
                    }
                    if self.pos <= atom_pos {
                        return Err(atom_err);
                    }
                    return self.error("expected ')'");
                }
                Err(atom_err)
            }
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let lhs = self.sum()?;
        if self.is_ident("in") {
            self.bump();
            self.expect_sym("[")?;
            let lo = self.sum()?;
            self.expect_sym(",")?;
            let hi = self.sum()?;
            self.expect_sym("]")?;
            return Ok(Formula::and(
                Formula::Atom(Atom::new(lhs.clone(), Cmp::Ge, lo)),
                Formula::Atom(Atom::new(lhs, Cmp::Le, hi)),
            ));
        }
        let cmp = match self.peek() {
            Tok::Sym("<") => Cmp::Lt,
            Tok::Sym("<=") => Cmp::Le,
            Tok::Sym(">") => Cmp::Gt,
            Tok::Sym(">=") => Cmp::Ge,
            _ => return self.error("expected a comparison operator"),
        };
        self.bump();
        let rhs = self.sum()?;
        Ok(Formula::Atom(Atom::new(lhs, cmp, rhs)))
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.is_sym("+") {
                self.bump();
                e = Expr::add(e, self.term()?);
            } else if self.is_sym("-") {
                self.bump();
                e = Expr::sub(e, self.term()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        loop {
            if self.is_sym("*") {
                self.bump();
                e = Expr::mul(e, self.factor()?);
            } else if self.is_sym("/") {
                self.bump();
                e = Expr::div(e, self.factor()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Sym("-") => {
                self.bump();
                let inner = self.factor()?;
                Ok(match inner {
                    Expr::Const(c) => Expr::Const(-c),
                    other => Expr::Neg(Box::new(other)),
                })
            }
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Signal(d) => {
                self.bump();
                Ok(Expr::Signal(d))
            }
            Tok::Frozen(d, h) => {
                self.bump();
                Ok(Expr::Frozen(FreezeVar::new(d, h)))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.sum()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "inf" => {
                self.bump();
                Ok(Expr::Const(f64::INFINITY))
            }
            Tok::Ident(name) if name == "abs" => {
                self.bump();
                self.expect_sym("(")?;
                let e = self.sum()?;
                self.expect_sym(")")?;
                Ok(Expr::abs(e))
            }
            Tok::Ident(name) if name == "min" || name == "max" => {
                self.bump();
                self.expect_sym("(")?;
                let a = self.sum()?;
                self.expect_sym(",")?;
                let b = self.sum()?;
                self.expect_sym(")")?;
                Ok(if name == "min" {
                    Expr::Min(Box::new(a), Box::new(b))
                } else {
                    Expr::Max(Box::new(a), Box::new(b))
                })
            }
            Tok::Ident(name) => self.error(format!("unknown name '{name}'")),
            _ => self.error("expected an expression"),
        }
    }
}

/// Parses formula source text. See the README for the grammar.
pub fn parse(src: &str) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        defs: HashMap::new(),
    };
    let f = p.file()?;
    check_bindings(&f, &mut Vec::new())?;
    Ok(f)
}

fn check_bindings(f: &Formula, bound: &mut Vec<FreezeVar>) -> Result<()> {
    match f {
        Formula::Atom(a) => {
            let used: BTreeSet<FreezeVar> = a.frozen_vars();
            for v in used {
                if !bound.contains(&v) {
                    return Err(Error::UnboundFreeze(v.to_string()));
                }
            }
            Ok(())
        }
        Formula::Freeze(v, body) => {
            if bound.contains(v) {
                return Err(Error::Rebound(v.to_string()));
            }
            bound.push(*v);
            let r = check_bindings(body, bound);
            bound.pop();
            r
        }
        _ => f
            .children()
            .into_iter()
            .try_for_each(|c| check_bindings(c, bound)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_predicate() {
        let f = parse("s >= 0").unwrap();
        assert_eq!(
            f,
            Formula::Atom(Atom {
                lhs: Expr::Signal(1),
                cmp: Cmp::Ge,
                rhs: Expr::Const(0.0)
            })
        );
    }

    #[test]
    fn unbound_freeze_is_rejected() {
        let err = parse("F ( s >= 1 && freeze(s*1). G[2,10] (s <= 0.6*(s*1+s*2)) )").unwrap_err();
        assert!(matches!(err, Error::UnboundFreeze(ref v) if v == "s1*2"));
    }

    #[test]
    fn rebinding_is_rejected() {
        assert!(matches!(
            parse("freeze(s*1). F freeze(s*1). s <= s*1"),
            Err(Error::Rebound(_))
        ));
    }

    #[test]
    fn syntax_error_position() {
        match parse("s >= 0 &&\n  G[1,2] (s <= )") {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn frozen_needs_adjacent_star() {
        let f = parse("freeze(s*1). s * 2 >= s*1").unwrap();
        if let Formula::Freeze(_, body) = f {
            if let Formula::Atom(a) = *body {
                assert_eq!(a.lhs, Expr::mul(Expr::Signal(1), Expr::Const(2.0)));
                assert_eq!(a.rhs, Expr::frozen(1, 1));
                return;
            }
        }
        panic!("unexpected shape");
    }

    #[test]
    fn parenthesized_expression_and_formula() {
        let f = parse("(s1 + s2) >= 3 && (s1 <= 1 || s2 > 2)").unwrap();
        assert_eq!(f.size(), 5);
        let g = parse("((s1 >= 0))").unwrap();
        assert_eq!(g.size(), 1);
    }

    #[test]
    fn membership_and_definitions() {
        let f = parse("let e = s2 > 1; e && s in [0, 2]").unwrap();
        assert_eq!(f.size(), 5);
    }

    #[test]
    fn windows() {
        let f = parse("G[2,inf] F[1,3] s >= 0").unwrap();
        match f {
            Formula::Always(w, inner) => {
                assert_eq!(w, Window::new(2.0, f64::INFINITY));
                assert!(
                    matches!(*inner, Formula::Eventually(w2, _) if w2 == Window::new(1.0, 3.0))
                );
            }
            _ => panic!(),
        }
        assert!(matches!(parse("F[3,1] s >= 0"), Err(Error::Window { .. })));
    }

    #[test]
    fn implication_desugars() {
        let f = parse("s >= 1 -> s >= 0").unwrap();
        assert!(matches!(f, Formula::Or(ref a, _) if matches!(**a, Formula::Not(_))));
    }
}
