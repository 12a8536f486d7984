//! Small arithmetic expressions in one family parameter, such as `2-9n`,
//! `25n-13/2` or `num(r)`. Juxtaposition multiplies (`9n` is `9*n`).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::slope::ExtRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("cannot parse expression `{src}`: {msg}")]
    Parse { src: String, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("`inf` cannot appear inside arithmetic")]
    InfiniteOperand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Num,
    Den,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Lit(i64),
    Var(String),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone)]
pub struct Expr {
    src: String,
    body: Option<Node>, // None encodes `inf`
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.body == other.body
    }
}

impl Eq for Expr {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Num(i64),
    Ident(usize, usize),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Tok>,
    pos: usize,
}

fn tokenize(src: &str) -> Result<Vec<Tok>, String> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' => i += 1,
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let v = src[start..i].parse().map_err(|_| "integer literal too large".to_string())?;
                out.push(Tok::Num(v));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Tok::Ident(start, i));
            }
            b'+' | b'-' | b'*' | b'/' | b'(' | b')' => {
                out.push(match c {
                    b'+' => Tok::Plus,
                    b'-' => Tok::Minus,
                    b'*' => Tok::Star,
                    b'/' => Tok::Slash,
                    b'(' => Tok::LParen,
                    _ => Tok::RParen,
                });
                i += 1;
            }
            _ => return Err(format!("unexpected character `{}`", src[i..].chars().next().unwrap_or('?'))),
        }
    }
    Ok(out)
}

impl Parser<'_> {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Node, String> {
        let mut lhs = self.term()?;
        while let Some(t @ (Tok::Plus | Tok::Minus)) = self.peek() {
            self.bump();
            let rhs = self.term()?;
            lhs = if t == Tok::Plus {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, String> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Ident(..) | Tok::LParen) => {
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.atom()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, String> {
        if self.peek() == Some(Tok::Minus) {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Node, String> {
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Node::Lit(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err("missing `)`".into()),
                }
            }
            Some(Tok::Ident(a, b)) => {
                let name = &self.src[a..b];
                let func = match name {
                    "num" => Some(Func::Num),
                    "den" => Some(Func::Den),
                    _ => None,
                };
                match func {
                    Some(f) if self.peek() == Some(Tok::LParen) => {
                        self.bump();
                        let inner = self.expr()?;
                        match self.bump() {
                            Some(Tok::RParen) => Ok(Node::Call(f, Box::new(inner))),
                            _ => Err("missing `)`".into()),
                        }
                    }
                    _ => Ok(Node::Var(name.to_string())),
                }
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of input".into()),
        }
    }
}

fn overflow<T>(v: Option<T>) -> Result<T, ExprError> {
    v.ok_or(ExprError::Overflow)
}

impl Node {
    fn eval(&self, var: Option<(&str, Rational64)>) -> Result<Rational64, ExprError> {
        Ok(match self {
            Node::Lit(v) => Rational64::from_integer(*v),
            Node::Var(name) => match var {
                Some((n, x)) if n == name => x,
                _ => return Err(ExprError::UnknownVariable(name.clone())),
            },
            Node::Neg(a) => overflow(Rational64::zero().checked_sub(&a.eval(var)?))?,
            Node::Add(a, b) => overflow(a.eval(var)?.checked_add(&b.eval(var)?))?,
            Node::Sub(a, b) => overflow(a.eval(var)?.checked_sub(&b.eval(var)?))?,
            Node::Mul(a, b) => overflow(a.eval(var)?.checked_mul(&b.eval(var)?))?,
            Node::Div(a, b) => {
                let d = b.eval(var)?;
                if d.is_zero() {
                    return Err(ExprError::DivisionByZero);
                }
                overflow(a.eval(var)?.checked_div(&d))?
            }
            Node::Call(f, a) => {
                let v = a.eval(var)?;
                Rational64::from_integer(match f {
                    Func::Num => *v.numer(),
                    Func::Den => *v.denom(),
                })
            }
        })
    }

    /// `(a, b)` with `self = a x + b` when the expression is visibly affine.
    fn linear(&self) -> Option<(Rational64, Rational64)> {
        let zero = Rational64::zero();
        Some(match self {
            Node::Lit(v) => (zero, Rational64::from_integer(*v)),
            Node::Var(_) => (Rational64::from_integer(1), zero),
            Node::Neg(a) => {
                let (p, q) = a.linear()?;
                (-p, -q)
            }
            Node::Add(a, b) | Node::Sub(a, b) => {
                let (p, q) = a.linear()?;
                let (r, s) = b.linear()?;
                if matches!(self, Node::Add(..)) {
                    (p.checked_add(&r)?, q.checked_add(&s)?)
                } else {
                    (p.checked_sub(&r)?, q.checked_sub(&s)?)
                }
            }
            Node::Mul(a, b) => {
                let (p, q) = a.linear()?;
                let (r, s) = b.linear()?;
                if p.is_zero() {
                    (q.checked_mul(&r)?, q.checked_mul(&s)?)
                } else if r.is_zero() {
                    (p.checked_mul(&s)?, q.checked_mul(&s)?)
                } else {
                    return None;
                }
            }
            Node::Div(a, b) => {
                let (p, q) = a.linear()?;
                let (r, s) = b.linear()?;
                if !r.is_zero() || s.is_zero() {
                    return None;
                }
                (p.checked_div(&s)?, q.checked_div(&s)?)
            }
            Node::Call(..) => return None,
        })
    }

    fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Node::Lit(_) => {}
            Node::Var(n) => {
                out.insert(n.clone());
            }
            Node::Neg(a) | Node::Call(_, a) => a.vars(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }
}

pub(crate) fn to_ext(v: Rational64) -> ExtRational<i64> {
    ExtRational::new(*v.numer(), *v.denom()).expect("a Rational64 has nonzero denominator")
}

pub(crate) fn from_ext(v: &ExtRational<i64>) -> Option<Rational64> {
    (!v.is_infinite()).then(|| Rational64::new(v.numerator(), v.denominator()))
}

impl Expr {
    pub fn constant(v: &ExtRational<i64>) -> Self {
        v.to_string().parse().expect("a rational literal parses")
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn is_infinity(&self) -> bool {
        self.body.is_none()
    }

    /// Variables that occur in the expression.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if let Some(b) = &self.body {
            b.vars(&mut out);
        }
        out
    }

    pub fn is_constant(&self) -> bool {
        self.variables().is_empty()
    }

    /// Value with `var = x`; `x` may be `None` for constant expressions.
    pub fn eval(&self, var: Option<(&str, Rational64)>) -> Result<ExtRational<i64>, ExprError> {
        match &self.body {
            None => Ok(ExtRational::infinity()),
            Some(b) => b.eval(var).map(to_ext),
        }
    }

    pub fn eval_rational(&self, var: Option<(&str, Rational64)>) -> Result<Rational64, ExprError> {
        match &self.body {
            None => Err(ExprError::InfiniteOperand),
            Some(b) => b.eval(var),
        }
    }

    /// `(a, b)` with `self = a x + b`, when that form is evident.
    pub fn affine(&self) -> Option<(Rational64, Rational64)> {
        self.body.as_ref()?.linear()
    }

    /// Every `x` with `self(x) = v`, provided the expression is affine with
    /// nonzero slope.
    pub fn solve(&self, v: &ExtRational<i64>) -> Option<Rational64> {
        let (a, b) = self.affine()?;
        let v = from_ext(v)?;
        if a.is_zero() {
            return None;
        }
        v.checked_sub(&b)?.checked_div(&a)
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let src = s.trim().to_string();
        if src == "inf" {
            return Ok(Expr { src, body: None });
        }
        let err = |msg: String| ExprError::Parse { src: src.clone(), msg };
        let toks = tokenize(&src).map_err(err)?;
        let mut p = Parser {
            src: &src,
            toks,
            pos: 0,
        };
        let body = p.expr().map_err(err)?;
        if p.pos != p.toks.len() {
            return Err(err("trailing input".into()));
        }
        Ok(Expr {
            src: src.clone(),
            body: Some(body),
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.src)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        s.parse().unwrap()
    }

    fn at(s: &str, x: i64) -> String {
        e(s).eval(Some(("n", Rational64::from_integer(x)))).unwrap().to_string()
    }

    #[test]
    fn evaluates_family_formulas() {
        assert_eq!(at("2-9n", 2), "-16");
        assert_eq!(at("-2-9n", -2), "16");
        assert_eq!(at("25n-13/2", 1), "37/2");
        assert_eq!(at("n-1/2", 2), "3/2");
        assert_eq!(at("18/(2n-1)", 2), "6");
        assert_eq!(at("1-n", 5), "-4");
        let r = Rational64::new(6, 4);
        assert_eq!(e("num(r)").eval(Some(("r", r))).unwrap().to_string(), "3");
        assert_eq!(e("4-r").eval(Some(("r", r))).unwrap().to_string(), "5/2");
    }

    #[test]
    fn constants_and_infinity() {
        assert!(e("inf").is_infinity());
        assert_eq!(e("-4").eval(None).unwrap().to_string(), "-4");
        assert!(e("37/2").is_constant());
        assert!(matches!(e("n+1").eval(None), Err(ExprError::UnknownVariable(_))));
        assert!(matches!(e("1/(n-1)").eval(Some(("n", 1.into()))), Err(ExprError::DivisionByZero)));
    }

    #[test]
    fn affine_solving() {
        let x = e("25n-13/2").solve(&"87/2".parse().unwrap()).unwrap();
        assert_eq!(x, Rational64::from_integer(2));
        assert_eq!(e("4-r").solve(&"1".parse().unwrap()).unwrap(), Rational64::from_integer(3));
        assert!(e("num(r)").affine().is_none());
        assert!(e("18/(2n-1)").affine().is_none());
        assert!(e("7").solve(&"7".parse().unwrap()).is_none());
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "2+", "(n", "n)", "2 $ 3", "99999999999999999999"] {
            assert!(bad.parse::<Expr>().is_err(), "{bad}");
        }
    }
}
