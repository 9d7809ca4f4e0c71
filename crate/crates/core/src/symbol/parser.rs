//! Kernel expression language.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := base ('^' exponent)?
//! base     := number | number 'i' | 'i' | 's'
//!           | ('exp' | 'sqrt') '(' expr ')' | '(' expr ')'
//! exponent := ['-'] number | '(' ['-'] number ['/' ['-'] number] ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-s^2` is `-(s^2)`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{GcqError, Result};

/// Parsed kernel expression in the single variable `s`.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolExpr {
    Real(f64),
    /// Purely imaginary literal `v·i`.
    Imag(f64),
    Var,
    Neg(Box<SymbolExpr>),
    Add(Box<SymbolExpr>, Box<SymbolExpr>),
    Sub(Box<SymbolExpr>, Box<SymbolExpr>),
    Mul(Box<SymbolExpr>, Box<SymbolExpr>),
    Div(Box<SymbolExpr>, Box<SymbolExpr>),
    Pow(Box<SymbolExpr>, Exponent),
    Exp(Box<SymbolExpr>),
    Sqrt(Box<SymbolExpr>),
}

/// Exponent of `^`. Integer powers use repeated multiplication; the others use
/// the principal branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Integer(i32),
    Ratio(i64, i64),
    Real(f64),
}

impl Exponent {
    pub fn value(&self) -> f64 {
        match *self {
            Exponent::Integer(n) => n as f64,
            Exponent::Ratio(p, q) => p as f64 / q as f64,
            Exponent::Real(x) => x,
        }
    }
}

impl SymbolExpr {
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            end: text.len(),
        };
        let expr = p.expr()?;
        match p.peek() {
            None => Ok(expr),
            Some(t) => Err(syntax(t.pos, format!("unexpected {}", t.kind))),
        }
    }

    /// Raw evaluation with no domain checks.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        use SymbolExpr::*;
        match self {
            Real(v) => Complex64::new(*v, 0.0),
            Imag(v) => Complex64::new(0.0, *v),
            Var => s,
            Neg(a) => -a.eval(s),
            Add(a, b) => a.eval(s) + b.eval(s),
            Sub(a, b) => a.eval(s) - b.eval(s),
            Mul(a, b) => a.eval(s) * b.eval(s),
            Div(a, b) => a.eval(s) / b.eval(s),
            Pow(a, e) => {
                let z = a.eval(s);
                match *e {
                    Exponent::Integer(n) => z.powi(n),
                    other => z.powf(other.value()),
                }
            }
            Exp(a) => a.eval(s).exp(),
            Sqrt(a) => a.eval(s).sqrt(),
        }
    }

    /// True when no imaginary literal occurs, so that `K(conj s) = conj K(s)`.
    pub fn is_real_coefficient(&self) -> bool {
        use SymbolExpr::*;
        match self {
            Real(_) | Var => true,
            Imag(v) => *v == 0.0,
            Neg(a) | Exp(a) | Sqrt(a) | Pow(a, _) => a.is_real_coefficient(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.is_real_coefficient() && b.is_real_coefficient()
            }
        }
    }
}

/// Fully parenthesized; re-parsing the output gives an equivalent tree
/// (a negative literal comes back as a negated positive one).
impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SymbolExpr::*;
        match self {
            Real(v) if v.is_sign_negative() => write!(f, "(-{:?})", -v),
            Real(v) => write!(f, "{v:?}"),
            Imag(v) if v.is_sign_negative() => write!(f, "(-{:?}i)", -v),
            Imag(v) => write!(f, "{v:?}i"),
            Var => write!(f, "s"),
            Neg(a) => write!(f, "(-{a})"),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Div(a, b) => write!(f, "({a} / {b})"),
            Pow(a, e) => match e {
                Exponent::Integer(n) => write!(f, "({a}^({n}))"),
                Exponent::Ratio(p, q) => write!(f, "({a}^({p}/{q}))"),
                Exponent::Real(x) => write!(f, "({a}^({x:?}))"),
            },
            Exp(a) => write!(f, "exp({a})"),
            Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

fn syntax(position: usize, message: impl Into<String>) -> GcqError {
    GcqError::Syntax {
        position,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Number(f64, bool), // value, written without '.' or exponent
    Imag(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Number(v, _) => write!(f, "number {v}"),
            Kind::Imag(v) => write!(f, "imaginary literal {v}i"),
            Kind::Ident(s) => write!(f, "identifier `{s}`"),
            Kind::Op(c) => write!(f, "`{c}`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let mut integral = !text[start..i].contains('.');
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                    integral = false;
                }
            }
            let value: f64 = text[start..i]
                .parse()
                .map_err(|_| syntax(start, format!("malformed number `{}`", &text[start..i])))?;
            let imaginary = i < bytes.len()
                && bytes[i] == b'i'
                && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric());
            if imaginary {
                i += 1;
                out.push(Token {
                    kind: Kind::Imag(value),
                    pos: start,
                });
            } else {
                out.push(Token {
                    kind: Kind::Number(value, integral),
                    pos: start,
                });
            }
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: Kind::Ident(text[start..i].to_string()),
                pos: start,
            });
        } else if b"+-*/^()".contains(&c) {
            out.push(Token {
                kind: Kind::Op(c as char),
                pos: i,
            });
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(syntax(i, format!("unexpected character `{ch}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_op(&self, op: char) -> bool {
        matches!(self.peek(), Some(Token { kind: Kind::Op(c), .. }) if *c == op)
    }

    fn next(&mut self) -> Result<Token> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| syntax(self.end, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_op(&mut self, op: char) -> Result<()> {
        let t = self.next()?;
        match t.kind {
            Kind::Op(c) if c == op => Ok(()),
            other => Err(syntax(t.pos, format!("expected `{op}`, found {other}"))),
        }
    }

    fn expr(&mut self) -> Result<SymbolExpr> {
        let mut lhs = self.term()?;
        loop {
            if self.peek_op('+') {
                self.pos += 1;
                lhs = SymbolExpr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.peek_op('-') {
                self.pos += 1;
                lhs = SymbolExpr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<SymbolExpr> {
        let mut lhs = self.unary()?;
        loop {
            if self.peek_op('*') {
                self.pos += 1;
                lhs = SymbolExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek_op('/') {
                self.pos += 1;
                lhs = SymbolExpr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<SymbolExpr> {
        if self.peek_op('-') {
            self.pos += 1;
            return Ok(SymbolExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<SymbolExpr> {
        let base = self.base()?;
        if self.peek_op('^') {
            self.pos += 1;
            let e = self.exponent()?;
            return Ok(SymbolExpr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<SymbolExpr> {
        let t = self.next()?;
        match t.kind {
            Kind::Number(v, _) => Ok(SymbolExpr::Real(v)),
            Kind::Imag(v) => Ok(SymbolExpr::Imag(v)),
            Kind::Op('(') => {
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Kind::Ident(name) => match name.as_str() {
                "s" => Ok(SymbolExpr::Var),
                "i" => Ok(SymbolExpr::Imag(1.0)),
                "exp" | "sqrt" => {
                    self.expect_op('(')?;
                    let arg = Box::new(self.expr()?);
                    self.expect_op(')')?;
                    Ok(if name == "exp" {
                        SymbolExpr::Exp(arg)
                    } else {
                        SymbolExpr::Sqrt(arg)
                    })
                }
                _ => Err(GcqError::UnknownIdentifier {
                    name,
                    position: t.pos,
                }),
            },
            other => Err(syntax(t.pos, format!("expected an operand, found {other}"))),
        }
    }

    /// Optionally signed number, returned with its integrality flag.
    fn signed_number(&mut self) -> Result<(f64, bool, usize)> {
        let negative = self.peek_op('-');
        if negative {
            self.pos += 1;
        }
        let t = self.next()?;
        match t.kind {
            Kind::Number(v, integral) => Ok((if negative { -v } else { v }, integral, t.pos)),
            other => Err(syntax(
                t.pos,
                format!("expected a number in exponent, found {other}"),
            )),
        }
    }

    fn exponent(&mut self) -> Result<Exponent> {
        let parenthesized = self.peek_op('(');
        if parenthesized {
            self.pos += 1;
        }
        let (p, p_int, p_pos) = self.signed_number()?;
        let e = if parenthesized && self.peek_op('/') {
            self.pos += 1;
            let (q, q_int, q_pos) = self.signed_number()?;
            if !(p_int && q_int) {
                return Err(syntax(p_pos, "rational exponent needs integer parts"));
            }
            if q == 0.0 {
                return Err(syntax(q_pos, "zero denominator in exponent"));
            }
            let (p, q) = (p as i64, q as i64);
            if p % q == 0 {
                integer_exponent(p / q, p_pos)?
            } else {
                Exponent::Ratio(p, q)
            }
        } else if p_int {
            integer_exponent(p as i64, p_pos)?
        } else {
            Exponent::Real(p)
        };
        if parenthesized {
            self.expect_op(')')?;
        }
        Ok(e)
    }
}

fn integer_exponent(n: i64, pos: usize) -> Result<Exponent> {
    i32::try_from(n)
        .map(Exponent::Integer)
        .map_err(|_| syntax(pos, format!("exponent {n} out of range")))
}
