//! Closed-form expressions in `x` and their expansion into series.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;          (* right-associative *)
//! primary = number | "x" | func "(" expr ")" | "(" expr ")" ;
//! func    = "exp" | "sin" | "cos" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! Exponents and divisors must be constant and divisors nonzero. A negative
//! or non-integer exponent is only accepted on a constant or on a shifted
//! variable `x`, `x - c`, `x + c` (optionally parenthesized).

mod expand;
mod lexer;

use std::fmt;

use thiserror::Error;

pub use expand::{to_series, ExpandError};
use lexer::{tokenize, Tok, Token};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown identifier '{name}' at line {line}, column {column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
}

impl ParseError {
    fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    /// `(line, column)`, both 1-based.
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. }
            | ParseError::UnknownIdentifier { line, column, .. } => (*line, *column),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::Add(Box::new(l), Box::new(r))
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::Sub(Box::new(l), Box::new(r))
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::Mul(Box::new(l), Box::new(r))
    }

    pub fn div(l: Expr, r: Expr) -> Expr {
        Expr::Div(Box::new(l), Box::new(r))
    }

    pub fn pow(l: Expr, r: Expr) -> Expr {
        Expr::Pow(Box::new(l), Box::new(r))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    /// Value of an expression free of `x`.
    pub fn constant_value(&self) -> Option<f64> {
        if self.contains_var() {
            None
        } else {
            Some(self.eval(0.0))
        }
    }

    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var => true,
            Expr::Neg(e) | Expr::Call(_, e) => e.contains_var(),
            Expr::Add(l, r)
            | Expr::Sub(l, r)
            | Expr::Mul(l, r)
            | Expr::Div(l, r)
            | Expr::Pow(l, r) => l.contains_var() || r.contains_var(),
        }
    }

    /// Pointwise value at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Add(l, r) => l.eval(x) + r.eval(x),
            Expr::Sub(l, r) => l.eval(x) - r.eval(x),
            Expr::Mul(l, r) => l.eval(x) * r.eval(x),
            Expr::Div(l, r) => l.eval(x) / r.eval(x),
            Expr::Pow(l, r) => {
                let base = l.eval(x);
                let p = r.eval(x);
                if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                    base.powi(p as i32)
                } else {
                    base.powf(p)
                }
            }
            Expr::Call(f, e) => f.apply(e.eval(x)),
        }
    }

    /// `Some(c)` when the expression is `x - c` in one of its accepted spellings.
    pub fn shifted_var_center(&self) -> Option<f64> {
        match self {
            Expr::Var => Some(0.0),
            Expr::Sub(l, r) if **l == Expr::Var && !r.contains_var() => r.constant_value(),
            Expr::Add(l, r) if **l == Expr::Var && !r.contains_var() => {
                r.constant_value().map(|c| -c)
            }
            _ => None,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(v) if v.is_sign_negative() => 3,
            Expr::Num(_) | Expr::Var | Expr::Call(..) => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "x"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_at(f, 3)
            }
            Expr::Add(l, r) => {
                l.fmt_at(f, 1)?;
                write!(f, " + ")?;
                r.fmt_at(f, 2)
            }
            Expr::Sub(l, r) => {
                l.fmt_at(f, 1)?;
                write!(f, " - ")?;
                r.fmt_at(f, 2)
            }
            Expr::Mul(l, r) => {
                l.fmt_at(f, 2)?;
                write!(f, "*")?;
                r.fmt_at(f, 3)
            }
            Expr::Div(l, r) => {
                l.fmt_at(f, 2)?;
                write!(f, "/")?;
                r.fmt_at(f, 3)
            }
            Expr::Pow(l, r) => {
                l.fmt_at(f, 5)?;
                write!(f, "^")?;
                r.fmt_at(f, 3)
            }
            Expr::Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.fmt_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

const MAX_DEPTH: usize = 200;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(t: &Token) -> ParseError {
        let what = match &t.tok {
            Tok::Eof => "unexpected end of input".to_string(),
            Tok::Num(v) => format!("unexpected number {v}"),
            Tok::Ident(s) => format!("unexpected identifier '{s}'"),
            other => format!("unexpected token {other:?}"),
        };
        ParseError::syntax(t.line, t.column, what)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.next();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Slash => {
                    let op = self.next();
                    let rhs = self.unary()?;
                    match rhs.constant_value() {
                        Some(c) if c != 0.0 && c.is_finite() => {}
                        _ => {
                            return Err(ParseError::syntax(
                                op.line,
                                op.column,
                                "division is only allowed by a nonzero constant",
                            ))
                        }
                    }
                    lhs = Expr::div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let t = self.peek();
            return Err(ParseError::syntax(t.line, t.column, "expression nested too deeply"));
        }
        let e = self.unary_inner();
        self.depth -= 1;
        e
    }

    fn unary_inner(&mut self) -> Result<Expr, ParseError> {
        match self.peek().tok {
            Tok::Minus => {
                self.next();
                Ok(Expr::neg(self.unary()?))
            }
            Tok::Plus => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        let op = self.next();
        let exponent = self.unary()?;
        let p = match exponent.constant_value() {
            Some(p) if p.is_finite() => p,
            _ => {
                return Err(ParseError::syntax(
                    op.line,
                    op.column,
                    "exponent must be a finite constant",
                ))
            }
        };
        let plain = p >= 0.0 && p.fract() == 0.0;
        if !plain && base.contains_var() && base.shifted_var_center().is_none() {
            return Err(ParseError::syntax(
                op.line,
                op.column,
                "negative or non-integer exponents need a base of the form (x - c)",
            ));
        }
        Ok(Expr::pow(base, exponent))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(ref name) if name == "x" => Ok(Expr::Var),
            Tok::Ident(ref name) => match Func::from_name(name) {
                Some(func) => {
                    let open = self.next();
                    if open.tok != Tok::LParen {
                        return Err(ParseError::syntax(
                            open.line,
                            open.column,
                            format!("expected '(' after {name}"),
                        ));
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::call(func, arg))
                }
                None => Err(ParseError::UnknownIdentifier {
                    name: name.clone(),
                    line: t.line,
                    column: t.column,
                }),
            },
            _ => Err(Self::unexpected(&t)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == Tok::RParen {
            Ok(())
        } else {
            Err(ParseError::syntax(t.line, t.column, "expected ')'"))
        }
    }
}

/// Parses one expression; trailing input is an error.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::Eof {
        return Err(Parser::unexpected(&t));
    }
    Ok(e)
}
