//! A small arithmetic language for analytic input data.
//!
//! Grammar: numbers, the variables `x1`, `x2`, `t`, the constants `pi` and
//! `e`, the operators `+ - * /`, powers `u ^ n` with a numeric exponent, and
//! the functions `sin`, `cos`, `exp`, `sqrt`. Expressions differentiate
//! symbolically, so the solvers never difference user input.

use std::collections::BTreeSet;
use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use biofilm_core::math::{Mat2, Vec2};
use biofilm_core::mechanics::TractionField;
use biofilm_core::profile::{Jet, Profile, Signal, VelocityField};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    X1,
    X2,
    T,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::T => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at column {column}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

/// Point at which an expression is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
    pub t: f64,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some((col, tok)) => Err(ParseError {
                column: col,
                message: format!("unexpected {tok}"),
            }),
        }
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn eval(&self, at: Point) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X1) => at.x1,
            Expr::Var(Var::X2) => at.x2,
            Expr::Var(Var::T) => at.t,
            Expr::Neg(a) => -a.eval(at),
            Expr::Add(a, b) => a.eval(at) + b.eval(at),
            Expr::Sub(a, b) => a.eval(at) - b.eval(at),
            Expr::Mul(a, b) => a.eval(at) * b.eval(at),
            Expr::Div(a, b) => a.eval(at) / b.eval(at),
            Expr::Pow(a, n) => powf(a.eval(at), *n),
            Expr::Call(f, a) => f.apply(a.eval(at)),
        }
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    /// Symbolic partial derivative, lightly simplified.
    pub fn diff(&self, v: Var) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(w) => Expr::Num(if *w == v { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.diff(v)),
            Expr::Add(a, b) => add(a.diff(v), b.diff(v)),
            Expr::Sub(a, b) => sub(a.diff(v), b.diff(v)),
            Expr::Mul(a, b) => add(mul(a.diff(v), (**b).clone()), mul((**a).clone(), b.diff(v))),
            Expr::Div(a, b) => {
                let num = sub(mul(a.diff(v), (**b).clone()), mul((**a).clone(), b.diff(v)));
                div(num, pow((**b).clone(), 2.0))
            }
            Expr::Pow(a, n) => mul(mul(Expr::Num(*n), pow((**a).clone(), n - 1.0)), a.diff(v)),
            Expr::Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, inner),
                    Func::Cos => neg(call(Func::Sin, inner)),
                    Func::Exp => call(Func::Exp, inner),
                    Func::Sqrt => div(Expr::Num(0.5), call(Func::Sqrt, inner)),
                };
                mul(outer, a.diff(v))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn powf(x: f64, n: f64) -> f64 {
    if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 {
        x.powi(n as i32)
    } else {
        x.powf(n)
    }
}

fn num(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        _ => None,
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (num(&a), num(&b)) {
        (Some(x), _) if x == 0.0 => Expr::Num(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, n: f64) -> Expr {
    if n == 0.0 {
        return Expr::Num(1.0);
    }
    if n == 1.0 {
        return a;
    }
    match a {
        Expr::Num(v) => Expr::Num(powf(v, n)),
        a => Expr::Pow(Box::new(a), n),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool| {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, a.precedence() < 4)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let op = if matches!(self, Expr::Add(..)) { " + " } else { " - " };
                wrap(f, a, a.precedence() < 1)?;
                f.write_str(op)?;
                wrap(f, b, b.precedence() <= 1 || b.precedence() == 3)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = if matches!(self, Expr::Mul(..)) { " * " } else { " / " };
                wrap(f, a, a.precedence() < 2)?;
                f.write_str(op)?;
                wrap(f, b, b.precedence() <= 3)
            }
            Expr::Pow(a, n) => {
                wrap(f, a, a.precedence() < 5)?;
                if *n < 0.0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "number {v}"),
            Token::Ident(s) => write!(f, "name '{s}'"),
            Token::Op(c) => write!(f, "'{c}'"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
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
            let v = text.parse::<f64>().map_err(|_| ParseError {
                column: col,
                message: format!("malformed number '{text}'"),
            })?;
            out.push((col, Token::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((col, Token::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((col, Token::Op(c)));
            i += 1;
        } else {
            return Err(ParseError {
                column: col,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<(usize, &Token)> {
        self.tokens.get(self.pos).map(|(c, t)| (*c, t))
    }

    fn end_column(&self) -> usize {
        self.tokens.last().map_or(1, |(c, _)| c + 1)
    }

    fn eat(&mut self, op: char) -> bool {
        if let Some((_, Token::Op(c))) = self.peek() {
            if *c == op {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat(op) {
            return Ok(());
        }
        let (column, found) = match self.peek() {
            Some((c, t)) => (c, t.to_string()),
            None => (self.end_column(), "end of input".to_string()),
        };
        Err(ParseError {
            column,
            message: format!("expected '{op}', found {found}"),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let column = self.peek().map_or(self.end_column(), |(c, _)| c);
        let exponent = self.unary()?;
        match exponent {
            Expr::Num(n) => Ok(Expr::Pow(Box::new(base), n)),
            Expr::Neg(inner) if matches!(*inner, Expr::Num(_)) => Ok(Expr::Pow(Box::new(base), -inner.eval(Point::default()))),
            _ => Err(ParseError {
                column,
                message: "exponent must be a number".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some((column, tok)) = self.peek() else {
            return Err(ParseError {
                column: self.end_column(),
                message: "unexpected end of input".into(),
            });
        };
        let tok = tok.clone();
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Token::Ident(name) => {
                let func = match name.as_str() {
                    "x1" => return Ok(Expr::Var(Var::X1)),
                    "x2" => return Ok(Expr::Var(Var::X2)),
                    "t" => return Ok(Expr::Var(Var::T)),
                    "pi" => return Ok(Expr::Num(PI)),
                    "e" => return Ok(Expr::Num(E)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "sqrt" => Func::Sqrt,
                    _ => {
                        return Err(ParseError {
                            column,
                            message: format!("unknown name '{name}'"),
                        })
                    }
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Token::Op(c) => Err(ParseError {
                column,
                message: format!("unexpected '{c}'"),
            }),
        }
    }
}

/// `h(x1, t)` with its derivatives, for graph motion and reference heights.
#[derive(Debug, Clone)]
pub struct HeightExpr {
    h: Expr,
    d_x: Expr,
    d_t: Expr,
    d_xx: Expr,
    d_xt: Expr,
}

impl HeightExpr {
    pub fn new(h: Expr) -> Self {
        let d_x = h.diff(Var::X1);
        HeightExpr {
            d_t: h.diff(Var::T),
            d_xx: d_x.diff(Var::X1),
            d_xt: d_x.diff(Var::T),
            d_x,
            h,
        }
    }
}

impl Profile for HeightExpr {
    fn jet(&self, x1: f64, t: f64) -> Jet {
        let p = Point { x1, x2: 0.0, t };
        Jet {
            value: self.h.eval(p),
            d_x: self.d_x.eval(p),
            d_t: self.d_t.eval(p),
            d_xx: self.d_xx.eval(p),
            d_xt: self.d_xt.eval(p),
        }
    }
}

/// Scalar of time, such as an exterior pressure.
#[derive(Debug, Clone)]
pub struct SignalExpr {
    value: Expr,
    rate: Expr,
}

impl SignalExpr {
    pub fn new(value: Expr) -> Self {
        SignalExpr {
            rate: value.diff(Var::T),
            value,
        }
    }
}

impl Signal for SignalExpr {
    fn value(&self, t: f64) -> f64 {
        self.value.eval(Point { t, ..Point::default() })
    }
    fn rate(&self, t: f64) -> f64 {
        self.rate.eval(Point { t, ..Point::default() })
    }
}

/// Two expressions in `(x1, x2, t)` with their first derivatives.
#[derive(Debug, Clone)]
struct VectorExpr {
    value: [Expr; 2],
    grad: [[Expr; 2]; 2],
    rate: [Expr; 2],
}

impl VectorExpr {
    fn new(a: Expr, b: Expr) -> Self {
        let grad = [
            [a.diff(Var::X1), a.diff(Var::X2)],
            [b.diff(Var::X1), b.diff(Var::X2)],
        ];
        VectorExpr {
            rate: [a.diff(Var::T), b.diff(Var::T)],
            grad,
            value: [a, b],
        }
    }

    fn at(x: Vec2, t: f64) -> Point {
        Point { x1: x[0], x2: x[1], t }
    }

    fn value(&self, p: Point) -> Vec2 {
        [self.value[0].eval(p), self.value[1].eval(p)]
    }

    fn gradient(&self, p: Point) -> Mat2 {
        let g = &self.grad;
        [[g[0][0].eval(p), g[0][1].eval(p)], [g[1][0].eval(p), g[1][1].eval(p)]]
    }
}

/// Steady velocity `nu(x)` for linear-field motion.
#[derive(Debug, Clone)]
pub struct VelocityExpr(VectorExpr);

impl VelocityExpr {
    pub fn new(nu1: Expr, nu2: Expr) -> Self {
        VelocityExpr(VectorExpr::new(nu1, nu2))
    }
}

impl VelocityField for VelocityExpr {
    fn value(&self, x: Vec2) -> Vec2 {
        self.0.value(VectorExpr::at(x, 0.0))
    }
    fn gradient(&self, x: Vec2) -> Mat2 {
        self.0.gradient(VectorExpr::at(x, 0.0))
    }
}

/// Prescribed traction `g(x, t)` on the moving boundary.
#[derive(Debug, Clone)]
pub struct TractionExpr(VectorExpr);

impl TractionExpr {
    pub fn new(g1: Expr, g2: Expr) -> Self {
        TractionExpr(VectorExpr::new(g1, g2))
    }
}

impl TractionField for TractionExpr {
    fn value(&self, x: Vec2, t: f64) -> Vec2 {
        self.0.value(VectorExpr::at(x, t))
    }
    fn rate(&self, x: Vec2, t: f64) -> Vec2 {
        let p = VectorExpr::at(x, t);
        [self.0.rate[0].eval(p), self.0.rate[1].eval(p)]
    }
    fn gradient(&self, x: Vec2, t: f64) -> Mat2 {
        self.0.gradient(VectorExpr::at(x, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x1: f64, x2: f64, t: f64) -> Point {
        Point { x1, x2, t }
    }

    #[test]
    fn precedence_and_associativity() {
        let e = Expr::parse("1 - 2 - 3 * 4 / 2 ^ 2").unwrap();
        assert_eq!(e.eval(Point::default()), 1.0 - 2.0 - 3.0 * 4.0 / 4.0);
        assert_eq!(Expr::parse("-2^2").unwrap().eval(Point::default()), -4.0);
        assert_eq!(Expr::parse("2^-1").unwrap().eval(Point::default()), 0.5);
    }

    #[test]
    fn errors_carry_columns() {
        let err = Expr::parse("1 + * x1").unwrap_err();
        assert_eq!(err.column, 5);
        let err = Expr::parse("sin(x1").unwrap_err();
        assert!(err.message.contains("expected ')'"), "{err}");
        assert_eq!(Expr::parse("x3").unwrap_err().column, 1);
        assert!(Expr::parse("x1 ^ t").is_err());
        assert!(Expr::parse("1 $ 2").is_err());
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "1 + 0.1 * t",
            "-(x1 - 1) * (x2 + 2)",
            "x1 - (x2 - t)",
            "x1 / (x2 * t)",
            "(1 + x1)^2 - sin(pi * x1)^-1",
            "exp(-t) * sqrt(1 + x2^2)",
            "2 * -x1",
            "1e-7 * x1",
        ] {
            let e = Expr::parse(src).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(again.to_string(), e.to_string(), "{src}");
            let p = at(0.3, 0.7, 1.1);
            assert_eq!(again.eval(p), e.eval(p), "{src}");
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let e = Expr::parse("sin(pi * x1) * exp(-t) + x2^3 / (1 + t * x1) - sqrt(2 + cos(x2))").unwrap();
        let p = at(0.37, 0.61, 0.83);
        let h = 1e-6;
        for v in [Var::X1, Var::X2, Var::T] {
            let shift = |s: f64| match v {
                Var::X1 => at(p.x1 + s, p.x2, p.t),
                Var::X2 => at(p.x1, p.x2 + s, p.t),
                Var::T => at(p.x1, p.x2, p.t + s),
            };
            let fd = (e.eval(shift(h)) - e.eval(shift(-h))) / (2.0 * h);
            assert!((e.diff(v).eval(p) - fd).abs() < 1e-8, "{v:?}");
        }
    }

    #[test]
    fn derivative_simplifies_constants() {
        let e = Expr::parse("3 * t + x1").unwrap();
        assert_eq!(e.diff(Var::T), Expr::Num(3.0));
        assert_eq!(e.diff(Var::X2), Expr::Num(0.0));
    }

    #[test]
    fn variables_are_collected() {
        let e = Expr::parse("x1 * cos(t) + 2").unwrap();
        assert_eq!(e.variables().into_iter().collect::<Vec<_>>(), vec![Var::X1, Var::T]);
    }
}
