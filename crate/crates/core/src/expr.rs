//! Scalar coefficient expressions with exact symbolic differentiation.
//!
//! Coefficients of differential operators are kept symbolic so that Leibniz
//! expansions (adjoints, compositions, concomitants) get exact derivatives.
//! Variables are the Cartesian coordinates `x` (index 0) and `y` (index 1).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Sech,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sech => "sech",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "sech" => Func::Sech,
            _ => return None,
        })
    }

    fn eval(self, z: C64) -> C64 {
        match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Tan => z.tan(),
            Func::Exp => z.exp(),
            Func::Log => z.ln(),
            Func::Sqrt => z.sqrt(),
            Func::Sinh => z.sinh(),
            Func::Cosh => z.cosh(),
            Func::Tanh => z.tanh(),
            Func::Sech => z.cosh().inv(),
        }
    }
}

#[derive(Debug)]
enum Node {
    Const(C64),
    Var(usize),
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Pow(Expr, Expr),
    Call(Func, Expr),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Debug, Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn constant(c: impl Into<C64>) -> Expr {
        Expr(Arc::new(Node::Const(c.into())))
    }

    pub fn zero() -> Expr {
        Expr::constant(C64::new(0.0, 0.0))
    }

    pub fn one() -> Expr {
        Expr::constant(C64::new(1.0, 0.0))
    }

    pub fn var(index: usize) -> Expr {
        Expr(Arc::new(Node::Var(index)))
    }

    pub fn x() -> Expr {
        Expr::var(0)
    }

    pub fn y() -> Expr {
        Expr::var(1)
    }

    pub fn as_const(&self) -> Option<C64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c == C64::new(0.0, 0.0))
    }

    fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c == C64::new(1.0, 0.0))
    }

    pub fn add(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            _ if self.is_zero() => other.clone(),
            _ if other.is_zero() => self.clone(),
            _ => Expr(Arc::new(Node::Add(self.clone(), other.clone()))),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            _ if self.is_zero() || other.is_zero() => Expr::zero(),
            _ if self.is_one() => other.clone(),
            _ if other.is_one() => self.clone(),
            _ => Expr(Arc::new(Node::Mul(self.clone(), other.clone()))),
        }
    }

    pub fn scale(&self, c: C64) -> Expr {
        Expr::constant(c).mul(self)
    }

    pub fn div(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a / b),
            _ if self.is_zero() => Expr::zero(),
            _ if other.is_one() => self.clone(),
            _ => Expr(Arc::new(Node::Div(self.clone(), other.clone()))),
        }
    }

    pub fn neg(&self) -> Expr {
        match &*self.0 {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr(Arc::new(Node::Neg(self.clone()))),
        }
    }

    pub fn pow(&self, exponent: &Expr) -> Expr {
        match (self.as_const(), exponent.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a.powc(b)),
            (_, Some(b)) if b == C64::new(0.0, 0.0) => Expr::one(),
            (_, Some(b)) if b == C64::new(1.0, 0.0) => self.clone(),
            _ => Expr(Arc::new(Node::Pow(self.clone(), exponent.clone()))),
        }
    }

    pub fn powi(&self, n: i32) -> Expr {
        self.pow(&Expr::constant(n as f64))
    }

    pub fn call(func: Func, arg: &Expr) -> Expr {
        match arg.as_const() {
            Some(c) => Expr::constant(func.eval(c)),
            None => Expr(Arc::new(Node::Call(func, arg.clone()))),
        }
    }

    /// Complex conjugate, taking coordinates as real.
    pub fn conj(&self) -> Expr {
        match &*self.0 {
            Node::Const(c) => Expr::constant(c.conj()),
            Node::Var(_) => self.clone(),
            Node::Add(a, b) => a.conj().add(&b.conj()),
            Node::Mul(a, b) => a.conj().mul(&b.conj()),
            Node::Div(a, b) => a.conj().div(&b.conj()),
            Node::Neg(a) => a.conj().neg(),
            Node::Pow(a, b) => a.conj().pow(&b.conj()),
            Node::Call(f, a) => Expr::call(*f, &a.conj()),
        }
    }

    /// Exact partial derivative with respect to coordinate `var`.
    pub fn diff(&self, var: usize) -> Expr {
        match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => a.diff(var).add(&b.diff(var)),
            Node::Mul(a, b) => a.diff(var).mul(b).add(&a.mul(&b.diff(var))),
            Node::Div(a, b) => {
                let num = a.diff(var).mul(b).sub(&a.mul(&b.diff(var)));
                num.div(&b.powi(2))
            }
            Node::Neg(a) => a.diff(var).neg(),
            Node::Pow(a, b) => {
                let da = a.diff(var);
                match b.as_const() {
                    Some(c) => {
                        let lowered = a.pow(&Expr::constant(c - 1.0));
                        lowered.scale(c).mul(&da)
                    }
                    None => {
                        let db = b.diff(var);
                        let ln_a = Expr::call(Func::Log, a);
                        let inner = db.mul(&ln_a).add(&b.mul(&da).div(a));
                        self.mul(&inner)
                    }
                }
            }
            Node::Call(f, u) => {
                let du = u.diff(var);
                if du.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, u),
                    Func::Cos => Expr::call(Func::Sin, u).neg(),
                    Func::Tan => Expr::one().add(&Expr::call(Func::Tan, u).powi(2)),
                    Func::Exp => self.clone(),
                    Func::Log => Expr::one().div(u),
                    Func::Sqrt => Expr::constant(0.5).div(self),
                    Func::Sinh => Expr::call(Func::Cosh, u),
                    Func::Cosh => Expr::call(Func::Sinh, u),
                    Func::Tanh => Expr::call(Func::Sech, u).powi(2),
                    Func::Sech => self.mul(&Expr::call(Func::Tanh, u)).neg(),
                };
                outer.mul(&du)
            }
        }
    }

    /// Repeated partial derivative `D^alpha`.
    pub fn diff_multi(&self, alpha: &[usize]) -> Expr {
        let mut out = self.clone();
        for (axis, &count) in alpha.iter().enumerate() {
            for _ in 0..count {
                out = out.diff(axis);
            }
        }
        out
    }

    pub fn eval(&self, point: &[f64]) -> C64 {
        match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(i) => C64::new(point.get(*i).copied().unwrap_or(0.0), 0.0),
            Node::Add(a, b) => a.eval(point) + b.eval(point),
            Node::Mul(a, b) => a.eval(point) * b.eval(point),
            Node::Div(a, b) => a.eval(point) / b.eval(point),
            Node::Neg(a) => -a.eval(point),
            Node::Pow(a, b) => {
                let base = a.eval(point);
                match b.as_const() {
                    Some(e) if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() < 64.0 => {
                        base.powi(e.re as i32)
                    }
                    _ => base.powc(b.eval(point)),
                }
            }
            Node::Call(f, a) => f.eval(a.eval(point)),
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match &*self.0 {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.max_var().max(b.max_var())
            }
            Node::Neg(a) | Node::Call(_, a) => a.max_var(),
        }
    }

    pub fn parse(src: &str) -> Result<Expr> {
        let mut parser = Parser { src, tokens: lex(src)?, pos: 0 };
        let expr = parser.expr()?;
        if let Some(tok) = parser.tokens.get(parser.pos) {
            return Err(Error::Parse {
                offset: tok.offset,
                message: "unexpected trailing input".into(),
            });
        }
        Ok(expr)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::constant(v)
    }
}

fn fmt_const(c: C64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{:?}", c.re)
    } else if c.re == 0.0 {
        write!(f, "{:?}i", c.im)
    } else {
        write!(f, "({:?}+{:?}i)", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => {
                if c.re < 0.0 && c.im == 0.0 {
                    write!(f, "(")?;
                    fmt_const(*c, f)?;
                    write!(f, ")")
                } else {
                    fmt_const(*c, f)
                }
            }
            Node::Var(0) => write!(f, "x"),
            Node::Var(1) => write!(f, "y"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Op(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let value: f64 = src[start..i].parse().map_err(|_| Error::Parse {
                offset: start,
                message: format!("bad number `{}`", &src[start..i]),
            })?;
            let imag = i < bytes.len()
                && bytes[i] == b'i'
                && !bytes
                    .get(i + 1)
                    .is_some_and(|b| (*b as char).is_ascii_alphanumeric() || *b == b'_');
            if imag {
                i += 1;
                out.push(Token { tok: Tok::Imag(value), offset: start });
            } else {
                out.push(Token { tok: Tok::Num(value), offset: start });
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), offset: start });
        } else if "+-*/^(),".contains(c) {
            i += 1;
            out.push(Token { tok: Tok::Op(c), offset: start });
        } else {
            return Err(Error::Parse { offset: start, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token { tok: Tok::Op(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.src.len(), |t| t.offset)
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse { offset: self.offset(), message: format!("expected `{op}`") })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { lhs.add(&rhs) } else { lhs.sub(&rhs) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { lhs.mul(&rhs) } else { lhs.div(&rhs) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            // right associative; the exponent may carry its own sign
            let exponent = self.unary()?;
            return Ok(base.pow(&exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        let Some(token) = self.tokens.get(self.pos).cloned() else {
            return Err(Error::Parse { offset, message: "unexpected end of input".into() });
        };
        self.pos += 1;
        match token.tok {
            Tok::Num(v) => Ok(Expr::constant(v)),
            Tok::Imag(v) => Ok(Expr::constant(C64::new(0.0, v))),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if self.peek_op() == Some('(') {
                    let func = Func::from_name(&name).ok_or_else(|| Error::Parse {
                        offset,
                        message: format!("unknown function `{name}`"),
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::call(func, &arg));
                }
                match name.as_str() {
                    "x" | "x1" => Ok(Expr::x()),
                    "y" | "x2" => Ok(Expr::y()),
                    "i" => Ok(Expr::constant(C64::new(0.0, 1.0))),
                    "pi" => Ok(Expr::constant(std::f64::consts::PI)),
                    "e" => Ok(Expr::constant(std::f64::consts::E)),
                    _ => Err(Error::UnknownVariable(name)),
                }
            }
            Tok::Op(c) => Err(Error::Parse { offset, message: format!("unexpected `{c}`") }),
        }
    }
}
