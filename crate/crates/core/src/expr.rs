//! Small arithmetic expressions over the variables `m` and `xi`, used for
//! weight generators, coefficients and kernel profiles in configs.
//!
//! Grammar, loosest binding first: `+ -`, `* /`, unary `-`, right
//! associative `^`. Functions: `exp`, `abs`, `sqrt`, `pow`, `min`, `max`.
//! The constant `pi` is predefined.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    M,
    Xi,
}

impl Var {
    pub fn name(&self) -> &'static str {
        match self {
            Var::M => "m",
            Var::Xi => "xi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Abs,
    Sqrt,
    Pow,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "pow" => Func::Pow,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Func::Pow | Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone)]
pub struct Expr {
    src: String,
    root: Node,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

/// Fully parenthesized rendering; parses back to the same tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => {
                if *v < 0.0 {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Node::Var(v) => f.write_str(v.name()),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

fn err(column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line: 1,
        column,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
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
            let v: f64 = text
                .parse()
                .map_err(|_| err(col, format!("malformed number '{text}'")))?;
            out.push((Tok::Num(v), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else {
            let t = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => return Err(err(col, format!("unexpected character '{c}'"))),
            };
            out.push((t, col));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Tok::Op(c)) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(err(self.col(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(c) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.eat_op(&['-', '+']) {
            Some('-') => Ok(Node::Neg(Box::new(self.unary()?))),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let col = self.col();
        match self.toks.get(self.pos).map(|t| t.0.clone()) {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::lookup(&name)
                        .ok_or_else(|| err(col, format!("unknown function '{name}'")))?;
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "')'")?;
                    if args.len() != func.arity() {
                        return Err(err(
                            col,
                            format!("{} takes {} argument(s), got {}", func.name(), func.arity(), args.len()),
                        ));
                    }
                    return Ok(Node::Call(func, args));
                }
                match name.as_str() {
                    "m" => Ok(Node::Var(Var::M)),
                    "xi" => Ok(Node::Var(Var::Xi)),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    _ => Err(err(col, format!("unknown variable '{name}'"))),
                }
            }
            Some(_) => Err(err(col, "expected a number, variable, function or '('")),
            None => Err(err(col, "unexpected end of expression")),
        }
    }
}

/// Parses `src`; errors carry the 1-based column.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = lex(src)?;
    let end = src.chars().count() + 1;
    let mut p = Parser { toks, pos: 0, end };
    let root = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(err(p.col(), "unexpected trailing input"));
    }
    Ok(Expr {
        src: src.trim().to_string(),
        root,
    })
}

/// Values an expression can be evaluated on.
pub trait Scalar: Clone {
    fn lift(&self, v: f64) -> Self;
    /// Real part of the value, used for domain checks and `min`/`max`.
    fn real(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn exp(&self) -> Self;
    fn abs(&self) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn pow(&self, o: &Self) -> Self;
    /// Whether the value carries no dependence on the variables.
    fn constant_value(&self) -> Option<f64>;
}

impl Scalar for f64 {
    fn lift(&self, v: f64) -> Self {
        v
    }
    fn real(&self) -> f64 {
        *self
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powf(&self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() < 64.0 {
            self.powi(p as i32)
        } else {
            f64::powf(*self, p)
        }
    }
    fn pow(&self, o: &Self) -> Self {
        Scalar::powf(self, *o)
    }
    fn constant_value(&self) -> Option<f64> {
        Some(*self)
    }
}

impl Scalar for Jet {
    fn lift(&self, v: f64) -> Self {
        self.constant_like(Complex64::new(v, 0.0))
    }
    fn real(&self) -> f64 {
        self.value().re
    }
    fn is_finite(&self) -> bool {
        Jet::is_finite(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self * &o.recip()
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn abs(&self) -> Self {
        Jet::abs(self)
    }
    fn powf(&self, p: f64) -> Self {
        Jet::powf(self, p)
    }
    fn pow(&self, o: &Self) -> Self {
        match o.constant_value() {
            Some(p) => Jet::powf(self, p),
            None => self.powj(o),
        }
    }
    fn constant_value(&self) -> Option<f64> {
        let v = self.value();
        let rest = self.coeffs().iter().skip(1).all(|c| *c == Complex64::new(0.0, 0.0));
        (rest && v.im == 0.0).then_some(v.re)
    }
}

/// Variable bindings for one evaluation.
#[derive(Debug, Clone)]
pub struct Env<S> {
    pub m: Option<S>,
    pub xi: Option<S>,
}

impl<S> Env<S> {
    pub fn m(v: S) -> Self {
        Env { m: Some(v), xi: None }
    }

    pub fn xi(v: S) -> Self {
        Env { m: None, xi: Some(v) }
    }
}

fn domain(msg: String) -> Error {
    Error::Domain(msg)
}

fn eval_node<S: Scalar>(n: &Node, env: &Env<S>, tpl: &S) -> Result<S> {
    let v = match n {
        Node::Num(v) => tpl.lift(*v),
        Node::Var(var) => {
            let slot = match var {
                Var::M => &env.m,
                Var::Xi => &env.xi,
            };
            slot.clone()
                .ok_or_else(|| Error::Config(format!("variable '{}' is not bound here", var.name())))?
        }
        Node::Neg(a) => eval_node(a, env, tpl)?.neg(),
        Node::Bin(op, a, b) => {
            let (x, y) = (eval_node(a, env, tpl)?, eval_node(b, env, tpl)?);
            match op {
                BinOp::Add => x.add(&y),
                BinOp::Sub => x.sub(&y),
                BinOp::Mul => x.mul(&y),
                BinOp::Div => {
                    if y.real() == 0.0 && y.constant_value().is_some() {
                        return Err(domain(format!("division by zero in '{n}'")));
                    }
                    x.div(&y)
                }
                BinOp::Pow => power(&x, &y, n)?,
            }
        }
        Node::Call(f, args) => {
            let vals = args
                .iter()
                .map(|a| eval_node(a, env, tpl))
                .collect::<Result<Vec<S>>>()?;
            match f {
                Func::Exp => vals[0].exp(),
                Func::Abs => vals[0].abs(),
                Func::Sqrt => {
                    if vals[0].real() < 0.0 {
                        return Err(domain(format!("square root of a negative value in '{n}'")));
                    }
                    vals[0].powf(0.5)
                }
                Func::Pow => power(&vals[0], &vals[1], n)?,
                Func::Min => {
                    if vals[1].real() < vals[0].real() { vals[1].clone() } else { vals[0].clone() }
                }
                Func::Max => {
                    if vals[1].real() > vals[0].real() { vals[1].clone() } else { vals[0].clone() }
                }
            }
        }
    };
    if !v.is_finite() {
        return Err(domain(format!("'{n}' is not finite at the given point")));
    }
    Ok(v)
}

fn power<S: Scalar>(x: &S, y: &S, n: &Node) -> Result<S> {
    let base = x.real();
    match y.constant_value() {
        Some(p) => {
            if base == 0.0 && p < 0.0 {
                return Err(domain(format!("zero raised to a negative power in '{n}'")));
            }
            if base < 0.0 && p.fract() != 0.0 {
                return Err(domain(format!("negative base with a fractional power in '{n}'")));
            }
            Ok(x.powf(p))
        }
        None => {
            if base <= 0.0 {
                return Err(domain(format!("variable exponent needs a positive base in '{n}'")));
            }
            Ok(x.pow(y))
        }
    }
}

impl Expr {
    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Variables referenced anywhere in the expression.
    pub fn variables(&self) -> Vec<Var> {
        fn walk(n: &Node, out: &mut Vec<Var>) {
            match n {
                Node::Num(_) => {}
                Node::Var(v) => {
                    if !out.contains(v) {
                        out.push(*v)
                    }
                }
                Node::Neg(a) => walk(a, out),
                Node::Bin(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Node::Call(_, args) => args.iter().for_each(|a| walk(a, out)),
            }
        }
        let mut v = Vec::new();
        walk(&self.root, &mut v);
        v
    }

    /// Errors unless every variable is in `allowed`.
    pub fn require_only(&self, allowed: &[Var]) -> Result<()> {
        if let Some(v) = self.variables().into_iter().find(|v| !allowed.contains(v)) {
            return Err(Error::Config(format!(
                "'{}' uses variable '{}', which is not available here",
                self.src,
                v.name()
            )));
        }
        Ok(())
    }

    pub fn eval<S: Scalar>(&self, env: &Env<S>, template: &S) -> Result<S> {
        eval_node(&self.root, env, template)
    }

    pub fn eval_f64(&self, env: &Env<f64>) -> Result<f64> {
        self.eval(env, &0.0)
    }

    pub fn eval_m(&self, m: f64) -> Result<f64> {
        self.eval_f64(&Env::m(m))
    }

    pub fn eval_xi(&self, xi: f64) -> Result<f64> {
        self.eval_f64(&Env::xi(xi))
    }

    /// Jet evaluation in `xi`; domain failures give a non-finite jet.
    pub fn eval_jet_xi(&self, xi: &Jet) -> Jet {
        self.eval(&Env::xi(xi.clone()), xi)
            .unwrap_or_else(|_| xi.constant_like(Complex64::new(f64::NAN, 0.0)))
    }
}
