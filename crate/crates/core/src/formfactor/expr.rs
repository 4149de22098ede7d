//! A small expression language for form-factor families read from files.
//!
//! Expressions are built from complex arithmetic (`+ - * / ^`, parentheses),
//! numbers, the constants `i`, `pi`, `mu` (mass) and `r` (bump radius), the
//! arguments `z1 … zk`, the total energy `E = Σ cosh z_j`, and the functions
//! `sinh cosh tanh coth exp sqrt ln`, `S(x)` (scattering function) and
//! `gt(w)` (Fourier-Laplace transform of the bump, normalised to `gt(0) = 1`).
//!
//! ```text
//! sinh((z1 - z2)/2) * gt(mu*E)
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FormFactorFamily, PoleSpec};
use crate::ising::TestFunction1D;
use crate::kinematics::{ModelKind, ModelParams, ScatteringFunction};
use crate::{Error, Result, C64, I};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(C64),
    Arg(usize),
    Mass,
    Radius,
    Energy,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sinh,
    Cosh,
    Tanh,
    Coth,
    Exp,
    Sqrt,
    Ln,
    S,
    Gt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sinh" => Self::Sinh,
            "cosh" => Self::Cosh,
            "tanh" => Self::Tanh,
            "coth" => Self::Coth,
            "exp" => Self::Exp,
            "sqrt" => Self::Sqrt,
            "ln" | "log" => Self::Ln,
            "S" => Self::S,
            "gt" | "gtilde" => Self::Gt,
            _ => return None,
        })
    }
}

/// Everything an expression may refer to besides its arguments.
pub struct Context<'a> {
    pub mass: f64,
    pub radius: f64,
    pub s: &'a ScatteringFunction,
    pub bump: &'a TestFunction1D,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("unexpected '{}' in '{text}'", p.tokens[p.pos])));
        }
        Ok(e)
    }

    /// Largest argument index referenced.
    pub fn arity(&self) -> usize {
        match self {
            Self::Arg(j) => *j,
            Self::Neg(a) | Self::Call(_, a) => a.arity(),
            Self::Bin(_, a, b) => a.arity().max(b.arity()),
            _ => 0,
        }
    }

    pub fn eval(&self, z: &[C64], ctx: &Context) -> Result<C64> {
        Ok(match self {
            Self::Num(v) => *v,
            Self::Arg(j) => *z
                .get(j - 1)
                .ok_or_else(|| Error::Evaluation(format!("z{j} referenced with {} arguments", z.len())))?,
            Self::Mass => C64::from(ctx.mass),
            Self::Radius => C64::from(ctx.radius),
            Self::Energy => z.iter().map(|v| v.cosh()).sum(),
            Self::Neg(a) => -a.eval(z, ctx)?,
            Self::Bin(op, a, b) => {
                let (x, y) = (a.eval(z, ctx)?, b.eval(z, ctx)?);
                match op {
                    Op::Add => x + y,
                    Op::Sub => x - y,
                    Op::Mul => x * y,
                    Op::Div => {
                        if y == C64::new(0.0, 0.0) {
                            return Err(Error::Evaluation("division by zero".into()));
                        }
                        x / y
                    }
                    Op::Pow => {
                        if y.im == 0.0 && y.re.fract() == 0.0 && y.re.abs() < 64.0 {
                            x.powi(y.re as i32)
                        } else {
                            x.powc(y)
                        }
                    }
                }
            }
            Self::Call(f, a) => {
                let x = a.eval(z, ctx)?;
                match f {
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Coth => {
                        let t = x.tanh();
                        if t.norm() == 0.0 {
                            return Err(Error::Evaluation("coth at zero".into()));
                        }
                        1.0 / t
                    }
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                    Func::Ln => x.ln(),
                    Func::S => ctx.s.eval(x)?,
                    Func::Gt => ctx.bump.transform(x),
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Num(v) => write!(f, "{v}"),
            Self::Ident(s) => f.write_str(s),
            Self::Sym(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token::Num(s.parse().map_err(|_| Error::Parse(format!("bad number '{s}'")))?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_sym(&self, c: char) -> bool {
        matches!(self.tokens.get(self.pos), Some(Token::Sym(s)) if *s == c)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.peek_sym('+') {
                Op::Add
            } else if self.peek_sym('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.peek_sym('*') {
                Op::Mul
            } else if self.peek_sym('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_sym('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.peek_sym('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek_sym('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let tok = self.tokens.get(self.pos).cloned().ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Expr::Num(C64::from(v))),
            Token::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "i" => Ok(Expr::Num(I)),
                    "pi" => Ok(Expr::Num(C64::from(std::f64::consts::PI))),
                    "mu" => Ok(Expr::Mass),
                    "r" => Ok(Expr::Radius),
                    "E" => {
                        if self.peek_sym('(') {
                            self.pos += 1;
                            self.expect(')')?;
                        }
                        Ok(Expr::Energy)
                    }
                    _ => match name.strip_prefix('z').and_then(|d| d.parse::<usize>().ok()) {
                        Some(j) if j >= 1 => Ok(Expr::Arg(j)),
                        _ => Err(Error::Parse(format!("unknown identifier '{name}'"))),
                    },
                }
            }
            Token::Sym(c) => Err(Error::Parse(format!("unexpected '{c}'"))),
        }
    }
}

/// A family as written in a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    pub model: ModelKind,
    #[serde(default)]
    pub coupling: f64,
    #[serde(default = "one")]
    pub mass: f64,
    /// Radius of the bump behind `gt`.
    pub radius: f64,
    /// Member order (as a string key) to expression.
    pub members: BTreeMap<String, String>,
    /// Explicit poles `[k, a, b]`.
    #[serde(default)]
    pub poles: Vec<[usize; 3]>,
    /// Members with a declared pole on every pair of slots.
    #[serde(default)]
    pub all_pair_poles: Vec<usize>,
}

fn one() -> f64 {
    1.0
}

impl FamilySpec {
    pub fn build(&self) -> Result<FormFactorFamily> {
        let params = ModelParams::new(self.model, self.mass, self.coupling)?;
        let s = ScatteringFunction::new(params);
        let bump = Arc::new(TestFunction1D::new(self.radius)?);
        let mut fam = FormFactorFamily::new(self.name.clone(), s, self.radius);
        for (key, text) in &self.members {
            let k: usize = key
                .trim_start_matches(['F', 'f'])
                .parse()
                .map_err(|_| Error::Parse(format!("member key '{key}' is not an order")))?;
            let e = Expr::parse(text)?;
            if e.arity() > k {
                return Err(Error::Parse(format!("member F_{k} references z{}", e.arity())));
            }
            let (s, bump, mass, radius) = (s, bump.clone(), self.mass, self.radius);
            fam = fam.with_member(
                k,
                Arc::new(move |z: &[C64]| e.eval(z, &Context { mass, radius, s: &s, bump: &bump })),
            );
        }
        for &[k, a, b] in &self.poles {
            if !(1 <= a && a < b && b <= k) {
                return Err(Error::Parse(format!("pole [{k}, {a}, {b}] needs 1 <= a < b <= k")));
            }
            fam = fam.with_pole(PoleSpec { k, a, b });
        }
        for &k in &self.all_pair_poles {
            fam = fam.with_all_pair_poles(k);
        }
        Ok(fam)
    }
}
