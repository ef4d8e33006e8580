//! Syntax tree of the analyzed language.

use std::collections::BTreeMap;
use std::fmt;

use crate::rational::Rational;
use crate::var::{VarId, VarTable};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Program {
    pub vars: VarTable,
    pub body: Vec<Stmt>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Stmt {
    /// Unique per statement, in source order.
    pub id: usize,
    pub line: usize,
    pub kind: StmtKind,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StmtKind {
    /// `x := e` or, with `None`, `x := ?`.
    Assign { var: VarId, rhs: Option<Expr> },
    Havoc(VarId),
    Assume(Cond),
    Assert(Cond),
    If { cond: Cond, then: Vec<Stmt>, otherwise: Vec<Stmt> },
    While { cond: Cond, body: Vec<Stmt> },
    Skip,
}

impl StmtKind {
    pub fn name(&self) -> &'static str {
        match self {
            StmtKind::Assign { .. } => "assign",
            StmtKind::Havoc(_) => "havoc",
            StmtKind::Assume(_) => "assume",
            StmtKind::Assert(_) => "assert",
            StmtKind::If { .. } => "if",
            StmtKind::While { .. } => "while",
            StmtKind::Skip => "skip",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expr {
    Num(Rational),
    Var(VarId),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RelOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Le => "<=",
            RelOp::Lt => "<",
            RelOp::Ge => ">=",
            RelOp::Gt => ">",
            RelOp::Eq => "==",
        }
    }

    /// The complement; `None` for `==`, whose negation is not convex.
    pub fn negate(self) -> Option<RelOp> {
        match self {
            RelOp::Le => Some(RelOp::Gt),
            RelOp::Lt => Some(RelOp::Ge),
            RelOp::Ge => Some(RelOp::Lt),
            RelOp::Gt => Some(RelOp::Le),
            RelOp::Eq => None,
        }
    }

    pub fn holds(self, a: &Rational, b: &Rational) -> bool {
        match self {
            RelOp::Le => a <= b,
            RelOp::Lt => a < b,
            RelOp::Ge => a >= b,
            RelOp::Gt => a > b,
            RelOp::Eq => a == b,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cond {
    pub lhs: Expr,
    pub op: RelOp,
    pub rhs: Expr,
}

/// `Σ coeffs[x]·x + constant`, zero coefficients omitted.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Linear {
    pub coeffs: BTreeMap<VarId, Rational>,
    pub constant: Rational,
}

impl Linear {
    fn constant(c: Rational) -> Self {
        Linear { coeffs: BTreeMap::new(), constant: c }
    }

    fn scale(mut self, k: &Rational) -> Self {
        if k.is_zero() {
            return Linear::default();
        }
        for a in self.coeffs.values_mut() {
            *a = a.mul(k);
        }
        self.constant = self.constant.mul(k);
        self
    }

    fn add(mut self, other: Linear) -> Self {
        for (x, b) in other.coeffs {
            let a = self.coeffs.remove(&x).unwrap_or_default();
            let s = a + b;
            if !s.is_zero() {
                self.coeffs.insert(x, s);
            }
        }
        self.constant = self.constant + other.constant;
        self
    }

    pub fn sub(self, other: Linear) -> Self {
        self.add(other.negated())
    }

    pub fn negated(self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl Expr {
    /// Linear form, or `None` when a product has two non-constant factors.
    pub fn linearize(&self) -> Option<Linear> {
        Some(match self {
            Expr::Num(c) => Linear::constant(c.clone()),
            Expr::Var(x) => Linear {
                coeffs: BTreeMap::from([(*x, Rational::one())]),
                constant: Rational::zero(),
            },
            Expr::Neg(e) => e.linearize()?.scale(&-Rational::one()),
            Expr::Add(a, b) => a.linearize()?.add(b.linearize()?),
            Expr::Sub(a, b) => a.linearize()?.add(b.linearize()?.scale(&-Rational::one())),
            Expr::Mul(a, b) => {
                let (a, b) = (a.linearize()?, b.linearize()?);
                if a.is_constant() {
                    b.scale(&a.constant)
                } else if b.is_constant() {
                    a.scale(&b.constant)
                } else {
                    return None;
                }
            }
        })
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        match self {
            Expr::Num(c) => c.clone(),
            Expr::Var(x) => values[x.0].clone(),
            Expr::Neg(e) => -e.eval(values),
            Expr::Add(a, b) => a.eval(values) + b.eval(values),
            Expr::Sub(a, b) => a.eval(values) - b.eval(values),
            Expr::Mul(a, b) => a.eval(values).mul(&b.eval(values)),
        }
    }

    pub fn display<'a>(&'a self, vars: &'a VarTable) -> impl fmt::Display + 'a {
        Show { e: self, vars }
    }
}

impl Cond {
    pub fn holds(&self, values: &[Rational]) -> bool {
        self.op.holds(&self.lhs.eval(values), &self.rhs.eval(values))
    }

    pub fn display<'a>(&'a self, vars: &'a VarTable) -> impl fmt::Display + 'a {
        ShowCond { c: self, vars }
    }
}

struct Show<'a> {
    e: &'a Expr,
    vars: &'a VarTable,
}

impl Show<'_> {
    fn sub<'b>(&'b self, e: &'b Expr) -> Show<'b> {
        Show { e, vars: self.vars }
    }

    fn prec(e: &Expr) -> u8 {
        match e {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(c) if c.is_negative() => 3,
            Expr::Num(_) | Expr::Var(_) => 4,
        }
    }

    fn operand(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
        if Self::prec(e) < min {
            write!(f, "({})", self.sub(e))
        } else {
            write!(f, "{}", self.sub(e))
        }
    }
}

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.e {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var(x) => f.write_str(self.vars.name(*x)),
            Expr::Neg(e) => {
                f.write_str("-")?;
                self.operand(f, e, 4)
            }
            Expr::Add(a, b) => {
                self.operand(f, a, 1)?;
                f.write_str(" + ")?;
                self.operand(f, b, 2)
            }
            Expr::Sub(a, b) => {
                self.operand(f, a, 1)?;
                f.write_str(" - ")?;
                self.operand(f, b, 2)
            }
            Expr::Mul(a, b) => {
                self.operand(f, a, 2)?;
                f.write_str(" * ")?;
                self.operand(f, b, 3)
            }
        }
    }
}

struct ShowCond<'a> {
    c: &'a Cond,
    vars: &'a VarTable,
}

impl fmt::Display for ShowCond<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.c.lhs.display(self.vars),
            self.c.op.symbol(),
            self.c.rhs.display(self.vars)
        )
    }
}
