//! Octagonal constraints and their line-oriented text format.
//!
//! ```text
//! # comment
//! vars x y z
//! +x +x <= 1        # x <= 1/2
//! -y -y <= 3
//! +y +z <= 1
//! -x <= 2           # single term, doubled: -2x <= 4
//! ```

use std::fmt;

use crate::bound::Bound;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::var::{SVar, VarId, VarTable};

/// The potential constraint `lhs - rhs <= bound` over signed variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Constraint {
    pub lhs: SVar,
    pub rhs: SVar,
    pub bound: Rational,
}

impl Constraint {
    pub fn new(lhs: SVar, rhs: SVar, bound: Rational) -> Self {
        Constraint { lhs, rhs, bound }
    }

    /// `s1·a + s2·b <= c` where `s1`/`s2` are signs (true = `+`).
    pub fn from_sum(a: VarId, pos_a: bool, b: VarId, pos_b: bool, c: Rational) -> Self {
        Constraint::new(SVar::signed(a, pos_a), SVar::signed(b, !pos_b), c)
    }

    /// `s·a <= c`, encoded as `2·s·a <= 2c`.
    pub fn unary(a: VarId, pos: bool, c: Rational) -> Self {
        let u = SVar::signed(a, pos);
        Constraint::new(u, u.bar(), c.double())
    }

    /// The same constraint read through coherence: `(-rhs) - (-lhs) <= bound`.
    pub fn mirror(&self) -> Constraint {
        Constraint::new(self.rhs.bar(), self.lhs.bar(), self.bound.clone())
    }

    pub fn max_var(&self) -> VarId {
        self.lhs.var().max(self.rhs.var())
    }

    pub fn is_integral(&self) -> bool {
        self.bound.is_integer()
    }

    /// Renders in the file syntax.
    pub fn display<'a>(&'a self, vars: &'a VarTable) -> impl fmt::Display + 'a {
        DisplayConstraint { c: self, vars }
    }
}

struct DisplayConstraint<'a> {
    c: &'a Constraint,
    vars: &'a VarTable,
}

impl fmt::Display for DisplayConstraint<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // lhs - rhs = lhs + (-rhs)
        write!(
            f,
            "{} {} <= {}",
            self.vars.svar_name(self.c.lhs),
            self.vars.svar_name(self.c.rhs.bar()),
            self.c.bound
        )
    }
}

/// A parsed constraint file.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConstraintSet {
    pub vars: VarTable,
    pub constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    /// Renders with an explicit `vars` header, one constraint per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.vars.is_empty() {
            out.push_str("vars");
            for n in self.vars.names() {
                out.push(' ');
                out.push_str(n);
            }
            out.push('\n');
        }
        for c in &self.constraints {
            out.push_str(&c.display(&self.vars).to_string());
            out.push('\n');
        }
        out
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn valid_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if is_ident_start(c)) && cs.all(is_ident_char)
}

/// Splits a signed term like `+x`, `-y` or bare `z`.
fn parse_term(tok: &str) -> Option<(bool, &str)> {
    let (pos, name) = match tok.as_bytes().first()? {
        b'+' => (true, &tok[1..]),
        b'-' => (false, &tok[1..]),
        _ => (true, tok),
    };
    valid_ident(name).then_some((pos, name))
}

/// Parses the constraint file format.
///
/// Without a `vars` header, variables are numbered in order of first use.
pub fn parse_constraints(text: &str) -> Result<ConstraintSet> {
    let mut vars = VarTable::new();
    let mut declared = false;
    let mut constraints = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| Error::Syntax { line: line_no, msg };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("vars").filter(|r| r.is_empty() || r.starts_with(char::is_whitespace)) {
            if declared || !constraints.is_empty() {
                return Err(err("`vars` header must come first and only once".into()));
            }
            declared = true;
            for name in rest.split_whitespace() {
                if !valid_ident(name) {
                    return Err(err(format!("bad variable name `{name}`")));
                }
                vars.declare(name)
                    .map_err(|_| err(format!("variable `{name}` declared twice")))?;
            }
            continue;
        }
        let (lhs, rhs) = line
            .split_once("<=")
            .ok_or_else(|| err("expected `<=`".into()))?;
        let bound: Rational = rhs
            .trim()
            .parse()
            .map_err(|_| err(format!("bad constant `{}`", rhs.trim())))?;
        let toks: Vec<&str> = lhs.split_whitespace().collect();
        let mut terms = Vec::with_capacity(2);
        for tok in &toks {
            let (pos, name) =
                parse_term(tok).ok_or_else(|| err(format!("bad term `{tok}`")))?;
            let id = if declared {
                vars.get(name)
                    .ok_or_else(|| err(format!("undeclared variable `{name}`")))?
            } else {
                vars.intern(name)
            };
            terms.push((id, pos));
        }
        let c = match terms.as_slice() {
            [(a, pa)] => Constraint::unary(*a, *pa, bound),
            [(a, pa), (b, pb)] => Constraint::from_sum(*a, *pa, *b, *pb, bound),
            _ => return Err(err(format!("expected one or two terms, found {}", toks.len()))),
        };
        constraints.push(c);
    }
    Ok(ConstraintSet { vars, constraints })
}

/// One line per finite cell: `u v bound`, with signed variables as `+x`/`-x`.
pub fn format_triples<'a, I>(cells: I, vars: &VarTable) -> String
where
    I: IntoIterator<Item = (SVar, SVar, &'a Bound)>,
{
    let mut out = String::new();
    for (u, v, b) in cells {
        out.push_str(&format!("{} {} {}\n", vars.svar_name(u), vars.svar_name(v), b));
    }
    out
}
