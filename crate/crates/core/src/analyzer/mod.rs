//! Forward abstract interpretation of a small imperative language.
//!
//! ```text
//! program := stmt*
//! stmt    := "var" ident ("," ident)* ";"
//!          | ident ":=" (expr | "?") ";"
//!          | "havoc" ident ";" | "skip" ";"
//!          | "assume" cond ";" | "assert" cond ";"
//!          | "if" cond block ("else" (block | if-stmt))?
//!          | "while" cond block
//! block   := "{" stmt* "}"
//! cond    := expr ("<=" | "<" | ">=" | ">" | "==") expr
//! expr    := term (("+" | "-") term)*
//! term    := unary ("*" unary)*
//! unary   := ("-" | "+") unary | integer | ident | "(" expr ")"
//! ```
//!
//! Comments run from `#` or `//` to the end of the line.

pub mod ast;
mod parser;
mod report;

use std::collections::{BTreeSet, HashMap};

pub use ast::{Cond, Expr, Linear, Program, RelOp, Stmt, StmtKind};
pub use parser::parse_program;
pub use report::{render, Format, ReportOptions};

use crate::constraint::Constraint;
use crate::domain::{widen, OctValue, Rhs, WidenConfig, Widened};
use crate::error::Result;
use crate::rational::Rational;
use crate::sparse::Mode;
use crate::var::VarId;

/// Where in the program a state was recorded.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PointKey {
    Entry,
    /// After statement `id`.
    After(usize),
    /// Head of the loop `id`, the loop invariant.
    LoopHead(usize),
    Exit,
}

#[derive(Clone, Debug)]
pub struct Point {
    pub key: PointKey,
    pub line: usize,
    /// `entry`, `exit`, a statement kind or `loop-head`.
    pub kind: &'static str,
    pub value: OctValue,
}

impl Point {
    pub fn label(&self) -> String {
        match self.key {
            PointKey::Entry | PointKey::Exit => self.kind.to_string(),
            _ => format!("L{} {}", self.line, self.kind),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AssertOutcome {
    pub line: usize,
    pub text: String,
    pub proven: bool,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Warning {
    pub line: usize,
    pub msg: String,
}

#[derive(Clone, Debug)]
pub struct AnalysisResult {
    /// In order of first visit.
    pub points: Vec<Point>,
    /// In source order.
    pub asserts: Vec<AssertOutcome>,
    pub warnings: Vec<Warning>,
}

impl AnalysisResult {
    pub fn point(&self, key: PointKey) -> Option<&Point> {
        self.points.iter().find(|p| p.key == key)
    }

    pub fn exit(&self) -> &OctValue {
        &self.point(PointKey::Exit).expect("exit is always recorded").value
    }

    pub fn all_proven(&self) -> bool {
        self.asserts.iter().all(|a| a.proven)
    }
}

/// A condition translated to octagonal constraints.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Translated {
    /// Conjunction; empty means no information.
    Constraints(Vec<Constraint>),
    /// Unsatisfiable without looking at the state (`1 <= 0`).
    False,
    /// Not expressible; the payload says why.
    NonOctagonal(String),
}

/// Translates `cond` (or its negation) to constraints. `strict_approx` is set
/// when a strict comparison had to be weakened.
pub fn translate(cond: &Cond, negate: bool, mode: Mode, strict_approx: &mut bool) -> Translated {
    let op = if negate {
        match cond.op.negate() {
            Some(op) => op,
            None => return Translated::Constraints(Vec::new()),
        }
    } else {
        cond.op
    };
    let (Some(l), Some(r)) = (cond.lhs.linearize(), cond.rhs.linearize()) else {
        return Translated::NonOctagonal("non-linear comparison".into());
    };
    // lhs - rhs  op  0
    let diff = l.sub(r);
    let parts: &[(bool, bool)] = match op {
        // (negate the sum, strict)
        RelOp::Le => &[(false, false)],
        RelOp::Lt => &[(false, true)],
        RelOp::Ge => &[(true, false)],
        RelOp::Gt => &[(true, true)],
        RelOp::Eq => &[(false, false), (true, false)],
    };
    let mut out = Vec::new();
    for &(neg, strict) in parts {
        let lin = if neg { diff.clone().negated() } else { diff.clone() };
        match le_zero(&lin, strict, mode, strict_approx) {
            Translated::Constraints(cs) => out.extend(cs),
            other => return other,
        }
    }
    Translated::Constraints(out)
}

/// `lin <= 0` (or `< 0`) in unit-coefficient octagonal form.
fn le_zero(lin: &Linear, strict: bool, mode: Mode, strict_approx: &mut bool) -> Translated {
    let bound = -lin.constant.clone();
    let terms: Vec<(VarId, &Rational)> = lin.coeffs.iter().map(|(x, a)| (*x, a)).collect();
    let scale = match terms.as_slice() {
        [] => {
            let holds = if strict { bound.is_positive() } else { !bound.is_negative() };
            return if holds { Translated::Constraints(Vec::new()) } else { Translated::False };
        }
        [(_, a)] => a.abs(),
        [(_, a), (_, b)] if a.abs() == b.abs() => a.abs(),
        _ => {
            return Translated::NonOctagonal(format!(
                "{} variables with coefficients {}",
                terms.len(),
                terms.iter().map(|(_, a)| a.to_string()).collect::<Vec<_>>().join(", ")
            ))
        }
    };
    let mut c = bound.div(&scale);
    if strict {
        match mode {
            Mode::Integer => c = c.ceil() - Rational::one(),
            Mode::Rational => *strict_approx = true,
        }
    }
    let cs = match terms.as_slice() {
        [(x, a)] => Constraint::unary(*x, !a.is_negative(), c),
        [(x, a), (y, b)] => Constraint::from_sum(*x, !a.is_negative(), *y, !b.is_negative(), c),
        _ => unreachable!(),
    };
    Translated::Constraints(vec![cs])
}

struct Analyzer<'p> {
    program: &'p Program,
    mode: Mode,
    cfg: WidenConfig,
    top: OctValue,
    points: Vec<Point>,
    index: HashMap<PointKey, usize>,
    asserts: HashMap<usize, AssertOutcome>,
    warnings: BTreeSet<Warning>,
}

impl Analyzer<'_> {
    fn record(&mut self, key: PointKey, line: usize, kind: &'static str, value: &OctValue) {
        let p = Point { key, line, kind, value: value.clone() };
        match self.index.get(&key) {
            Some(&i) => self.points[i] = p,
            None => {
                self.index.insert(key, self.points.len());
                self.points.push(p);
            }
        }
    }

    fn warn(&mut self, line: usize, msg: impl Into<String>) {
        self.warnings.insert(Warning { line, msg: msg.into() });
    }

    fn cond(&mut self, cond: &Cond, negate: bool, line: usize) -> Translated {
        let mut strict = false;
        let t = translate(cond, negate, self.mode, &mut strict);
        if strict {
            self.warn(line, "strict comparison treated as non-strict over the rationals");
        }
        t
    }

    fn assume(&mut self, state: &OctValue, cond: &Cond, negate: bool, line: usize) -> Result<OctValue> {
        match self.cond(cond, negate, line) {
            Translated::Constraints(cs) => state.assume_all(&cs),
            Translated::False => Ok(state.bottom_like()),
            Translated::NonOctagonal(why) => {
                self.warn(line, format!("condition ignored: {why}"));
                Ok(state.clone())
            }
        }
    }

    fn check(&mut self, state: &OctValue, cond: &Cond, line: usize) -> Result<bool> {
        if state.is_bottom() {
            return Ok(true);
        }
        if self.mode == Mode::Rational && matches!(cond.op, RelOp::Lt | RelOp::Gt) {
            // The negation is non-strict and therefore exact: the assertion
            // holds iff no state satisfies it.
            return Ok(match self.cond(cond, true, line) {
                Translated::Constraints(cs) => state.assume_all(&cs)?.is_bottom(),
                Translated::False => true,
                Translated::NonOctagonal(why) => {
                    self.warn(line, format!("assertion not checked: {why}"));
                    false
                }
            });
        }
        Ok(match self.cond(cond, false, line) {
            Translated::Constraints(cs) => {
                let mut ok = true;
                for c in &cs {
                    ok &= state.leq(&self.top.assume(c)?)?;
                }
                ok
            }
            Translated::False => false,
            Translated::NonOctagonal(why) => {
                self.warn(line, format!("assertion not checked: {why}"));
                false
            }
        })
    }

    fn block(&mut self, stmts: &[Stmt], mut state: OctValue) -> Result<OctValue> {
        for s in stmts {
            state = self.stmt(s, state)?;
        }
        Ok(state)
    }

    fn stmt(&mut self, s: &Stmt, state: OctValue) -> Result<OctValue> {
        let out = match &s.kind {
            StmtKind::Skip => state,
            StmtKind::Havoc(x) => state.assign(*x, &Rhs::Havoc)?,
            StmtKind::Assign { var, rhs: None } => state.assign(*var, &Rhs::Havoc)?,
            StmtKind::Assign { var, rhs: Some(e) } => {
                let rhs = e
                    .linearize()
                    .ok_or_else(|| "non-linear expression".to_string())
                    .and_then(|l| {
                        let coeffs: Vec<_> = l.coeffs.into_iter().collect();
                        Rhs::linear(&coeffs, l.constant).map_err(|e| e.to_string())
                    });
                match rhs {
                    Ok(rhs) => state.assign(*var, &rhs)?,
                    Err(why) => {
                        let name = self.program.vars.name(*var).to_string();
                        self.warn(s.line, format!("{why}; `{name}` havocked"));
                        state.assign(*var, &Rhs::Havoc)?
                    }
                }
            }
            StmtKind::Assume(c) => self.assume(&state, c, false, s.line)?,
            StmtKind::Assert(c) => {
                let proven = self.check(&state, c, s.line)?;
                let text = format!("assert {}", c.display(&self.program.vars));
                self.asserts.insert(s.id, AssertOutcome { line: s.line, text, proven });
                self.assume(&state, c, false, s.line)?
            }
            StmtKind::If { cond, then, otherwise } => {
                let t = self.assume(&state, cond, false, s.line)?;
                let t = self.block(then, t)?;
                let e = self.assume(&state, cond, true, s.line)?;
                let e = self.block(otherwise, e)?;
                t.join(&e)?
            }
            StmtKind::While { cond, body } => self.while_loop(s, cond, body, state)?,
        };
        self.record(PointKey::After(s.id), s.line, s.kind.name(), &out);
        Ok(out)
    }

    fn while_loop(&mut self, s: &Stmt, cond: &Cond, body: &[Stmt], entry: OctValue) -> Result<OctValue> {
        let mut acc: Widened = entry.clone().into();
        let mut head = entry.clone();
        let mut iter = 0;
        let next = loop {
            self.record(PointKey::LoopHead(s.id), s.line, "loop-head", &head);
            let inside = self.assume(&head, cond, false, s.line)?;
            let next = entry.join(&self.block(body, inside)?)?;
            if acc.entails(&next)? {
                break next;
            }
            acc = widen(&acc, &next, &self.cfg, iter)?;
            head = acc.close()?;
            iter += 1;
        };
        // `next` is below `head` and is itself a post-fixpoint; the meet only
        // guards against a non-closed accumulator.
        let refined = next.meet(&head)?;
        self.record(PointKey::LoopHead(s.id), s.line, "loop-head", &refined);
        self.assume(&refined, cond, true, s.line)
    }
}

/// Runs the analysis from the unconstrained state.
pub fn analyze(program: &Program, cfg: &WidenConfig, mode: Mode) -> Result<AnalysisResult> {
    let top = OctValue::top(program.vars.clone(), mode);
    let mut a = Analyzer {
        program,
        mode,
        cfg: *cfg,
        top: top.clone(),
        points: Vec::new(),
        index: HashMap::new(),
        asserts: HashMap::new(),
        warnings: BTreeSet::new(),
    };
    a.record(PointKey::Entry, 0, "entry", &top);
    let exit = a.block(&program.body, top)?;
    let last_line = last_line(&program.body);
    a.record(PointKey::Exit, last_line, "exit", &exit);
    let mut asserts: Vec<(usize, AssertOutcome)> = a.asserts.into_iter().collect();
    asserts.sort_by_key(|(id, _)| *id);
    Ok(AnalysisResult {
        points: a.points,
        asserts: asserts.into_iter().map(|(_, o)| o).collect(),
        warnings: a.warnings.into_iter().collect(),
    })
}

fn last_line(stmts: &[Stmt]) -> usize {
    stmts.last().map_or(0, |s| match &s.kind {
        StmtKind::If { then, otherwise, .. } => s.line.max(last_line(then)).max(last_line(otherwise)),
        StmtKind::While { body, .. } => s.line.max(last_line(body)),
        _ => s.line,
    })
}
