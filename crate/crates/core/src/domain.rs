//! Octagon values with a bottom element, assignment and widening.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::constraint::Constraint;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sparse::{Interval, Mode, SparseDbm};
use crate::var::{Env, SVar, VarId, VarTable};

/// An abstract state: bottom, or a weakly closed sparse DBM over named
/// variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OctValue {
    vars: Arc<VarTable>,
    mode: Mode,
    dbm: Option<SparseDbm>,
}

/// Right-hand side of an assignment `x := rhs`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Rhs {
    /// `c`
    Const(Rational),
    /// `±y + c`; `y` may be the assigned variable itself.
    Var { var: VarId, positive: bool, offset: Rational },
    /// `?`, any value.
    Havoc,
}

impl Rhs {
    /// Classifies `Σ coeff·x + constant`. Anything with more than one
    /// variable or a coefficient other than `±1` is not octagonal.
    pub fn linear(coeffs: &[(VarId, Rational)], constant: Rational) -> Result<Rhs> {
        let mut terms: Vec<(VarId, Rational)> = Vec::new();
        for (x, a) in coeffs {
            match terms.iter_mut().find(|(y, _)| y == x) {
                Some((_, b)) => *b = &*b + a,
                None => terms.push((*x, a.clone())),
            }
        }
        terms.retain(|(_, a)| !a.is_zero());
        match terms.as_slice() {
            [] => Ok(Rhs::Const(constant)),
            [(x, a)] if a.abs() == Rational::one() => Ok(Rhs::Var {
                var: *x,
                positive: !a.is_negative(),
                offset: constant,
            }),
            _ => Err(Error::NonOctagonal(format!(
                "{} term(s) with coefficients {}",
                terms.len(),
                terms.iter().map(|(_, a)| a.to_string()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }
}

impl OctValue {
    pub fn top(vars: VarTable, mode: Mode) -> Self {
        let n = vars.len();
        OctValue { vars: Arc::new(vars), mode, dbm: Some(SparseDbm::top(n, mode)) }
    }

    pub fn bottom(vars: VarTable, mode: Mode) -> Self {
        OctValue { vars: Arc::new(vars), mode, dbm: None }
    }

    /// Closes a constraint list; bottom when unsatisfiable.
    pub fn from_constraints(vars: VarTable, mode: Mode, cs: &[Constraint]) -> Result<Self> {
        let dbm = SparseDbm::from_constraints(cs, vars.len(), mode)?;
        Ok(OctValue { vars: Arc::new(vars), mode, dbm })
    }

    /// Wraps a weakly closed matrix.
    pub fn from_dbm(vars: VarTable, dbm: SparseDbm) -> Result<Self> {
        if vars.len() != dbm.n_vars() {
            return Err(Error::DimensionMismatch(vars.len(), dbm.n_vars()));
        }
        Ok(OctValue { vars: Arc::new(vars), mode: dbm.mode(), dbm: Some(dbm) })
    }

    /// Bottom or top with the same variables and mode as `self`.
    pub fn bottom_like(&self) -> Self {
        OctValue { vars: Arc::clone(&self.vars), mode: self.mode, dbm: None }
    }

    pub fn top_like(&self) -> Self {
        self.with_dbm(Some(SparseDbm::top(self.n_vars(), self.mode)))
    }

    fn with_dbm(&self, dbm: Option<SparseDbm>) -> Self {
        OctValue { vars: Arc::clone(&self.vars), mode: self.mode, dbm }
    }

    pub fn is_bottom(&self) -> bool {
        self.dbm.is_none()
    }

    pub fn dbm(&self) -> Option<&SparseDbm> {
        self.dbm.as_ref()
    }

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn nnz(&self) -> usize {
        self.dbm.as_ref().map_or(0, SparseDbm::nnz)
    }

    /// Interval of `x`; `None` on bottom.
    pub fn bounds_of(&self, x: VarId) -> Option<Interval> {
        self.dbm.as_ref().map(|m| m.bounds_of(x))
    }

    /// Whether the point `rho` satisfies every stored cell.
    pub fn contains(&self, rho: &Env) -> bool {
        let Some(m) = &self.dbm else { return false };
        m.cells().all(|(u, v, c)| {
            let lhs = rho.eval_signed(u).expect("env too small");
            let rhs = rho.eval_signed(v).expect("env too small");
            lhs - rhs <= *c
        })
    }

    fn check_var(&self, x: VarId) -> Result<()> {
        if x.0 >= self.n_vars() {
            return Err(Error::VarOutOfRange { index: x.0, n_vars: self.n_vars() });
        }
        Ok(())
    }

    fn check_compatible(&self, other: &OctValue) -> Result<()> {
        if self.mode != other.mode {
            return Err(Error::ModeMismatch);
        }
        if !Arc::ptr_eq(&self.vars, &other.vars) && self.vars != other.vars {
            return Err(Error::VarTableMismatch);
        }
        Ok(())
    }

    // ---------------------------------------------------------------
    // Lattice

    pub fn leq(&self, other: &OctValue) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(match (&self.dbm, &other.dbm) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a.leq_weak(b),
        })
    }

    pub fn join(&self, other: &OctValue) -> Result<OctValue> {
        self.check_compatible(other)?;
        Ok(match (&self.dbm, &other.dbm) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => self.with_dbm(Some(a.join_weak(b))),
        })
    }

    /// Greatest lower bound, by assuming every cell of `other` in `self`.
    pub fn meet(&self, other: &OctValue) -> Result<OctValue> {
        self.check_compatible(other)?;
        let (Some(_), Some(b)) = (&self.dbm, &other.dbm) else {
            return Ok(self.bottom_like());
        };
        let mut out = self.clone();
        for c in b.constraints() {
            out = out.assume(&c)?;
            if out.is_bottom() {
                break;
            }
        }
        Ok(out)
    }

    // ---------------------------------------------------------------
    // Transfer functions

    /// Adds `lhs - rhs <= bound`.
    pub fn assume(&self, c: &Constraint) -> Result<OctValue> {
        self.check_var(c.max_var())?;
        let Some(m) = &self.dbm else { return Ok(self.clone()) };
        Ok(self.with_dbm(m.assume_weak(c.lhs, c.rhs, &c.bound)))
    }

    /// Adds every constraint in turn.
    pub fn assume_all(&self, cs: &[Constraint]) -> Result<OctValue> {
        let mut out = self.clone();
        for c in cs {
            out = out.assume(c)?;
        }
        Ok(out)
    }

    pub fn forget(&self, x: VarId) -> Result<OctValue> {
        self.check_var(x)?;
        Ok(self.with_dbm(self.dbm.as_ref().map(|m| m.forget_weak(x))))
    }

    /// `x := rhs`.
    pub fn assign(&self, x: VarId, rhs: &Rhs) -> Result<OctValue> {
        self.check_var(x)?;
        if let Rhs::Var { var, .. } = rhs {
            self.check_var(*var)?;
        }
        let Some(m) = &self.dbm else { return Ok(self.clone()) };
        let out = match rhs {
            Rhs::Havoc => Some(m.forget_weak(x)),
            Rhs::Const(c) => {
                let two_c = c.double();
                m.forget_weak(x)
                    .assume_weak(x.pos(), x.neg(), &two_c)
                    .and_then(|m| m.assume_weak(x.neg(), x.pos(), &-two_c))
            }
            Rhs::Var { var, positive, offset } if *var != x => {
                let y = SVar::signed(*var, *positive);
                assign_var(&m.forget_weak(x), x.pos(), y, offset)
            }
            Rhs::Var { positive, offset, .. } => {
                // Go through a fresh dimension t: t = ±x + c, forget x, rename t.
                let n = m.n_vars();
                let t = VarId(n);
                let y = SVar::signed(x, *positive);
                assign_var(&m.with_extra_vars(1), t.pos(), y, offset).map(|w| {
                    w.remap(n, |v| {
                        if v == x {
                            None
                        } else if v == t {
                            Some(x)
                        } else {
                            Some(v)
                        }
                    })
                })
            }
        };
        Ok(self.with_dbm(out))
    }

    // ---------------------------------------------------------------
    // Variables

    /// Appends an unconstrained variable.
    pub fn add_var(&self, name: &str) -> Result<(OctValue, VarId)> {
        let mut vars = (*self.vars).clone();
        let x = vars.declare(name)?;
        let dbm = self.dbm.as_ref().map(|m| m.with_extra_vars(1));
        Ok((OctValue { vars: Arc::new(vars), mode: self.mode, dbm }, x))
    }

    /// Forgets `name` and drops its dimension, renumbering later variables.
    pub fn remove_var(&self, name: &str) -> Result<OctValue> {
        let x = self.vars.lookup(name)?;
        let mut vars = (*self.vars).clone();
        vars.remove(x);
        let n = vars.len();
        let dbm = self.dbm.as_ref().map(|m| {
            m.remap(n, |v| match v.0.cmp(&x.0) {
                std::cmp::Ordering::Less => Some(v),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(VarId(v.0 - 1)),
            })
        });
        Ok(OctValue { vars: Arc::new(vars), mode: self.mode, dbm })
    }

    /// The stored cells rendered as `(u, v, bound)` with signed names.
    pub fn cell_strings(&self) -> Vec<(String, String, String)> {
        let Some(m) = &self.dbm else { return Vec::new() };
        m.cells()
            .map(|(u, v, c)| (self.vars.svar_name(u), self.vars.svar_name(v), c.to_string()))
            .collect()
    }
}

/// `x = y + c` as `x - y <= c` and `y - x <= -c`.
fn assign_var(m: &SparseDbm, x: SVar, y: SVar, c: &Rational) -> Option<SparseDbm> {
    m.assume_weak(x, y, c).and_then(|m| m.assume_weak(y, x, &-c.clone()))
}

impl fmt::Display for OctValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(m) = &self.dbm else { return f.write_str("bottom") };
        let parts: Vec<String> = (0..self.n_vars())
            .map(VarId)
            .map(|x| format!("{} in {}", self.vars.name(x), m.bounds_of(x)))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

// -------------------------------------------------------------------
// Widening

/// When widening starts and when to give up on a loop.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct WidenConfig {
    /// Iterations that use plain join before widening kicks in.
    pub delay: usize,
    /// From this iteration on, variables still growing are forgotten.
    pub max_iterations: usize,
}

impl WidenConfig {
    pub fn new(delay: usize, max_iterations: usize) -> Result<Self> {
        if max_iterations <= delay {
            return Err(Error::InvalidConfig(format!(
                "max_iterations ({max_iterations}) must exceed delay ({delay})"
            )));
        }
        Ok(WidenConfig { delay, max_iterations })
    }
}

impl Default for WidenConfig {
    fn default() -> Self {
        WidenConfig { delay: 1, max_iterations: 100 }
    }
}

/// Loop-head accumulator. After a widening step the matrix is only coherent,
/// not weakly closed: it is compared against (as right operand) and re-closed
/// with [`close`](Self::close) before being fed to a transfer function.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Widened {
    value: OctValue,
    weakly_closed: bool,
}

impl From<OctValue> for Widened {
    fn from(value: OctValue) -> Self {
        Widened { value, weakly_closed: true }
    }
}

impl Widened {
    pub fn is_weakly_closed(&self) -> bool {
        self.weakly_closed
    }

    /// The raw accumulator; meaningful as a set of constraints only.
    pub fn raw(&self) -> &OctValue {
        &self.value
    }

    /// `next ⊑ self`.
    pub fn entails(&self, next: &OctValue) -> Result<bool> {
        next.leq(&self.value)
    }

    /// Weakly closed value with the same concretization.
    pub fn close(&self) -> Result<OctValue> {
        if self.weakly_closed {
            return Ok(self.value.clone());
        }
        let Some(m) = &self.value.dbm else { return Ok(self.value.clone()) };
        let dbm = SparseDbm::from_constraints(&m.constraints(), m.n_vars(), m.mode())?;
        Ok(self.value.with_dbm(dbm))
    }
}

/// One step of the loop-head iteration: join while `iter < delay`, then keep
/// only the cells of `prev` that `next` does not exceed. Cells only ever
/// disappear, so the sequence stabilizes after finitely many steps. From
/// `max_iterations` on, every variable with an unstable cell is dropped
/// entirely.
pub fn widen(prev: &Widened, next: &OctValue, cfg: &WidenConfig, iter: usize) -> Result<Widened> {
    prev.value.check_compatible(next)?;
    let Some(nm) = &next.dbm else { return Ok(prev.clone()) };
    let Some(pm) = &prev.value.dbm else { return Ok(next.clone().into()) };
    if iter < cfg.delay {
        return Ok(prev.close()?.join(next)?.into());
    }
    let stable = |u: SVar, v: SVar, c: &Rational| {
        let implied = nm.get(u, v).min(nm.half_sum(u, v));
        implied.finite().is_some_and(|b| b <= c)
    };
    let mut kept = pm.retain_cells(stable);
    if iter >= cfg.max_iterations {
        let unstable: BTreeSet<VarId> = pm
            .cells()
            .filter(|&(u, v, c)| !stable(u, v, c))
            .flat_map(|(u, v, _)| [u.var(), v.var()])
            .collect();
        kept = kept.retain_cells(|u, v, _| !unstable.contains(&u.var()) && !unstable.contains(&v.var()));
    }
    let weakly_closed = kept == *pm && prev.weakly_closed;
    Ok(Widened { value: prev.value.with_dbm(Some(kept)), weakly_closed })
}
