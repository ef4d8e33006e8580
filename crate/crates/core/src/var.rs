//! Program variables, signed variables and environments.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Index of a program variable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub usize);

impl VarId {
    pub fn pos(self) -> SVar {
        SVar::pos(self)
    }

    pub fn neg(self) -> SVar {
        SVar::neg(self)
    }
}

/// A signed variable: `+x` has code `2x`, `-x` has code `2x + 1`.
///
/// Codes index the rows and columns of a DBM.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SVar(pub usize);

impl SVar {
    pub fn pos(x: VarId) -> SVar {
        SVar(2 * x.0)
    }

    pub fn neg(x: VarId) -> SVar {
        SVar(2 * x.0 + 1)
    }

    /// `+x` when `positive`, `-x` otherwise.
    pub fn signed(x: VarId, positive: bool) -> SVar {
        if positive {
            SVar::pos(x)
        } else {
            SVar::neg(x)
        }
    }

    pub fn code(self) -> usize {
        self.0
    }

    /// The opposite signed variable.
    #[inline]
    pub fn bar(self) -> SVar {
        SVar(self.0 ^ 1)
    }

    pub fn var(self) -> VarId {
        VarId(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }
}

impl fmt::Debug for SVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.is_positive() { '+' } else { '-' };
        write!(f, "{sign}v{}", self.var().0)
    }
}

pub fn bar(u: SVar) -> SVar {
    u.bar()
}

/// Ordered, duplicate-free list of variable names.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct VarTable {
    names: Vec<String>,
    index: HashMap<String, VarId>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut t = VarTable::new();
        for n in names {
            t.declare(n)?;
        }
        Ok(t)
    }

    pub fn declare(&mut self, name: impl Into<String>) -> Result<VarId> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::DuplicateVariable(name));
        }
        let id = VarId(self.names.len());
        self.index.insert(name.clone(), id);
        self.names.push(name);
        Ok(id)
    }

    /// Looks `name` up, declaring it if absent.
    pub fn intern(&mut self, name: &str) -> VarId {
        match self.index.get(name) {
            Some(&id) => id,
            None => self.declare(name).expect("fresh name"),
        }
    }

    pub fn get(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<VarId> {
        self.get(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn name(&self, x: VarId) -> &str {
        &self.names[x.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn remove(&mut self, x: VarId) {
        self.names.remove(x.0);
        self.index = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), VarId(i)))
            .collect();
    }

    /// `+x` / `-x` rendering of a signed variable.
    pub fn svar_name(&self, u: SVar) -> String {
        let sign = if u.is_positive() { '+' } else { '-' };
        format!("{sign}{}", self.name(u.var()))
    }
}

/// A regular environment: one rational value per program variable.
///
/// Values of negative variables are derived (`ρ(-x) = -ρ(x)`), never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Env {
    values: Vec<Rational>,
}

impl Env {
    pub fn new(values: Vec<Rational>) -> Self {
        Env { values }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Env::new(values.iter().map(|&v| Rational::from_integer(v)).collect())
    }

    pub fn n_vars(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, x: VarId) -> Option<&Rational> {
        self.values.get(x.0)
    }

    pub fn set(&mut self, x: VarId, v: Rational) {
        self.values[x.0] = v;
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Value of a signed variable.
    pub fn eval_signed(&self, u: SVar) -> Result<Rational> {
        let v = self.get(u.var()).ok_or(Error::VarOutOfRange {
            index: u.var().0,
            n_vars: self.values.len(),
        })?;
        Ok(if u.is_positive() { v.clone() } else { -v.clone() })
    }
}

pub fn eval_signed(rho: &Env, u: SVar) -> Result<Rational> {
    rho.eval_signed(u)
}
