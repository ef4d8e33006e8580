//! Sparse difference bound matrices kept weakly closed.
//!
//! A [`SparseDbm`] stores only finite off-diagonal cells, one ordered map per
//! row. Both coherent mirror cells `(u, v)` and `(v̄, ū)` are stored. The
//! matrix is never strengthened: interval bounds (the unary cells `(u, ū)`)
//! are kept apart from the relational cells they would imply, which is what
//! keeps unrelated variables from filling the matrix.
//!
//! Invariants:
//! - no diagonal cell and no `+∞` cell is stored;
//! - `(u, v)` is stored iff `(v̄, ū)` is, with the same bound;
//! - the strengthening of the implied matrix is strongly closed;
//! - in [`Mode::Integer`], every cell is integral and every unary cell even.

mod assume;
mod closure;
mod join;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::bound::Bound;
use crate::constraint::Constraint;
use crate::dense::DenseDbm;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::var::{SVar, VarId};

/// Numeric universe of the variables.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Hash)]
pub enum Mode {
    #[default]
    Rational,
    Integer,
}

/// `2n` above which [`SparseDbm::from_constraints`] switches from the dense
/// cubic closure to the sparse all-pairs method.
pub const DEFAULT_DENSE_CLOSURE_THRESHOLD: usize = 64;

type Row = BTreeMap<SVar, Rational>;

/// Interval of a single variable, `None` meaning unbounded on that side.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Interval {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lower {
            Some(l) => write!(f, "[{l}, ")?,
            None => f.write_str("[-inf, ")?,
        }
        match &self.upper {
            Some(u) => write!(f, "{u}]"),
            None => f.write_str("+inf]"),
        }
    }
}

/// Weakly closed sparse DBM. See the module docs for the invariants.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseDbm {
    n_vars: usize,
    mode: Mode,
    rows: Vec<Arc<Row>>,
    /// Finite unary cells `(u, ū)`, mirrored from `rows`.
    unary: Arc<Row>,
}

impl fmt::Debug for SparseDbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseDbm")
            .field("n_vars", &self.n_vars)
            .field("mode", &self.mode)
            .field("cells", &self.cells().collect::<Vec<_>>())
            .finish()
    }
}

impl SparseDbm {
    /// The unconstrained octagon.
    pub fn top(n_vars: usize, mode: Mode) -> Self {
        SparseDbm {
            n_vars,
            mode,
            rows: vec![Arc::new(Row::new()); 2 * n_vars],
            unary: Arc::new(Row::new()),
        }
    }

    /// Closes a constraint list into weakly closed form; `Ok(None)` when it is
    /// unsatisfiable (over the integers in [`Mode::Integer`]).
    pub fn from_constraints(cs: &[Constraint], n_vars: usize, mode: Mode) -> Result<Option<Self>> {
        Self::from_constraints_with(cs, n_vars, mode, DEFAULT_DENSE_CLOSURE_THRESHOLD)
    }

    /// As [`from_constraints`](Self::from_constraints), using the dense
    /// closure when `2 * n_vars <= dense_threshold`.
    pub fn from_constraints_with(
        cs: &[Constraint],
        n_vars: usize,
        mode: Mode,
        dense_threshold: usize,
    ) -> Result<Option<Self>> {
        for c in cs {
            let x = c.max_var();
            if x.0 >= n_vars {
                return Err(Error::VarOutOfRange { index: x.0, n_vars });
            }
            if mode == Mode::Integer && !c.is_integral() {
                return Err(Error::NonIntegral(c.bound.to_string()));
            }
        }
        let closed = if 2 * n_vars <= dense_threshold {
            let Some(d) = DenseDbm::from_constraints(n_vars, cs).make_coherent().close() else {
                return Ok(None);
            };
            Self::from_dense_cells(&d, mode)
        } else {
            let mut adj = vec![Row::new(); 2 * n_vars];
            for c in cs.iter().flat_map(|c| [c.clone(), c.mirror()]) {
                if c.lhs == c.rhs {
                    if c.bound.is_negative() {
                        return Ok(None);
                    }
                    continue;
                }
                let slot = adj[c.lhs.0].entry(c.rhs).or_insert_with(|| c.bound.clone());
                if c.bound < *slot {
                    *slot = c.bound.clone();
                }
            }
            let Some(rows) = closure::all_pairs(&adj) else { return Ok(None) };
            Self::from_rows(n_vars, mode, rows)
        };
        if closed.has_negative_unary_pair() {
            return Ok(None);
        }
        let out = match mode {
            Mode::Rational => Some(closed),
            Mode::Integer => closed.tighten_weak()?,
        };
        if let Some(m) = &out {
            m.debug_check();
        }
        Ok(out)
    }

    /// Imports a dense weakly closed matrix, dropping `+∞` and diagonal cells.
    pub fn from_dense(d: &DenseDbm, mode: Mode) -> Result<Self> {
        if !d.is_weakly_closed() || !d.is_coherent() {
            return Err(Error::NotWeaklyClosed);
        }
        if mode == Mode::Integer && !d.is_weakly_tightly_closed() {
            return Err(Error::NotWeaklyClosed);
        }
        Ok(Self::from_dense_cells(d, mode))
    }

    fn from_dense_cells(d: &DenseDbm, mode: Mode) -> Self {
        let mut rows = vec![Row::new(); d.dim()];
        for (u, v, b) in d.finite_cells() {
            rows[u.0].insert(v, b.finite().expect("finite").clone());
        }
        Self::from_rows(d.n_vars(), mode, rows)
    }

    fn from_rows(n_vars: usize, mode: Mode, rows: Vec<Row>) -> Self {
        let unary = rows
            .iter()
            .enumerate()
            .filter_map(|(u, row)| {
                let u = SVar(u);
                row.get(&u.bar()).map(|c| (u, c.clone()))
            })
            .collect();
        SparseDbm {
            n_vars,
            mode,
            rows: rows.into_iter().map(Arc::new).collect(),
            unary: Arc::new(unary),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn dim(&self) -> usize {
        2 * self.n_vars
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Off-diagonal cell, `None` for `+∞`.
    pub fn cell(&self, u: SVar, v: SVar) -> Option<&Rational> {
        self.rows[u.0].get(&v)
    }

    /// Implied matrix entry: `0` on the diagonal, `+∞` when absent.
    pub fn get(&self, u: SVar, v: SVar) -> Bound {
        if u == v {
            Bound::zero()
        } else {
            self.cell(u, v).into()
        }
    }

    /// The unary cell `(u, ū)`, i.e. a bound on `2u`.
    pub fn unary(&self, u: SVar) -> Option<&Rational> {
        self.unary.get(&u)
    }

    /// Signed variables with a finite unary cell, in code order.
    pub fn unary_index(&self) -> impl Iterator<Item = (SVar, &Rational)> {
        self.unary.iter().map(|(u, c)| (*u, c))
    }

    /// `(B_{uū} + B_{v̄v}) / 2`, the bound the strengthening would put at `(u, v)`.
    pub fn half_sum(&self, u: SVar, v: SVar) -> Bound {
        match (self.unary(u), self.unary(v.bar())) {
            (Some(a), Some(b)) => Bound::Finite((a + b).half()),
            _ => Bound::Inf,
        }
    }

    pub fn row(&self, u: SVar) -> impl Iterator<Item = (SVar, &Rational)> {
        self.rows[u.0].iter().map(|(v, c)| (*v, c))
    }

    /// Finite `(a, u)` cells, read through their stored mirrors `(ū, ā)`.
    pub fn column(&self, u: SVar) -> impl Iterator<Item = (SVar, &Rational)> {
        self.rows[u.bar().0].iter().map(|(k, c)| (k.bar(), c))
    }

    /// All stored cells in code order.
    pub fn cells(&self) -> impl Iterator<Item = (SVar, SVar, &Rational)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |(v, c)| (SVar(u), *v, c)))
    }

    /// Number of stored (finite, off-diagonal) cells.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// Sets `(u, v)` without touching its mirror.
    fn put(&mut self, u: SVar, v: SVar, c: Rational) {
        debug_assert_ne!(u, v);
        if v == u.bar() {
            Arc::make_mut(&mut self.unary).insert(u, c.clone());
        }
        Arc::make_mut(&mut self.rows[u.0]).insert(v, c);
    }

    /// `(u, v) := min((u, v), c)` together with the mirror cell. Returns
    /// whether the cell changed.
    fn meet_pair(&mut self, u: SVar, v: SVar, c: &Rational) -> bool {
        if self.cell(u, v).is_some_and(|old| old <= c) {
            return false;
        }
        self.put(u, v, c.clone());
        let (mu, mv) = (v.bar(), u.bar());
        if (mu, mv) != (u, v) {
            self.put(mu, mv, c.clone());
        }
        true
    }

    // ---------------------------------------------------------------
    // Operators

    /// Weakly closed comparison: `true` iff the concretization of `self` is
    /// included in that of `other`. Only `self` needs to be weakly closed.
    pub fn leq_weak(&self, other: &SparseDbm) -> bool {
        self.assert_compatible(other);
        other.cells().all(|(u, v, b)| {
            self.cell(u, v).is_some_and(|a| a <= b)
                || self.half_sum(u, v).finite().is_some_and(|h| h <= b)
        })
    }

    /// Removes every constraint on `x`.
    pub fn forget_weak(&self, x: VarId) -> SparseDbm {
        let mut out = self.clone();
        for s in [x.pos(), x.neg()] {
            if out.rows[s.0].is_empty() {
                continue;
            }
            let row = std::mem::take(Arc::make_mut(&mut out.rows[s.0]));
            for k in row.keys() {
                let (mu, mv) = (k.bar(), s.bar());
                if let Some(r) = out.rows.get_mut(mu.0) {
                    if r.contains_key(&mv) {
                        Arc::make_mut(r).remove(&mv);
                    }
                }
            }
        }
        if out.unary.contains_key(&x.pos()) || out.unary.contains_key(&x.neg()) {
            let u = Arc::make_mut(&mut out.unary);
            u.remove(&x.pos());
            u.remove(&x.neg());
        }
        out.debug_check();
        out
    }

    /// Integer tightening: odd unary cells are rounded down to even. `Ok(None)`
    /// when some variable is left without an integer value.
    pub fn tighten_weak(&self) -> Result<Option<SparseDbm>> {
        if let Some((_, _, c)) = self.cells().find(|(_, _, c)| !c.is_integer()) {
            return Err(Error::NonIntegral(c.to_string()));
        }
        let mut out = self.clone();
        let odd: Vec<SVar> = self
            .unary_index()
            .filter(|(_, c)| !c.is_even_integer())
            .map(|(u, _)| u)
            .collect();
        for u in odd {
            let c = self.unary(u).expect("indexed") - &Rational::one();
            out.put(u, u.bar(), c);
        }
        if out.has_negative_unary_pair() {
            return Ok(None);
        }
        out.debug_check();
        Ok(Some(out))
    }

    /// Some `u` with `B_{uū} + B_{ūu} < 0`.
    fn has_negative_unary_pair(&self) -> bool {
        self.unary_index().any(|(u, c)| {
            u.is_positive() && self.unary(u.bar()).is_some_and(|d| (c + d).is_negative())
        })
    }

    /// The matrix as stored, in dense form (diagonal `0`, absent cells `+∞`).
    pub fn to_dense(&self) -> DenseDbm {
        DenseDbm::from_cells(self.n_vars, self.cells())
    }

    /// The strengthened (strongly closed, or tightly closed in integer mode)
    /// dense matrix with the same concretization.
    pub fn strengthen_export(&self) -> DenseDbm {
        self.to_dense().strengthen()
    }

    /// Exact interval of `x`; weak closedness makes unary cells canonical.
    pub fn bounds_of(&self, x: VarId) -> Interval {
        Interval {
            upper: self.unary(x.pos()).map(Rational::half),
            lower: self.unary(x.neg()).map(|c| -c.half()),
        }
    }

    /// The stored cells as constraints, one per mirror pair.
    pub fn constraints(&self) -> Vec<Constraint> {
        self.cells()
            .filter(|&(u, v, _)| (u, v) <= (v.bar(), u.bar()))
            .map(|(u, v, c)| Constraint::new(u, v, c.clone()))
            .collect()
    }

    /// Keeps the cells for which `keep` holds on both the cell and its
    /// mirror. The result is coherent but in general not weakly closed, so it
    /// may only be used as the right operand of [`leq_weak`](Self::leq_weak)
    /// or re-closed through [`from_constraints`](Self::from_constraints).
    pub fn retain_cells(&self, keep: impl Fn(SVar, SVar, &Rational) -> bool) -> SparseDbm {
        let mut rows = vec![Row::new(); self.dim()];
        for (u, v, c) in self.cells() {
            if keep(u, v, c) && keep(v.bar(), u.bar(), c) {
                rows[u.0].insert(v, c.clone());
            }
        }
        Self::from_rows(self.n_vars, self.mode, rows)
    }

    // ---------------------------------------------------------------
    // Dimension management

    /// Appends `k` unconstrained variables.
    pub fn with_extra_vars(&self, k: usize) -> SparseDbm {
        let mut out = self.clone();
        out.n_vars += k;
        out.rows.extend(std::iter::repeat_with(|| Arc::new(Row::new())).take(2 * k));
        out
    }

    /// Renames variables through `map` into a matrix over `new_n` variables.
    /// Cells touching a variable mapped to `None` are dropped, which is the
    /// same as forgetting it first.
    pub fn remap(&self, new_n: usize, map: impl Fn(VarId) -> Option<VarId>) -> SparseDbm {
        let sv = |u: SVar| map(u.var()).map(|x| SVar::signed(x, u.is_positive()));
        let mut rows = vec![Row::new(); 2 * new_n];
        let mut identity = true;
        for (u, row) in self.rows.iter().enumerate() {
            let Some(nu) = sv(SVar(u)) else {
                identity &= row.is_empty();
                continue;
            };
            identity &= nu.0 == u;
            for (v, c) in row.iter() {
                if let Some(nv) = sv(*v) {
                    rows[nu.0].insert(nv, c.clone());
                }
            }
        }
        if identity && new_n == self.n_vars {
            return self.clone();
        }
        let out = Self::from_rows(new_n, self.mode, rows);
        out.debug_check();
        out
    }

    // ---------------------------------------------------------------
    // Invariant checks

    /// Structural invariants (everything but weak closedness itself).
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.rows.len() != self.dim() {
            return Err(format!("{} rows for {} variables", self.rows.len(), self.n_vars));
        }
        for (u, v, c) in self.cells() {
            if u == v {
                return Err(format!("diagonal cell {u:?} stored"));
            }
            if v.0 >= self.dim() {
                return Err(format!("column {v:?} out of range"));
            }
            if self.cell(v.bar(), u.bar()) != Some(c) {
                return Err(format!("cell ({u:?},{v:?}) has no equal mirror"));
            }
            if self.mode == Mode::Integer && !c.is_integer() {
                return Err(format!("non-integral cell ({u:?},{v:?}) = {c}"));
            }
        }
        let derived: Row = (0..self.dim())
            .filter_map(|u| {
                let u = SVar(u);
                self.cell(u, u.bar()).map(|c| (u, c.clone()))
            })
            .collect();
        if derived != *self.unary {
            return Err("unary index out of sync".into());
        }
        if self.mode == Mode::Integer && self.unary.values().any(|c| !c.is_even_integer()) {
            return Err("odd unary cell in integer mode".into());
        }
        Ok(())
    }

    /// Weak closedness of the implied matrix, decided by the dense oracle.
    pub fn is_weakly_closed(&self) -> bool {
        let d = self.to_dense();
        match self.mode {
            Mode::Rational => d.is_weakly_closed(),
            Mode::Integer => d.is_weakly_tightly_closed(),
        }
    }

    fn debug_check(&self) {
        if cfg!(debug_assertions) {
            if let Err(e) = self.check_invariants() {
                panic!("sparse DBM invariant broken: {e}");
            }
            if self.dim() <= 12 {
                assert!(self.is_weakly_closed(), "result is not weakly closed: {self:?}");
            }
        }
    }

    fn assert_compatible(&self, other: &SparseDbm) {
        assert_eq!(self.n_vars, other.n_vars, "DBM dimensions differ");
        assert_eq!(self.mode, other.mode, "DBM modes differ");
    }
}

#[cfg(test)]
mod tests;
