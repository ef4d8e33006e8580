//! Dense difference bound matrices and the classic octagon operators.
//!
//! Everything here works on full `2n × 2n` matrices and keeps nothing
//! sparse. It is the reference the sparse representation is checked against:
//! closure is plain Floyd–Warshall, strong closure is coherence + closure +
//! strengthening, and the predicates are direct transcriptions of the
//! definitions of closed, coherent, strongly, weakly and tightly closed DBMs.

use crate::bound::Bound;
use crate::constraint::Constraint;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::var::{Env, SVar, VarId};

/// A full `2n × 2n` matrix of bounds; cell `(u, v)` bounds `u - v`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DenseDbm {
    n_vars: usize,
    cells: Vec<Bound>,
}

impl DenseDbm {
    /// Every cell, diagonal included, is `+∞`.
    pub fn unconstrained(n_vars: usize) -> Self {
        let d = 2 * n_vars;
        DenseDbm { n_vars, cells: vec![Bound::Inf; d * d] }
    }

    /// The top octagon: null diagonal, `+∞` elsewhere.
    pub fn top(n_vars: usize) -> Self {
        let mut m = Self::unconstrained(n_vars);
        for u in 0..m.dim() {
            m.set(SVar(u), SVar(u), Bound::zero());
        }
        m
    }

    /// Raw matrix of a constraint list (no coherence, no diagonal).
    pub fn from_constraints(n_vars: usize, cs: &[Constraint]) -> Self {
        let mut m = Self::unconstrained(n_vars);
        for c in cs {
            m.meet_cell(c.lhs, c.rhs, &Bound::Finite(c.bound.clone()));
        }
        m
    }

    /// Builds from explicit finite cells; unspecified cells are `+∞`,
    /// the diagonal is `0` unless given.
    pub fn from_cells<'a, I>(n_vars: usize, cells: I) -> Self
    where
        I: IntoIterator<Item = (SVar, SVar, &'a Rational)>,
    {
        let mut m = Self::top(n_vars);
        for (u, v, c) in cells {
            m.set(u, v, Bound::Finite(c.clone()));
        }
        m
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn dim(&self) -> usize {
        2 * self.n_vars
    }

    #[inline]
    fn idx(&self, u: SVar, v: SVar) -> usize {
        u.0 * self.dim() + v.0
    }

    #[inline]
    pub fn get(&self, u: SVar, v: SVar) -> &Bound {
        &self.cells[self.idx(u, v)]
    }

    pub fn set(&mut self, u: SVar, v: SVar, b: Bound) {
        let i = self.idx(u, v);
        self.cells[i] = b;
    }

    /// `cell := min(cell, b)`.
    pub fn meet_cell(&mut self, u: SVar, v: SVar, b: &Bound) {
        let i = self.idx(u, v);
        if *b < self.cells[i] {
            self.cells[i] = b.clone();
        }
    }

    pub fn svars(&self) -> impl Iterator<Item = SVar> {
        (0..self.dim()).map(SVar)
    }

    /// Finite off-diagonal cells in row-major code order.
    pub fn finite_cells(&self) -> impl Iterator<Item = (SVar, SVar, &Bound)> + '_ {
        let d = self.dim();
        self.cells.iter().enumerate().filter_map(move |(i, b)| {
            let (u, v) = (i / d, i % d);
            (u != v && b.is_finite()).then_some((SVar(u), SVar(v), b))
        })
    }

    /// Number of finite off-diagonal cells.
    pub fn nnz(&self) -> usize {
        self.finite_cells().count()
    }

    fn assert_same_dim(&self, other: &DenseDbm) {
        assert_eq!(self.n_vars, other.n_vars, "DBM dimensions differ");
    }

    /// `(B_{u ū} + B_{v̄ v}) / 2`.
    pub fn half_sum(&self, u: SVar, v: SVar) -> Bound {
        self.get(u, u.bar()).add(self.get(v.bar(), v)).half()
    }

    // ---------------------------------------------------------------
    // Concretization and abstraction

    /// Membership of a regular environment in the octagonal concretization.
    pub fn member(&self, rho: &Env) -> bool {
        assert_eq!(rho.n_vars(), self.n_vars, "environment arity");
        let vals: Vec<Rational> = self
            .svars()
            .map(|u| rho.eval_signed(u).expect("arity checked"))
            .collect();
        for u in self.svars() {
            for v in self.svars() {
                if let Bound::Finite(c) = self.get(u, v) {
                    if &vals[u.0] - &vals[v.0] > *c {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The least DBM containing every point of `s`, or `None` when `s` is empty.
    pub fn alpha_points(s: &PointSet) -> Option<DenseDbm> {
        let first = s.points.first()?;
        let n = first.n_vars();
        let mut m = Self::unconstrained(n);
        for rho in &s.points {
            let vals: Vec<Rational> =
                (0..2 * n).map(|u| rho.eval_signed(SVar(u)).expect("arity")).collect();
            for u in 0..2 * n {
                for v in 0..2 * n {
                    let d = Bound::Finite(&vals[u] - &vals[v]);
                    let i = u * 2 * n + v;
                    if m.cells[i].is_inf() || d > m.cells[i] {
                        m.cells[i] = d;
                    }
                }
            }
        }
        Some(m)
    }

    // ---------------------------------------------------------------
    // Closures

    /// Shortest-path closure, or `None` when the potential constraints are
    /// unsatisfiable (a negative cycle).
    pub fn close(&self) -> Option<DenseDbm> {
        let d = self.dim();
        let mut m = self.clone();
        for u in 0..d {
            let i = u * d + u;
            if m.cells[i].is_negative() {
                return None;
            }
            m.cells[i] = Bound::zero();
        }
        for k in 0..d {
            let row_k: Vec<Bound> = m.cells[k * d..(k + 1) * d].to_vec();
            for i in 0..d {
                let Bound::Finite(ik) = m.cells[i * d + k].clone() else { continue };
                for (j, kj) in row_k.iter().enumerate() {
                    if let Bound::Finite(kj) = kj {
                        let cand = &ik + kj;
                        let cell = &mut m.cells[i * d + j];
                        let better = match cell {
                            Bound::Inf => true,
                            Bound::Finite(c) => cand < *c,
                        };
                        if better {
                            *cell = Bound::Finite(cand);
                        }
                    }
                }
            }
            if (0..d).any(|u| m.cells[u * d + u].is_negative()) {
                return None;
            }
        }
        Some(m)
    }

    /// `B_{uv} := min(B_{uv}, B_{v̄ū})`.
    pub fn make_coherent(&self) -> DenseDbm {
        let mut m = self.clone();
        for u in self.svars() {
            for v in self.svars() {
                let mirror = self.get(v.bar(), u.bar());
                m.meet_cell(u, v, mirror);
            }
        }
        m
    }

    /// `B_{uv} := min(B_{uv}, (B_{uū} + B_{v̄v}) / 2)`.
    pub fn strengthen(&self) -> DenseDbm {
        let mut m = self.clone();
        for u in self.svars() {
            for v in self.svars() {
                let h = self.half_sum(u, v);
                m.meet_cell(u, v, &h);
            }
        }
        m
    }

    fn octagonally_empty(&self) -> bool {
        self.svars()
            .any(|u| self.get(u, u.bar()).add(self.get(u.bar(), u)).is_negative())
    }

    /// Coherence, closure and strengthening; `None` when the octagon is empty.
    pub fn strong_close(&self) -> Option<DenseDbm> {
        let closed = self.make_coherent().close()?;
        if closed.octagonally_empty() {
            return None;
        }
        Some(closed.strengthen())
    }

    // ---------------------------------------------------------------
    // Predicates

    pub fn has_null_diagonal(&self) -> bool {
        self.svars().all(|u| *self.get(u, u) == Bound::zero())
    }

    pub fn is_closed(&self) -> bool {
        if !self.has_null_diagonal() {
            return false;
        }
        for u in self.svars() {
            for v in self.svars() {
                let uv = self.get(u, v);
                if uv.is_inf() {
                    continue;
                }
                for w in self.svars() {
                    if *self.get(u, w) > uv.add(self.get(v, w)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn is_coherent(&self) -> bool {
        self.svars()
            .all(|u| self.svars().all(|v| self.get(u, v) == self.get(v.bar(), u.bar())))
    }

    fn is_strengthened(&self) -> bool {
        self.svars()
            .all(|u| self.svars().all(|v| *self.get(u, v) <= self.half_sum(u, v)))
    }

    pub fn is_strongly_closed(&self) -> bool {
        self.is_closed() && self.is_coherent() && self.is_strengthened()
    }

    /// Null diagonal and the strengthening is strongly closed.
    pub fn is_weakly_closed(&self) -> bool {
        self.has_null_diagonal() && self.strengthen().is_strongly_closed()
    }

    /// The second characterization: null diagonal, coherent strengthening,
    /// and `S(B)_{uw} <= B_{uv} + B_{vw}` for all `u, v, w`.
    pub fn is_weakly_closed_alt(&self) -> bool {
        if !self.has_null_diagonal() {
            return false;
        }
        let s = self.strengthen();
        if !s.is_coherent() {
            return false;
        }
        for u in self.svars() {
            for v in self.svars() {
                let uv = self.get(u, v);
                if uv.is_inf() {
                    continue;
                }
                for w in self.svars() {
                    if *s.get(u, w) > uv.add(self.get(v, w)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn weak_closedness_forms_agree(&self) -> bool {
        self.is_weakly_closed() == self.is_weakly_closed_alt()
    }

    pub fn is_integral(&self) -> bool {
        self.cells.iter().all(|b| b.finite().is_none_or(Rational::is_integer))
    }

    fn unary_cells_even(&self) -> bool {
        self.svars()
            .all(|u| self.get(u, u.bar()).finite().is_none_or(Rational::is_even_integer))
    }

    pub fn is_tightly_closed(&self) -> bool {
        self.is_strongly_closed() && self.is_integral() && self.unary_cells_even()
    }

    pub fn is_weakly_tightly_closed(&self) -> bool {
        self.is_weakly_closed() && self.is_integral() && self.unary_cells_even()
    }

    // ---------------------------------------------------------------
    // Lattice operations

    /// Pointwise order.
    pub fn leq(&self, other: &DenseDbm) -> bool {
        self.assert_same_dim(other);
        self.cells.iter().zip(&other.cells).all(|(a, b)| a <= b)
    }

    /// Pointwise maximum.
    pub fn join(&self, other: &DenseDbm) -> DenseDbm {
        self.assert_same_dim(other);
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| if a >= b { a.clone() } else { b.clone() })
            .collect();
        DenseDbm { n_vars: self.n_vars, cells }
    }

    // ---------------------------------------------------------------
    // Transfer functions

    /// Drops every constraint on the signed variable `x`.
    pub fn forget_pot(&self, x: SVar) -> DenseDbm {
        let mut m = self.clone();
        for u in self.svars() {
            m.set(x, u, Bound::Inf);
            m.set(u, x, Bound::Inf);
        }
        m.set(x, x, Bound::zero());
        m
    }

    /// Drops every constraint on the program variable `x`.
    pub fn forget_oct(&self, x: VarId) -> DenseDbm {
        self.forget_pot(x.neg()).forget_pot(x.pos())
    }

    /// `B_{uv} := min(B_{uv}, B_{ux} + c + B_{yv})`.
    pub fn assume_pot(&self, x: SVar, y: SVar, c: &Rational) -> DenseDbm {
        let mut m = self.clone();
        for u in self.svars() {
            let ux = self.get(u, x);
            if ux.is_inf() {
                continue;
            }
            let uxc = ux.add_rational(c);
            for v in self.svars() {
                let cand = uxc.add(self.get(y, v));
                m.meet_cell(u, v, &cand);
            }
        }
        m
    }

    /// Assumes `x - y <= c` on a strongly closed matrix; `None` when the
    /// result is empty.
    pub fn assume_oct(&self, x: SVar, y: SVar, c: &Rational) -> Option<DenseDbm> {
        if self.get(y, x).add_rational(c).is_negative() {
            return None;
        }
        let m = self
            .assume_pot(x, y, c)
            .assume_pot(y.bar(), x.bar(), c)
            .strengthen();
        if m.svars().any(|u| m.get(u, u).is_negative()) {
            return None;
        }
        Some(m)
    }

    // ---------------------------------------------------------------
    // Integer mode

    fn check_integral(&self) -> Result<()> {
        match self.cells.iter().find_map(|b| b.finite().filter(|r| !r.is_integer())) {
            Some(r) => Err(Error::NonIntegral(r.to_string())),
            None => Ok(()),
        }
    }

    /// Rounds odd unary cells `(u, ū)` down to the next even integer.
    pub fn tighten(&self) -> Result<DenseDbm> {
        self.check_integral()?;
        let mut m = self.clone();
        for u in self.svars() {
            if let Bound::Finite(c) = self.get(u, u.bar()) {
                if !c.is_even_integer() {
                    m.set(u, u.bar(), Bound::Finite(c - &Rational::one()));
                }
            }
        }
        Ok(m)
    }

    /// Closure, tightening and strengthening; `Ok(None)` when no integer
    /// point satisfies the constraints.
    pub fn tight_close(&self) -> Result<Option<DenseDbm>> {
        self.check_integral()?;
        let Some(closed) = self.make_coherent().close() else { return Ok(None) };
        let t = closed.tighten()?;
        if t.octagonally_empty() {
            return Ok(None);
        }
        Ok(Some(t.strengthen()))
    }
}

/// A finite set of regular environments over the same variables.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PointSet {
    pub points: Vec<Env>,
}

impl PointSet {
    pub fn new(points: Vec<Env>) -> Self {
        if let Some(first) = points.first() {
            assert!(points.iter().all(|p| p.n_vars() == first.n_vars()), "mixed arities");
        }
        PointSet { points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps the points satisfying `u - v <= c`.
    pub fn concrete_assume(&self, u: SVar, v: SVar, c: &Rational) -> PointSet {
        let points = self
            .points
            .iter()
            .filter(|rho| {
                let d = rho.eval_signed(u).expect("arity") - rho.eval_signed(v).expect("arity");
                d <= *c
            })
            .cloned()
            .collect();
        PointSet { points }
    }

    /// Replaces `x` by each sample value in turn.
    pub fn concrete_forget(&self, x: VarId, samples: &[Rational]) -> PointSet {
        let mut points = Vec::with_capacity(self.points.len() * samples.len());
        for rho in &self.points {
            for r in samples {
                let mut p = rho.clone();
                p.set(x, r.clone());
                points.push(p);
            }
        }
        PointSet { points }
    }
}
