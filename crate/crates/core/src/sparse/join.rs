//! Join of weakly closed matrices.
//!
//! The pointwise maximum loses relations that the strengthenings of both
//! operands agree on (e.g. `2x <= 1, 2y <= 0` joined with `2x <= 0, 2y <= 1`
//! must still entail `x + y <= 1/2`). The join is computed in two passes:
//!
//! 1. a cellwise pass over cells finite in either operand, which picks the
//!    larger bound but caps it by the other operand's half-sum bound when that
//!    one is tighter;
//! 2. a pass over pairs `(u, v)` whose unary bounds move in opposite
//!    directions between the operands, where the join creates a new relation
//!    `max(A½_{uv}, B½_{uv})`. Only those pairs are visited, by crossing the
//!    list of signed variables whose unary cell is tighter in `A` with the list
//!    of those tighter in `B`.

use std::cmp::Ordering;
use std::collections::btree_map;
use std::collections::BTreeMap;
use std::iter::Peekable;
use std::sync::Arc;

use super::{Row, SparseDbm};
use crate::bound::Bound;
use crate::rational::Rational;
use crate::var::SVar;

/// First-pass value for one cell. `ah`/`bh` are the half-sum bounds.
fn join_cell(a: &Bound, b: &Bound, ah: &Bound, bh: &Bound) -> Bound {
    match a.cmp(b) {
        Ordering::Equal => a.clone(),
        Ordering::Less if b <= bh => b.clone(),
        Ordering::Less => a.max(bh).clone(),
        Ordering::Greater => join_cell(b, a, bh, ah),
    }
}

/// Merges two sorted maps key by key.
struct Union<'a> {
    a: Peekable<btree_map::Iter<'a, SVar, Rational>>,
    b: Peekable<btree_map::Iter<'a, SVar, Rational>>,
}

impl<'a> Union<'a> {
    fn new(a: &'a Row, b: &'a Row) -> Self {
        Union { a: a.iter().peekable(), b: b.iter().peekable() }
    }
}

impl<'a> Iterator for Union<'a> {
    type Item = (SVar, Option<&'a Rational>, Option<&'a Rational>);

    fn next(&mut self) -> Option<Self::Item> {
        let ord = match (self.a.peek(), self.b.peek()) {
            (None, None) => return None,
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (Some((ka, _)), Some((kb, _))) => ka.cmp(kb),
        };
        Some(match ord {
            Ordering::Less => {
                let (k, x) = self.a.next().expect("peeked");
                (*k, Some(x), None)
            }
            Ordering::Greater => {
                let (k, y) = self.b.next().expect("peeked");
                (*k, None, Some(y))
            }
            Ordering::Equal => {
                let (k, x) = self.a.next().expect("peeked");
                let (_, y) = self.b.next().expect("peeked");
                (*k, Some(x), Some(y))
            }
        })
    }
}

impl SparseDbm {
    /// Join of two weakly closed matrices. The strengthening of the result
    /// equals the pointwise maximum of the strengthenings of the operands.
    pub fn join_weak(&self, other: &SparseDbm) -> SparseDbm {
        self.assert_compatible(other);
        let (a, b) = (self, other);

        let mut rows: Vec<Arc<Row>> = Vec::with_capacity(a.dim());
        for (u, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
            if Arc::ptr_eq(ra, rb) || ra == rb {
                rows.push(Arc::clone(ra));
                continue;
            }
            let u = SVar(u);
            let mut row = Row::new();
            for (v, x, y) in Union::new(ra, rb) {
                let (x, y): (Bound, Bound) = (x.into(), y.into());
                let j = join_cell(&x, &y, &a.half_sum(u, v), &b.half_sum(u, v));
                if let Bound::Finite(c) = j {
                    row.insert(v, c);
                }
            }
            rows.push(Arc::new(row));
        }

        // Signed variables whose unary cell is finite in both operands and
        // strictly tighter in `a` (resp. in `b`).
        let mut tighter_in_a = Vec::new();
        let mut tighter_in_b = Vec::new();
        for (u, x, y) in Union::new(&a.unary, &b.unary) {
            if let (Some(x), Some(y)) = (x, y) {
                match x.cmp(y) {
                    Ordering::Less => tighter_in_a.push(u),
                    Ordering::Greater => tighter_in_b.push(u),
                    Ordering::Equal => {}
                }
            }
        }

        let mut overrides: BTreeMap<(SVar, SVar), Rational> = BTreeMap::new();
        for (firsts, seconds) in [(&tighter_in_a, &tighter_in_b), (&tighter_in_b, &tighter_in_a)] {
            for &u in firsts {
                for &w in seconds {
                    // cell (u, v) with v̄ = w
                    let v = w.bar();
                    if u == v {
                        continue;
                    }
                    let h = a.half_sum(u, v).max(b.half_sum(u, v));
                    if let Bound::Finite(h) = h {
                        overrides.insert((u, v), h);
                    }
                }
            }
        }

        let mut out = SparseDbm {
            n_vars: a.n_vars,
            mode: a.mode,
            rows,
            unary: Arc::clone(&a.unary),
        };
        for ((u, v), h) in overrides {
            if out.cell(u, v).is_none_or(|c| h < *c) {
                Arc::make_mut(&mut out.rows[u.0]).insert(v, h);
            }
        }
        // Unary cells are never overridden; rebuild the index from the rows.
        if a.unary != b.unary {
            let unary: Row = Union::new(&a.unary, &b.unary)
                .filter_map(|(u, _, _)| out.cell(u, u.bar()).map(|c| (u, c.clone())))
                .collect();
            out.unary = Arc::new(unary);
        }
        out.debug_check();
        out
    }
}
