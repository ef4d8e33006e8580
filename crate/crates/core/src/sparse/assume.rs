//! Incremental closure for a single octagonal constraint.

use std::collections::BTreeMap;

use super::{Mode, SparseDbm};
use crate::bound::Bound;
use crate::rational::Rational;
use crate::var::SVar;

impl SparseDbm {
    /// Adds the constraint `u - v <= c`; `None` when the result is empty.
    ///
    /// The new edge `u → v` and its mirror `v̄ → ū` are propagated through the
    /// finite cells of columns `u`, `v̄` and rows `v`, `ū` only, so the cost
    /// depends on how many variables are related to `u` and `v`. No
    /// strengthening is performed. In integer mode `c` is rounded down and
    /// odd unary cells produced by the update are tightened.
    pub fn assume_weak(&self, u: SVar, v: SVar, c: &Rational) -> Option<SparseDbm> {
        assert!(u.0 < self.dim() && v.0 < self.dim(), "signed variable out of range");
        let c = match self.mode {
            Mode::Rational => c.clone(),
            Mode::Integer => c.floor(),
        };
        if u == v {
            return (!c.is_negative()).then(|| self.clone());
        }

        // Emptiness: the new edge must not close a negative cycle, directly
        // or through the unary cells of v and ū.
        let vu = self.get(v, u);
        if vu.add_rational(&c).is_negative() {
            return None;
        }
        let vvbar = self.get(v, v.bar());
        let ubaru = self.get(u.bar(), u);
        if vvbar.add(&ubaru).add_rational(&c.double()).is_negative() {
            return None;
        }

        let (vbar, ubar) = (v.bar(), u.bar());
        // Best bound from each `a` to `v` and to `ū`, using the new edges
        // (`u → v`, `v̄ → ū`) once each, in either order.
        let mut heads: BTreeMap<SVar, (Bound, Bound)> = BTreeMap::new();
        let zero = Rational::zero();
        let col_u = std::iter::once((u, &zero)).chain(self.column(u));
        for (a, au) in col_u {
            let e = heads.entry(a).or_insert((Bound::Inf, Bound::Inf));
            let to_v = Bound::Finite(au + &c);
            let to_ubar = to_v.add(&vvbar).add_rational(&c);
            e.0 = e.0.clone().min(to_v);
            e.1 = e.1.clone().min(to_ubar);
        }
        let col_vbar = std::iter::once((vbar, &zero)).chain(self.column(vbar));
        for (a, avbar) in col_vbar {
            let e = heads.entry(a).or_insert((Bound::Inf, Bound::Inf));
            let to_ubar = Bound::Finite(avbar + &c);
            let to_v = to_ubar.add(&ubaru).add_rational(&c);
            e.0 = e.0.clone().min(to_v);
            e.1 = e.1.clone().min(to_ubar);
        }

        let row_v: Vec<(SVar, Rational)> = std::iter::once((v, zero.clone()))
            .chain(self.row(v).map(|(b, x)| (b, x.clone())))
            .collect();
        let row_ubar: Vec<(SVar, Rational)> = std::iter::once((ubar, zero.clone()))
            .chain(self.row(ubar).map(|(b, x)| (b, x.clone())))
            .collect();

        let mut updates: Vec<(SVar, SVar, Rational)> = Vec::new();
        for (a, (to_v, to_ubar)) in &heads {
            for (head, tail) in [(to_v, &row_v), (to_ubar, &row_ubar)] {
                let Bound::Finite(h) = head else { continue };
                for (b, hb) in tail {
                    let cand = h + hb;
                    if *a == *b {
                        debug_assert!(!cand.is_negative(), "negative cycle after emptiness test");
                        continue;
                    }
                    if self.cell(*a, *b).is_none_or(|old| cand < *old) {
                        updates.push((*a, *b, cand));
                    }
                }
            }
        }

        let mut out = self.clone();
        let mut touched_unary = Vec::new();
        for (a, b, cand) in updates {
            if out.meet_pair(a, b, &cand) && b == a.bar() {
                touched_unary.push(a);
            }
        }

        if self.mode == Mode::Integer {
            for &w in &touched_unary {
                let c = out.unary(w).expect("just set").clone();
                if !c.is_even_integer() {
                    out.put(w, w.bar(), c - Rational::one());
                }
            }
            for &w in &touched_unary {
                if let (Some(p), Some(q)) = (out.unary(w), out.unary(w.bar())) {
                    if (p + q).is_negative() {
                        return None;
                    }
                }
            }
        }
        out.debug_check();
        Some(out)
    }
}
