//! All-pairs shortest paths over the finite-cell graph (Johnson's method).
//!
//! Used to build the initial closed matrix when the dense cubic pass would be
//! wasteful. Only sources with outgoing edges are explored, and only reachable
//! targets get a cell, so the output has the sparsity of the reachability
//! relation.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::rational::Rational;
use crate::var::SVar;

/// Shortest path lengths between distinct vertices; `None` on a negative cycle.
///
/// `adj[u]` maps successors to edge weights and must not contain `u` itself.
pub(crate) fn all_pairs(adj: &[BTreeMap<SVar, Rational>]) -> Option<Vec<BTreeMap<SVar, Rational>>> {
    let dim = adj.len();
    let h = potentials(adj)?;

    let mut out = vec![BTreeMap::new(); dim];
    let mut dist: Vec<Option<Rational>> = vec![None; dim];
    let mut done = vec![false; dim];
    for s in 0..dim {
        if adj[s].is_empty() {
            continue;
        }
        let mut touched = Vec::new();
        let mut heap = BinaryHeap::new();
        dist[s] = Some(Rational::zero());
        touched.push(s);
        heap.push(Reverse((Rational::zero(), s)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for (v, w) in &adj[u] {
                // reduced weight w + h(u) - h(v) is non-negative
                let nd = &(&d + w) + &(&h[u] - &h[v.0]);
                let better = match &dist[v.0] {
                    None => true,
                    Some(old) => nd < *old,
                };
                if better {
                    if dist[v.0].is_none() {
                        touched.push(v.0);
                    }
                    dist[v.0] = Some(nd.clone());
                    heap.push(Reverse((nd, v.0)));
                }
            }
        }
        for &v in &touched {
            if v != s {
                let d = dist[v].as_ref().expect("touched");
                out[s].insert(SVar(v), &(d - &h[s]) + &h[v]);
            }
            dist[v] = None;
            done[v] = false;
        }
    }
    Some(out)
}

/// Bellman–Ford from a virtual source joined to every vertex by a zero edge.
fn potentials(adj: &[BTreeMap<SVar, Rational>]) -> Option<Vec<Rational>> {
    let dim = adj.len();
    let mut h = vec![Rational::zero(); dim];
    for _round in 0..=dim {
        let mut changed = false;
        for u in 0..dim {
            for (v, w) in &adj[u] {
                let cand = &h[u] + w;
                if cand < h[v.0] {
                    h[v.0] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(h);
        }
    }
    None
}
