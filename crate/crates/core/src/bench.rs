//! Micro-benchmark of packed workloads on the sparse and dense matrices.
//!
//! A workload has `k` packs of `p` variables. Variables of different packs
//! are never related, which is the situation where strengthening destroys
//! sparsity: every bounded variable becomes related to every other one.

use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constraint::Constraint;
use crate::dense::DenseDbm;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sparse::{Mode, SparseDbm};
use crate::var::{SVar, VarId};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Impl {
    /// Weakly closed sparse matrices.
    Sparse,
    /// Strongly closed dense matrices.
    Dense,
}

impl Impl {
    pub fn tag(self) -> &'static str {
        match self {
            Impl::Sparse => "sparse-weak",
            Impl::Dense => "dense-strong",
        }
    }
}

impl fmt::Display for Impl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Impl {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" | "sparse-weak" => Ok(Impl::Sparse),
            "dense" | "dense-strong" => Ok(Impl::Dense),
            _ => Err(Error::InvalidConfig(format!("unknown implementation `{s}`"))),
        }
    }
}

/// Constraints of one pack, over global variable ids.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Pack {
    pub vars: Vec<VarId>,
    /// Interval bounds on every variable, then relational constraints.
    pub constraints: Vec<Constraint>,
    /// Same relations with some upper bounds loosened.
    pub perturbed: Vec<Constraint>,
    /// Variable forgotten by the `forget` step.
    pub forget: VarId,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Workload {
    pub k: usize,
    pub p: usize,
    pub seed: u64,
    pub packs: Vec<Pack>,
}

impl Workload {
    pub fn n_vars(&self) -> usize {
        self.k * self.p
    }

    fn constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.packs.iter().flat_map(|p| &p.constraints)
    }

    fn perturbed(&self) -> impl Iterator<Item = &Constraint> {
        self.packs.iter().flat_map(|p| &p.perturbed)
    }
}

/// Builds `k` packs of `p` variables. Every variable gets an interval; up to
/// `p` relations per pack are drawn so that a random point of the box
/// satisfies them.
pub fn gen_workload(k: usize, p: usize, seed: u64) -> Result<Workload> {
    if k == 0 || p == 0 {
        return Err(Error::InvalidConfig("packs and pack size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let int = Rational::from_integer;
    let mut packs = Vec::with_capacity(k);
    for pack in 0..k {
        let vars: Vec<VarId> = (0..p).map(|i| VarId(pack * p + i)).collect();
        let mut constraints = Vec::new();
        let mut perturbed = Vec::new();
        let mut point = Vec::with_capacity(p);
        for &x in &vars {
            let lo: i64 = rng.gen_range(-10..=0);
            let hi: i64 = rng.gen_range(1..=10);
            point.push(rng.gen_range(lo..=hi));
            let loose = if rng.gen_bool(0.5) { hi + rng.gen_range(1..=5) } else { hi };
            constraints.push(Constraint::unary(x, true, int(hi)));
            constraints.push(Constraint::unary(x, false, int(-lo)));
            perturbed.push(Constraint::unary(x, true, int(loose)));
            perturbed.push(Constraint::unary(x, false, int(-lo)));
        }
        if p >= 2 {
            for _ in 0..rng.gen_range(0..=p) {
                let a = rng.gen_range(0..p);
                let b = (a + rng.gen_range(1..p)) % p;
                let (sa, sb) = (rng.gen_bool(0.5), rng.gen_bool(0.5));
                let sign = |s: bool, v: i64| if s { v } else { -v };
                let slack: i64 = rng.gen_range(0..=3);
                let c = sign(sa, point[a]) + sign(sb, point[b]) + slack;
                let rel = Constraint::from_sum(vars[a], sa, vars[b], sb, int(c));
                constraints.push(rel.clone());
                perturbed.push(rel);
            }
        }
        let forget = vars[rng.gen_range(0..p)];
        packs.push(Pack { vars, constraints, perturbed, forget });
    }
    Ok(Workload { k, p, seed, packs })
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct Measurement {
    #[serde(rename = "impl")]
    pub implementation: String,
    pub op: String,
    pub k: usize,
    pub p: usize,
    /// Median wall time of one operation.
    pub micros: f64,
    pub nnz_before: usize,
    pub nnz_after: usize,
}

/// Timing parameters.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RunOptions {
    pub warmup: usize,
    /// Batches whose median is reported.
    pub batches: usize,
    /// Repetitions per batch are raised until a batch lasts this long.
    pub min_batch: Duration,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { warmup: 3, batches: 5, min_batch: Duration::from_millis(1) }
    }
}

impl RunOptions {
    /// One short batch; for tests that only look at the results.
    pub fn quick() -> Self {
        RunOptions { warmup: 0, batches: 1, min_batch: Duration::ZERO }
    }
}

/// Median microseconds per call of `f`.
pub fn time_op<T>(opts: &RunOptions, mut f: impl FnMut() -> T) -> f64 {
    for _ in 0..opts.warmup {
        black_box(f());
    }
    let mut reps = 1usize;
    loop {
        let t = Instant::now();
        for _ in 0..reps {
            black_box(f());
        }
        if t.elapsed() >= opts.min_batch || reps >= 1 << 24 {
            break;
        }
        reps *= 2;
    }
    let mut samples: Vec<f64> = (0..opts.batches.max(1))
        .map(|_| {
            let t = Instant::now();
            for _ in 0..reps {
                black_box(f());
            }
            t.elapsed().as_secs_f64() * 1e6 / reps as f64
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    samples[samples.len() / 2]
}

fn sparse_build<'a>(n: usize, cs: impl Iterator<Item = &'a Constraint>) -> Option<SparseDbm> {
    let mut m = SparseDbm::top(n, Mode::Rational);
    for c in cs {
        m = m.assume_weak(c.lhs, c.rhs, &c.bound)?;
    }
    Some(m)
}

fn dense_build<'a>(n: usize, cs: impl Iterator<Item = &'a Constraint>) -> Option<DenseDbm> {
    let mut m = DenseDbm::top(n);
    for c in cs {
        m = m.assume_oct(c.lhs, c.rhs, &c.bound)?;
    }
    Some(m)
}

fn forget_all<T>(m: &T, w: &Workload, f: impl Fn(&T, VarId) -> T) -> T
where
    T: Clone,
{
    w.packs.iter().fold(m.clone(), |m, p| f(&m, p.forget))
}

/// Final states of one replay, for the differential check.
struct Finals {
    joined: DenseDbm,
    forgotten: DenseDbm,
    leq: bool,
}

/// Runs `assume`, `join`, `compare` and `forget` on each requested
/// implementation. The sparse and dense final states are compared exactly
/// whatever `impls` is; a mismatch is an [`Error::Differential`].
pub fn run(w: &Workload, impls: &[Impl], opts: &RunOptions) -> Result<Vec<Measurement>> {
    let n = w.n_vars();
    let mut out = Vec::new();
    let mut record = |imp: Impl, op: &str, micros: f64, before: usize, after: usize| {
        out.push(Measurement {
            implementation: imp.tag().to_string(),
            op: op.to_string(),
            k: w.k,
            p: w.p,
            micros,
            nnz_before: before,
            nnz_after: after,
        })
    };
    let unsat = || Error::Differential("workload constraints are unsatisfiable".into());

    let mut sparse_finals = None;
    let mut dense_finals = None;
    for imp in [Impl::Sparse, Impl::Dense] {
        let timed = impls.contains(&imp);
        match imp {
            Impl::Sparse => {
                let a = sparse_build(n, w.constraints()).ok_or_else(unsat)?;
                let b = sparse_build(n, w.perturbed()).ok_or_else(unsat)?;
                let j = a.join_weak(&b);
                let leq = a.leq_weak(&b);
                let f = forget_all(&j, w, SparseDbm::forget_weak);
                if timed {
                    let t = time_op(opts, || sparse_build(n, w.constraints()));
                    record(imp, "assume", t, 0, a.nnz());
                    let t = time_op(opts, || a.join_weak(&b));
                    record(imp, "join", t, a.nnz(), j.nnz());
                    let t = time_op(opts, || a.leq_weak(&b));
                    record(imp, "compare", t, a.nnz(), a.nnz());
                    let t = time_op(opts, || forget_all(&j, w, SparseDbm::forget_weak));
                    record(imp, "forget", t, j.nnz(), f.nnz());
                }
                sparse_finals = Some(Finals {
                    joined: j.strengthen_export(),
                    forgotten: f.strengthen_export(),
                    leq,
                });
            }
            Impl::Dense => {
                let a = dense_build(n, w.constraints()).ok_or_else(unsat)?;
                let b = dense_build(n, w.perturbed()).ok_or_else(unsat)?;
                let j = a.join(&b);
                let leq = a.leq(&b);
                let f = forget_all(&j, w, DenseDbm::forget_oct);
                if timed {
                    let t = time_op(opts, || dense_build(n, w.constraints()));
                    record(imp, "assume", t, 0, a.nnz());
                    let t = time_op(opts, || a.join(&b));
                    record(imp, "join", t, a.nnz(), j.nnz());
                    let t = time_op(opts, || a.leq(&b));
                    record(imp, "compare", t, a.nnz(), a.nnz());
                    let t = time_op(opts, || forget_all(&j, w, DenseDbm::forget_oct));
                    record(imp, "forget", t, j.nnz(), f.nnz());
                }
                dense_finals = Some(Finals { joined: j, forgotten: f, leq });
            }
        }
    }
    let (s, d) = (sparse_finals.expect("ran"), dense_finals.expect("ran"));
    if s.joined != d.joined {
        return Err(Error::Differential(format!("join differs (k={}, p={}, seed={})", w.k, w.p, w.seed)));
    }
    if s.forgotten != d.forgotten {
        return Err(Error::Differential(format!("forget differs (k={}, p={}, seed={})", w.k, w.p, w.seed)));
    }
    if s.leq != d.leq {
        return Err(Error::Differential(format!("comparison differs (k={}, p={}, seed={})", w.k, w.p, w.seed)));
    }
    Ok(out)
}

pub fn write_csv<W: Write>(ms: &[Measurement], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for m in ms {
        wr.serialize(m)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn emit_csv(ms: &[Measurement], path: &Path) -> Result<()> {
    write_csv(ms, std::fs::File::create(path)?)
}

/// `n` variables with interval bounds and no relations: the sparse weakly
/// closed matrix and the dense strongly closed one.
pub fn bounded_unrelated(n: usize) -> (SparseDbm, DenseDbm) {
    let cs: Vec<Constraint> = (0..n)
        .flat_map(|i| {
            let x = VarId(i);
            [
                Constraint::unary(x, true, Rational::from_integer(1 + i as i64 % 7)),
                Constraint::unary(x, false, Rational::from_integer(i as i64 % 5)),
            ]
        })
        .collect();
    let s = sparse_build(n, cs.iter()).expect("satisfiable");
    let d = dense_build(n, cs.iter()).expect("satisfiable");
    (s, d)
}

/// Ratio of total join time between `k2` and `k1` packs of size `p`, summed
/// over one workload per seed, for the sparse and the dense implementation.
pub fn join_scaling(p: usize, k1: usize, k2: usize, seeds: &[u64], opts: &RunOptions) -> Result<(f64, f64)> {
    let join_time = |k: usize, imp: Impl| -> Result<f64> {
        let mut total = 0.0;
        for &seed in seeds {
            let w = gen_workload(k, p, seed)?;
            let ms = run(&w, &[imp], opts)?;
            total += ms.iter().find(|m| m.op == "join").expect("join measured").micros;
        }
        Ok(total)
    };
    let sparse = join_time(k2, Impl::Sparse)? / join_time(k1, Impl::Sparse)?;
    let dense = join_time(k2, Impl::Dense)? / join_time(k1, Impl::Dense)?;
    Ok((sparse, dense))
}

/// Signed variables of a pack, for locality checks.
pub fn pack_svars(pack: &Pack) -> Vec<SVar> {
    pack.vars.iter().flat_map(|x| [x.pos(), x.neg()]).collect()
}
