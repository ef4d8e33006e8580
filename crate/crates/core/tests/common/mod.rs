//! Shared generators and reference pipelines for the integration tests.
#![allow(dead_code)]

use std::fmt::Write;

use octagon::analyzer::{AnalysisResult, PointKey, Program, StmtKind};
use octagon::{DenseDbm, Env, Mode, Rational, SVar, SparseDbm, VarId};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

// -------------------------------------------------------------------
// Differential op sequences

#[derive(Clone, Debug)]
pub enum Op {
    Assume(SVar, SVar, Rational),
    Forget(VarId),
    /// Join with the state built by these assumes from top.
    Join(Vec<(SVar, SVar, Rational)>),
    /// Compare against the state built by these assumes from top.
    Compare(Vec<(SVar, SVar, Rational)>),
}

fn random_bound(rng: &mut impl Rng, mode: Mode) -> Rational {
    match mode {
        Mode::Integer => int(rng.gen_range(-4..=10)),
        Mode::Rational => Rational::new(rng.gen_range(-8..=20), rng.gen_range(1..=2)),
    }
}

fn random_assume(rng: &mut impl Rng, n: usize, mode: Mode) -> (SVar, SVar, Rational) {
    let u = SVar(rng.gen_range(0..2 * n));
    let v = SVar(rng.gen_range(0..2 * n));
    (u, v, random_bound(rng, mode))
}

fn random_assumes(rng: &mut impl Rng, n: usize, mode: Mode) -> Vec<(SVar, SVar, Rational)> {
    (0..rng.gen_range(0..=2 * n)).map(|_| random_assume(rng, n, mode)).collect()
}

pub fn random_ops(rng: &mut impl Rng, n: usize, len: usize, mode: Mode) -> Vec<Op> {
    (0..len)
        .map(|_| match rng.gen_range(0..10) {
            0..=4 => {
                let (u, v, c) = random_assume(rng, n, mode);
                Op::Assume(u, v, c)
            }
            5 => Op::Forget(VarId(rng.gen_range(0..n))),
            6..=7 => Op::Join(random_assumes(rng, n, mode)),
            _ => Op::Compare(random_assumes(rng, n, mode)),
        })
        .collect()
}

/// The dense pipeline: strongly closed (tightly closed in integer mode)
/// matrices with the classic operators.
#[derive(Clone, Debug)]
pub struct DenseRef {
    pub mode: Mode,
    pub m: Option<DenseDbm>,
}

impl DenseRef {
    pub fn top(n: usize, mode: Mode) -> Self {
        DenseRef { mode, m: Some(DenseDbm::top(n)) }
    }

    fn canon(&self, m: DenseDbm) -> Option<DenseDbm> {
        match self.mode {
            Mode::Rational => m.strong_close(),
            Mode::Integer => m.tight_close().expect("integral"),
        }
    }

    pub fn assume(&self, u: SVar, v: SVar, c: &Rational) -> Self {
        let m = self.m.as_ref().and_then(|m| {
            let c = if self.mode == Mode::Integer { c.floor() } else { c.clone() };
            match self.mode {
                Mode::Rational => m.assume_oct(u, v, &c),
                Mode::Integer => {
                    let mut d = m.clone();
                    d.meet_cell(u, v, &c.clone().into());
                    d.meet_cell(v.bar(), u.bar(), &c.into());
                    self.canon(d)
                }
            }
        });
        DenseRef { mode: self.mode, m }
    }

    pub fn forget(&self, x: VarId) -> Self {
        let m = self.m.as_ref().and_then(|m| self.canon(m.forget_oct(x)));
        DenseRef { mode: self.mode, m }
    }

    pub fn join(&self, o: &DenseRef) -> Self {
        let m = match (&self.m, &o.m) {
            (None, m) | (m, None) => m.clone(),
            (Some(a), Some(b)) => self.canon(a.join(b)),
        };
        DenseRef { mode: self.mode, m }
    }

    pub fn leq(&self, o: &DenseRef) -> bool {
        match (&self.m, &o.m) {
            (None, _) => true,
            (_, None) => false,
            (Some(a), Some(b)) => a.leq(b),
        }
    }
}

fn sparse_build(n: usize, mode: Mode, cs: &[(SVar, SVar, Rational)]) -> Option<SparseDbm> {
    let mut m = SparseDbm::top(n, mode);
    for (u, v, c) in cs {
        m = m.assume_weak(*u, *v, c)?;
    }
    Some(m)
}

fn dense_build(n: usize, mode: Mode, cs: &[(SVar, SVar, Rational)]) -> DenseRef {
    cs.iter().fold(DenseRef::top(n, mode), |d, (u, v, c)| d.assume(*u, *v, c))
}

fn sparse_leq(a: &Option<SparseDbm>, b: &Option<SparseDbm>) -> bool {
    match (a, b) {
        (None, _) => true,
        (_, None) => false,
        (Some(a), Some(b)) => a.leq_weak(b),
    }
}

/// Replays `ops` on both pipelines; `Err` describes the first divergence.
pub fn differential(n: usize, mode: Mode, ops: &[Op]) -> Result<(), String> {
    let mut s = Some(SparseDbm::top(n, mode));
    let mut d = DenseRef::top(n, mode);
    for (i, op) in ops.iter().enumerate() {
        match op {
            Op::Assume(u, v, c) => {
                s = s.and_then(|m| m.assume_weak(*u, *v, c));
                d = d.assume(*u, *v, c);
            }
            Op::Forget(x) => {
                s = s.map(|m| m.forget_weak(*x));
                d = d.forget(*x);
            }
            Op::Join(cs) => {
                let other = sparse_build(n, mode, cs);
                s = match (s, other) {
                    (None, m) | (m, None) => m,
                    (Some(a), Some(b)) => Some(a.join_weak(&b)),
                };
                d = d.join(&dense_build(n, mode, cs));
            }
            Op::Compare(cs) => {
                let other = sparse_build(n, mode, cs);
                let od = dense_build(n, mode, cs);
                if sparse_leq(&s, &other) != d.leq(&od) || sparse_leq(&other, &s) != od.leq(&d) {
                    return Err(format!("step {i}: comparison verdicts differ"));
                }
            }
        }
        if let Some(m) = &s {
            if !m.is_weakly_closed() {
                return Err(format!("step {i}: sparse result not weakly closed"));
            }
        }
        let exported = s.as_ref().map(SparseDbm::strengthen_export);
        if exported != d.m {
            return Err(format!("step {i} ({op:?}): sparse {exported:?} vs dense {:?}", d.m));
        }
    }
    Ok(())
}

// -------------------------------------------------------------------
// Random programs and their concrete semantics

/// Source text of a random program over `n_vars` variables. Without
/// `loops` the program is straight-line.
pub fn random_program(rng: &mut impl Rng, n_vars: usize, n_stmts: usize, loops: bool) -> String {
    let names: Vec<String> = (0..n_vars).map(|i| format!("v{i}")).collect();
    let mut src = format!("var {};\n", names.join(", "));
    for _ in 0..n_stmts {
        random_stmt(rng, &names, loops, 0, &mut src);
    }
    src
}

/// `n` top-level statements over `names`, one source string each.
pub fn random_block(rng: &mut impl Rng, names: &[String], n: usize, loops: bool) -> Vec<String> {
    (0..n)
        .map(|_| {
            let mut s = String::new();
            random_stmt(rng, names, loops, 0, &mut s);
            s
        })
        .collect()
}

fn pick<'a>(rng: &mut impl Rng, names: &'a [String]) -> &'a str {
    names.choose(rng).expect("non-empty")
}

fn random_expr(rng: &mut impl Rng, names: &[String]) -> String {
    let c: i64 = rng.gen_range(-5..=5);
    match rng.gen_range(0..7) {
        0 => format!("{c}"),
        1 => format!("{} + {c}", pick(rng, names)),
        2 => format!("-{} + {c}", pick(rng, names)),
        3 => format!("{} - {}", pick(rng, names), pick(rng, names)),
        4 => format!("{} * {}", pick(rng, names), pick(rng, names)),
        5 => format!("2 * {} - {c}", pick(rng, names)),
        _ => format!("{} - {c}", pick(rng, names)),
    }
}

fn random_cond(rng: &mut impl Rng, names: &[String]) -> String {
    let op = ["<=", "<", ">=", ">", "=="].choose(rng).expect("non-empty");
    let c: i64 = rng.gen_range(-6..=6);
    match rng.gen_range(0..4) {
        0 => format!("{} {op} {c}", pick(rng, names)),
        1 => format!("{} + {} {op} {c}", pick(rng, names), pick(rng, names)),
        2 => format!("{} - {} {op} {c}", pick(rng, names), pick(rng, names)),
        _ => format!("-{} {op} {}", pick(rng, names), pick(rng, names)),
    }
}

fn random_stmt(rng: &mut impl Rng, names: &[String], loops: bool, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    let kinds = if loops && depth < 2 { 9 } else { 7 };
    match rng.gen_range(0..kinds) {
        0..=2 => {
            let _ = writeln!(out, "{indent}{} := {};", pick(rng, names), random_expr(rng, names));
        }
        3 => {
            let _ = writeln!(out, "{indent}havoc {};", pick(rng, names));
        }
        4 => {
            let _ = writeln!(out, "{indent}assume {};", random_cond(rng, names));
        }
        5 => {
            let _ = writeln!(out, "{indent}assert {};", random_cond(rng, names));
        }
        6 => {
            let _ = writeln!(out, "{indent}{} := ?;", pick(rng, names));
        }
        7 => {
            let _ = writeln!(out, "{indent}if {} {{", random_cond(rng, names));
            for _ in 0..rng.gen_range(1..=3) {
                random_stmt(rng, names, loops, depth + 1, out);
            }
            let _ = writeln!(out, "{indent}}} else {{");
            for _ in 0..rng.gen_range(0..=2) {
                random_stmt(rng, names, loops, depth + 1, out);
            }
            let _ = writeln!(out, "{indent}}}");
        }
        _ => {
            let x = pick(rng, names).to_string();
            let bound: i64 = rng.gen_range(0..=8);
            let _ = writeln!(out, "{indent}while {x} <= {bound} {{");
            for _ in 0..rng.gen_range(0..=2) {
                random_stmt(rng, names, false, depth + 1, out);
            }
            // make progress on the loop variable
            let _ = writeln!(out, "{indent}  {x} := {x} + {};", rng.gen_range(1..=3));
            let _ = writeln!(out, "{indent}}}");
        }
    }
}

/// Concrete states observed at program points.
pub type Trace = Vec<(PointKey, Vec<Rational>)>;

#[derive(Default, Debug)]
pub struct Run {
    pub trace: Trace,
    /// Lines of asserts that failed (execution stops there).
    pub violated: Vec<usize>,
}

/// Executes `p` from `init`, recording the state after every statement and
/// at every loop-head visit. Stops on a failed assume or assert, or when
/// `fuel` statements have run.
pub fn execute(p: &Program, init: Vec<Rational>, rng: &mut impl Rng, fuel: &mut usize) -> Run {
    let mut run = Run { trace: vec![(PointKey::Entry, init.clone())], violated: Vec::new() };
    let mut state = init;
    if exec_block(&p.body, &mut state, rng, fuel, &mut run) {
        run.trace.push((PointKey::Exit, state));
    }
    run
}

/// `false` when execution stopped.
fn exec_block(
    stmts: &[octagon::analyzer::Stmt],
    state: &mut Vec<Rational>,
    rng: &mut impl Rng,
    fuel: &mut usize,
    run: &mut Run,
) -> bool {
    for s in stmts {
        if *fuel == 0 {
            return false;
        }
        *fuel -= 1;
        match &s.kind {
            StmtKind::Skip => {}
            StmtKind::Havoc(x) | StmtKind::Assign { var: x, rhs: None } => {
                state[x.0] = int(rng.gen_range(-20..=20));
            }
            StmtKind::Assign { var, rhs: Some(e) } => state[var.0] = e.eval(state),
            StmtKind::Assume(c) => {
                if !c.holds(state) {
                    return false;
                }
            }
            StmtKind::Assert(c) => {
                if !c.holds(state) {
                    run.violated.push(s.line);
                    return false;
                }
            }
            StmtKind::If { cond, then, otherwise } => {
                let branch = if cond.holds(state) { then } else { otherwise };
                if !exec_block(branch, state, rng, fuel, run) {
                    return false;
                }
            }
            StmtKind::While { cond, body } => loop {
                run.trace.push((PointKey::LoopHead(s.id), state.clone()));
                if !cond.holds(state) {
                    break;
                }
                if *fuel == 0 || !exec_block(body, state, rng, fuel, run) {
                    return false;
                }
            },
        }
        run.trace.push((PointKey::After(s.id), state.clone()));
    }
    true
}

/// Points of `trace` whose concrete state is outside the reported invariant,
/// checked on the strengthened dense matrix.
pub fn escapes(res: &AnalysisResult, trace: &Trace) -> Vec<String> {
    let mut out = Vec::new();
    for (key, values) in trace {
        let Some(point) = res.point(*key) else {
            out.push(format!("{key:?} never recorded"));
            continue;
        };
        let env = Env::new(values.clone());
        let inside = point.value.dbm().is_some_and(|m| m.strengthen_export().member(&env));
        if !inside {
            out.push(format!("{key:?}: {values:?} not in {}", point.value));
        }
    }
    out
}

/// Lines of asserts reported as proven although `violated` contains them.
pub fn false_proofs(res: &AnalysisResult, violated: &[usize]) -> Vec<usize> {
    res.asserts
        .iter()
        .filter(|a| a.proven && violated.contains(&a.line))
        .map(|a| a.line)
        .collect()
}

pub fn random_init(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| int(rng.gen_range(-5..=5))).collect()
}

// -------------------------------------------------------------------
// Theorem checks on one random instance

/// A weakly closed matrix built by random assumes from top; `None` if the
/// draw was empty.
pub fn random_weak(rng: &mut impl Rng, n: usize, mode: Mode) -> Option<SparseDbm> {
    let cs: Vec<_> = (0..rng.gen_range(0..=3 * n)).map(|_| random_assume(rng, n, mode)).collect();
    sparse_build(n, mode, &cs)
}

fn random_weak_nonempty(rng: &mut impl Rng, n: usize, mode: Mode) -> SparseDbm {
    loop {
        if let Some(m) = random_weak(rng, n, mode) {
            return m;
        }
    }
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

/// Both characterizations of weak closedness agree, on raw, coherent,
/// closed and weakly closed matrices.
pub fn forms_agree(rng: &mut impl Rng, n: usize) -> Result<(), String> {
    let cs: Vec<octagon::Constraint> = (0..rng.gen_range(0..=3 * n))
        .map(|_| {
            let (u, v, c) = random_assume(rng, n, Mode::Rational);
            octagon::Constraint::new(u, v, c)
        })
        .collect();
    let raw = DenseDbm::from_constraints(n, &cs);
    let coherent = raw.make_coherent();
    let mut ms = vec![raw, coherent.clone()];
    if let Some(c) = coherent.close() {
        ms.push(c.strengthen());
        ms.push(c);
    }
    ms.push(random_weak_nonempty(rng, n, Mode::Rational).to_dense());
    for m in ms {
        check(m.weak_closedness_forms_agree(), || format!("forms disagree on {m:?}"))?;
    }
    Ok(())
}

/// Comparison of weakly closed matrices decides inclusion of the
/// strengthenings.
pub fn comparison_exact(rng: &mut impl Rng, n: usize, mode: Mode) -> Result<(), String> {
    let a = random_weak_nonempty(rng, n, mode);
    let b = if rng.gen_bool(0.3) { a.join_weak(&random_weak_nonempty(rng, n, mode)) } else {
        random_weak_nonempty(rng, n, mode)
    };
    for (x, y) in [(&a, &b), (&b, &a), (&a, &a)] {
        let want = x.strengthen_export().leq(&y.strengthen_export());
        check(x.leq_weak(y) == want, || format!("leq_weak {x:?} {y:?} should be {want}"))?;
    }
    Ok(())
}

/// Forget, join and assume commute with strengthening.
pub fn commutation(rng: &mut impl Rng, n: usize) -> Result<(), String> {
    let a = random_weak_nonempty(rng, n, Mode::Rational);
    let b = random_weak_nonempty(rng, n, Mode::Rational);
    let (sa, sb) = (a.strengthen_export(), b.strengthen_export());

    let x = VarId(rng.gen_range(0..n));
    let f = a.forget_weak(x);
    check(f.is_weakly_closed(), || "forget result not weakly closed".into())?;
    check(f.strengthen_export() == sa.forget_oct(x), || format!("forget {x:?} of {a:?}"))?;

    let j = a.join_weak(&b);
    check(j.is_weakly_closed(), || "join result not weakly closed".into())?;
    check(j.strengthen_export() == sa.join(&sb), || format!("join of {a:?} and {b:?}"))?;

    let (u, v, c) = random_assume(rng, n, Mode::Rational);
    match (a.assume_weak(u, v, &c), sa.assume_oct(u, v, &c)) {
        (Some(m), Some(d)) => {
            check(m.is_weakly_closed(), || "assume result not weakly closed".into())?;
            check(m.strengthen_export() == d, || format!("assume {u:?}-{v:?}<={c} on {a:?}"))?;
        }
        (None, None) => {}
        (s, d) => return Err(format!("assume emptiness differs: {s:?} vs {d:?}")),
    }
    Ok(())
}

/// The two scalar emptiness tests of the incremental assume agree with the
/// diagonal of the matrix after both path updates, and with the dense
/// oracle.
pub fn emptiness_conditions(rng: &mut impl Rng, n: usize) -> Result<(), String> {
    let b = random_weak_nonempty(rng, n, Mode::Rational);
    let (u, v, c) = random_assume(rng, n, Mode::Rational);
    if u == v {
        return Ok(());
    }
    let scalar = !b.get(v, u).add_rational(&c).is_negative()
        && !b.get(v, v.bar()).add(&b.get(u.bar(), u)).add_rational(&c.double()).is_negative();
    let p = b.to_dense().assume_pot(u, v, &c).assume_pot(v.bar(), u.bar(), &c);
    let diagonal = p.svars().all(|w| !p.get(w, w).is_negative());
    let oracle = b.strengthen_export().assume_oct(u, v, &c).is_some();
    let sparse = b.assume_weak(u, v, &c).is_some();
    check(scalar == diagonal && diagonal == oracle && oracle == sparse, || {
        format!("emptiness: scalar {scalar}, diagonal {diagonal}, oracle {oracle}, sparse {sparse} for {u:?}-{v:?}<={c} on {b:?}")
    })
}

/// Tightening a weakly closed integral matrix gives a weakly tightly closed
/// one whose strengthening is the tight closure.
pub fn tightening(rng: &mut impl Rng, n: usize) -> Result<(), String> {
    // Rational mode with integral bounds: weakly closed but not tightened.
    let b = loop {
        let cs: Vec<_> = (0..rng.gen_range(0..=3 * n)).map(|_| random_assume(rng, n, Mode::Integer)).collect();
        if let Some(m) = sparse_build(n, Mode::Rational, &cs) {
            if m.cells().all(|(_, _, c)| c.is_integer()) {
                break m;
            }
        }
    };
    let t = b.tighten_weak().map_err(|e| e.to_string())?;
    let want = b.to_dense().tight_close().map_err(|e| e.to_string())?;
    match (t, want) {
        (Some(t), Some(want)) => {
            check(t.to_dense().is_weakly_tightly_closed(), || format!("{t:?} not weakly tightly closed"))?;
            check(t.strengthen_export() == want, || format!("tighten of {b:?}"))
        }
        (None, None) => Ok(()),
        (t, w) => Err(format!("tightening emptiness differs: {t:?} vs {w:?}")),
    }
}

/// Box constraints `-4 <= x <= 4` plus random ones, over the integers.
pub fn random_boxed_integer(rng: &mut impl Rng, n: usize) -> Vec<octagon::Constraint> {
    let mut cs = Vec::new();
    for i in 0..n {
        cs.push(octagon::Constraint::unary(VarId(i), true, int(4)));
        cs.push(octagon::Constraint::unary(VarId(i), false, int(4)));
    }
    for _ in 0..rng.gen_range(0..=2 * n) {
        let u = SVar(rng.gen_range(0..2 * n));
        let v = SVar(rng.gen_range(0..2 * n));
        if u == v {
            continue;
        }
        let c = if u == v.bar() { int(rng.gen_range(-8..=8)) } else { int(rng.gen_range(-6..=6)) };
        cs.push(octagon::Constraint::new(u, v, c));
    }
    cs
}

/// Integer points of the box `[-4, 4]^n` satisfying `cs`.
pub fn box_points(n: usize, cs: &[octagon::Constraint]) -> Vec<Env> {
    let mut out = Vec::new();
    let total = 9usize.pow(n as u32);
    for code in 0..total {
        let vals: Vec<i64> = (0..n).map(|i| (code / 9usize.pow(i as u32) % 9) as i64 - 4).collect();
        let env = Env::from_ints(&vals);
        let sat = cs.iter().all(|c| {
            let l = env.eval_signed(c.lhs).expect("in range");
            let r = env.eval_signed(c.rhs).expect("in range");
            l - r <= c.bound
        });
        if sat {
            out.push(env);
        }
    }
    out
}

/// The best octagon of the enumerated points equals the tight closure of the
/// constraints (dense) and the strengthened sparse integer closure.
pub fn integer_brute_force(rng: &mut impl Rng, n: usize) -> Result<(), String> {
    let cs = random_boxed_integer(rng, n);
    let points = box_points(n, &cs);
    let alpha = DenseDbm::alpha_points(&octagon::PointSet::new(points.clone()));
    let tight = DenseDbm::from_constraints(n, &cs).tight_close().map_err(|e| e.to_string())?;
    let sparse = SparseDbm::from_constraints(&cs, n, Mode::Integer)
        .map_err(|e| e.to_string())?
        .map(|m| m.strengthen_export());
    check(alpha == tight, || format!("alpha {alpha:?} vs tight closure {tight:?} for {cs:?}"))?;
    check(sparse == tight, || format!("sparse {sparse:?} vs tight closure {tight:?} for {cs:?}"))?;
    check(points.is_empty() == tight.is_none(), || "emptiness differs".into())
}
