use super::*;
use crate::constraint::parse_constraints;
use crate::var::VarId;

fn x() -> VarId {
    VarId(0)
}
fn y() -> VarId {
    VarId(1)
}
fn z() -> VarId {
    VarId(2)
}
fn r(n: i64) -> Rational {
    Rational::from_integer(n)
}

fn example1() -> SparseDbm {
    let cs = parse_constraints("vars x y z\n+x +x <= 1\n-y -y <= 3\n+y +z <= 1\n").unwrap();
    SparseDbm::from_constraints(&cs.constraints, 3, Mode::Rational).unwrap().unwrap()
}

fn cell_list(m: &SparseDbm) -> Vec<(SVar, SVar, Rational)> {
    m.cells().map(|(u, v, c)| (u, v, c.clone())).collect()
}

fn sorted(mut v: Vec<(SVar, SVar, Rational)>) -> Vec<(SVar, SVar, Rational)> {
    v.sort_by_key(|(u, v, _)| (*u, *v));
    v
}

#[test]
fn first_example_weak_form() {
    let m = example1();
    let expect = sorted(vec![
        (x().pos(), x().neg(), r(1)),
        (y().neg(), y().pos(), r(3)),
        (y().pos(), z().neg(), r(1)),
        (z().pos(), y().neg(), r(1)),
        (y().neg(), z().neg(), r(4)),
        (z().pos(), y().pos(), r(4)),
        (z().pos(), z().neg(), r(5)),
    ]);
    assert_eq!(cell_list(&m), expect);
    assert_eq!(m.nnz(), 7);
    assert_eq!(m.strengthen_export().nnz(), 11);
    // no cell relates x to y or z
    assert!(m.cells().all(|(u, v, _)| (u.var() == x()) == (v.var() == x())));
}

#[test]
fn sparse_closure_route_matches_dense_route() {
    let cs = parse_constraints("vars x y z\n+x +x <= 1\n-y -y <= 3\n+y +z <= 1\n").unwrap();
    let sparse = SparseDbm::from_constraints_with(&cs.constraints, 3, Mode::Rational, 0).unwrap();
    assert_eq!(sparse, Some(example1()));
}

#[test]
fn unsatisfiable_constraints_are_empty() {
    let cs = vec![
        Constraint::new(x().pos(), x().neg(), r(-2)),
        Constraint::new(x().neg(), x().pos(), r(1)),
    ];
    for threshold in [0, 64] {
        assert_eq!(SparseDbm::from_constraints_with(&cs, 1, Mode::Rational, threshold).unwrap(), None);
    }
}

#[test]
fn from_constraints_errors() {
    let cs = vec![Constraint::new(x().pos(), x().neg(), Rational::new(1, 2))];
    assert!(matches!(
        SparseDbm::from_constraints(&cs, 1, Mode::Integer),
        Err(Error::NonIntegral(_))
    ));
    let cs = vec![Constraint::new(y().pos(), x().neg(), r(1))];
    assert!(matches!(
        SparseDbm::from_constraints(&cs, 1, Mode::Rational),
        Err(Error::VarOutOfRange { .. })
    ));
}

#[test]
fn comparison_uses_unary_bounds() {
    // 2x <= 1, -2y <= 3 and no (x, y) cell
    let a = SparseDbm::from_constraints(
        &[
            Constraint::new(x().pos(), x().neg(), r(1)),
            Constraint::new(y().neg(), y().pos(), r(3)),
        ],
        2,
        Mode::Rational,
    )
    .unwrap()
    .unwrap();
    let b = SparseDbm::from_constraints(&[Constraint::new(x().pos(), y().pos(), r(2))], 2, Mode::Rational)
        .unwrap()
        .unwrap();
    assert!(a.leq_weak(&b));
    let b2 = SparseDbm::from_constraints(
        &[Constraint::new(x().pos(), y().pos(), Rational::new(3, 2))],
        2,
        Mode::Rational,
    )
    .unwrap()
    .unwrap();
    assert!(!a.leq_weak(&b2));
    assert!(!a.strengthen_export().leq(&b2.strengthen_export()));
    assert!(a.leq_weak(&a));
}

fn unary2(xc: i64, yc: i64) -> SparseDbm {
    SparseDbm::from_constraints(
        &[
            Constraint::new(x().pos(), x().neg(), r(xc)),
            Constraint::new(y().pos(), y().neg(), r(yc)),
        ],
        2,
        Mode::Rational,
    )
    .unwrap()
    .unwrap()
}

#[test]
fn join_creates_needed_relations() {
    let a = unary2(1, 0);
    let b = unary2(0, 1);
    let j = a.join_weak(&b);
    let half = Rational::new(1, 2);
    assert_eq!(
        cell_list(&j),
        sorted(vec![
            (x().pos(), x().neg(), r(1)),
            (x().pos(), y().neg(), half.clone()),
            (y().pos(), y().neg(), r(1)),
            (y().pos(), x().neg(), half),
        ])
    );
    assert_eq!(j.strengthen_export(), a.strengthen_export().join(&b.strengthen_export()));
    assert_eq!(a.join_weak(&a), a);
}

#[test]
fn join_leaves_untouched_packs_alone() {
    // pack {x, y} identical, pack {z, w} differs
    let base = [
        Constraint::new(x().pos(), x().neg(), r(4)),
        Constraint::new(x().pos(), y().pos(), r(1)),
        Constraint::new(y().neg(), y().pos(), r(2)),
    ];
    let mk = |zc: i64| {
        let mut cs = base.to_vec();
        cs.push(Constraint::new(z().pos(), z().neg(), r(zc)));
        cs.push(Constraint::new(VarId(3).pos(), z().pos(), r(zc)));
        SparseDbm::from_constraints(&cs, 4, Mode::Rational).unwrap().unwrap()
    };
    let (a, b) = (mk(2), mk(6));
    let j = a.join_weak(&b);
    for u in [x().pos(), x().neg(), y().pos(), y().neg()] {
        assert!(Arc::ptr_eq(&j.rows[u.0], &a.rows[u.0]));
    }
    assert_eq!(j.strengthen_export(), a.strengthen_export().join(&b.strengthen_export()));
}

#[test]
fn forget_drops_rows_and_columns() {
    let m = example1().forget_weak(x());
    let expect = sorted(vec![
        (y().neg(), y().pos(), r(3)),
        (y().pos(), z().neg(), r(1)),
        (z().pos(), y().neg(), r(1)),
        (y().neg(), z().neg(), r(4)),
        (z().pos(), y().pos(), r(4)),
        (z().pos(), z().neg(), r(5)),
    ]);
    assert_eq!(cell_list(&m), expect);
    assert_eq!(m.forget_weak(x()), m);
    let f = example1().forget_weak(z());
    assert_eq!(f.strengthen_export(), example1().strengthen_export().forget_oct(z()));
}

#[test]
fn forget_of_unconstrained_variable() {
    let m = example1().with_extra_vars(1);
    assert_eq!(cell_list(&m.forget_weak(VarId(3))), cell_list(&m));
}

#[test]
fn assume_from_top() {
    let top = SparseDbm::top(2, Mode::Rational);
    let m = top.assume_weak(x().pos(), y().pos(), &r(2)).unwrap();
    assert_eq!(
        cell_list(&m),
        vec![(x().pos(), y().pos(), r(2)), (y().neg(), x().neg(), r(2))]
    );
    assert_eq!(m.nnz(), 2);
}

#[test]
fn assume_detects_emptiness() {
    let m = SparseDbm::top(1, Mode::Rational)
        .assume_weak(x().pos(), x().neg(), &r(-2))
        .unwrap();
    assert_eq!(m.assume_weak(x().neg(), x().pos(), &r(-1)), None);
    // x <= -1 and x >= 1/2 through the unary test
    let m = SparseDbm::top(2, Mode::Rational)
        .assume_weak(x().pos(), x().neg(), &r(-2))
        .unwrap()
        .assume_weak(y().neg(), y().pos(), &r(-1))
        .unwrap();
    assert_eq!(m.assume_weak(y().pos(), x().pos(), &r(0)), None);
}

#[test]
fn assume_loose_relation_adds_only_its_cells() {
    let m = example1();
    let n = m.assume_weak(y().pos(), z().pos(), &r(10)).unwrap();
    // Every prior cell keeps its value.
    for (u, v, c) in cell_list(&m) {
        assert_eq!(n.cell(u, v), Some(&c));
    }
    assert_eq!(n.cell(y().pos(), z().pos()), Some(&r(10)));
    assert_eq!(n.cell(z().neg(), y().neg()), Some(&r(10)));
    // y - z <= 10 with y + z <= 1 bounds y above (2y <= 11), and with
    // y >= -3/2 bounds z below (-2z <= 23). Unary cells must be exact in a
    // weakly closed matrix, so these appear too.
    assert_eq!(n.unary(y().pos()), Some(&r(11)));
    assert_eq!(n.unary(z().neg()), Some(&r(23)));
    assert_eq!(
        n.strengthen_export(),
        m.strengthen_export()
            .assume_oct(y().pos(), z().pos(), &r(10))
            .unwrap()
    );
}

#[test]
fn assume_entailed_is_noop() {
    let m = example1();
    assert_eq!(m.assume_weak(y().pos(), z().neg(), &r(1)).unwrap(), m);
    assert_eq!(m.assume_weak(x().pos(), x().pos(), &r(0)).unwrap(), m);
    assert_eq!(m.assume_weak(x().pos(), x().pos(), &r(-1)), None);
}

#[test]
fn tightening_examples() {
    let m = SparseDbm::top(1, Mode::Rational)
        .assume_weak(x().pos(), x().neg(), &r(1))
        .unwrap();
    let t = m.tighten_weak().unwrap().unwrap();
    assert_eq!(t.cell(x().pos(), x().neg()), Some(&r(0)));

    let even = SparseDbm::top(1, Mode::Rational)
        .assume_weak(x().pos(), x().neg(), &r(4))
        .unwrap();
    assert_eq!(even.tighten_weak().unwrap().unwrap(), even);

    let m = m.assume_weak(x().neg(), x().pos(), &r(0)).unwrap();
    let t = m.tighten_weak().unwrap().unwrap();
    assert_eq!(t.cell(x().pos(), x().neg()), Some(&r(0)));
    assert_eq!(t.cell(x().neg(), x().pos()), Some(&r(0)));

    let half = SparseDbm::top(1, Mode::Rational)
        .assume_weak(x().pos(), x().neg(), &Rational::new(1, 3))
        .unwrap();
    assert!(matches!(half.tighten_weak(), Err(Error::NonIntegral(_))));
}

#[test]
fn integer_assume_tightens() {
    let top = SparseDbm::top(2, Mode::Integer);
    let m = top.assume_weak(x().pos(), x().neg(), &r(3)).unwrap();
    assert_eq!(m.bounds_of(x()).upper, Some(r(1)));
    // x + y <= 1 with x >= 1, y >= 1 has no integer point
    let m = top
        .assume_weak(x().neg(), x().pos(), &r(-2))
        .unwrap()
        .assume_weak(y().neg(), y().pos(), &r(-2))
        .unwrap();
    assert_eq!(m.assume_weak(x().pos(), y().neg(), &r(1)), None);
    // 2x <= 1 and 2x >= 1: rational point 1/2, no integer
    let m = top.assume_weak(x().neg(), x().pos(), &r(-1)).unwrap();
    assert_eq!(m.bounds_of(x()).lower, Some(r(1)));
}

#[test]
fn bounds() {
    let m = example1();
    assert_eq!(m.bounds_of(x()), Interval { lower: None, upper: Some(Rational::new(1, 2)) });
    assert_eq!(m.bounds_of(z()).upper, Some(Rational::new(5, 2)));
    assert_eq!(m.bounds_of(y()).lower, Some(Rational::new(-3, 2)));
    let top = SparseDbm::top(1, Mode::Rational);
    assert_eq!(top.bounds_of(x()), Interval { lower: None, upper: None });
    assert_eq!(top.bounds_of(x()).to_string(), "[-inf, +inf]");
}

#[test]
fn nnz_counts() {
    assert_eq!(example1().nnz(), 7);
    assert_eq!(SparseDbm::top(5, Mode::Rational).nnz(), 0);
}

#[test]
fn export_round_trip() {
    let m = example1();
    let s = m.strengthen_export();
    assert!(s.is_strongly_closed());
    let back = SparseDbm::from_dense(&s, Mode::Rational).unwrap();
    assert!(back.leq_weak(&m) && m.leq_weak(&back));
    assert!(matches!(
        SparseDbm::from_dense(&DenseDbm::unconstrained(1), Mode::Rational),
        Err(Error::NotWeaklyClosed)
    ));
}

#[test]
fn export_without_unary_cells_is_plain() {
    let m = SparseDbm::top(2, Mode::Rational)
        .assume_weak(x().pos(), y().pos(), &r(3))
        .unwrap();
    assert_eq!(m.strengthen_export(), m.to_dense());
}

#[test]
fn remap_renames_and_drops() {
    let m = example1();
    // drop x, shift y, z down
    let r2 = m.remap(2, |v| if v == x() { None } else { Some(VarId(v.0 - 1)) });
    assert_eq!(r2.nnz(), 6);
    assert_eq!(r2.bounds_of(VarId(1)).upper, Some(Rational::new(5, 2)));
    assert_eq!(m.remap(3, Some), m);
}
