#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use polar_eig::eigen::{
    default_polar_witness, least_valid_t, theta1_elliptic, theta1_polar, theta2_unitary,
    verify_eigenfunction, Eigenfunction,
};
use polar_eig::forms::{standard_form, Family, Form, FormKind};
use polar_eig::gf::{Elem, FieldContext};
use polar_eig::graph::{
    affine_polar_graph, collinearity_graph, maximal_cliques, srg_check, PolarGraph, SrgParams,
};
use polar_eig::linalg::{Subspace, Vector};
use polar_eig::polar::PolarSpace;

pub const CASES: u32 = 1000;

pub type PropResult = Result<(), String>;

pub fn run<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> PropResult {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new(config)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn field(q: u64) -> Arc<FieldContext> {
    FieldContext::from_order(q).unwrap()
}

fn form(family: Family, dim: usize, q: u64) -> Form {
    standard_form(family, dim, field(q)).unwrap()
}

fn fields() -> &'static [Arc<FieldContext>] {
    static F: OnceLock<Vec<Arc<FieldContext>>> = OnceLock::new();
    F.get_or_init(|| {
        [2, 3, 4, 5, 7, 8, 9, 11, 16, 25, 27, 32, 49, 64, 81, 121, 125]
            .into_iter()
            .map(field)
            .collect()
    })
}

fn forms() -> &'static [Form] {
    static F: OnceLock<Vec<Form>> = OnceLock::new();
    F.get_or_init(|| {
        vec![
            form(Family::Symplectic, 4, 2),
            form(Family::Symplectic, 6, 3),
            form(Family::Hyperbolic, 4, 2),
            form(Family::Hyperbolic, 6, 4),
            form(Family::Parabolic, 5, 3),
            form(Family::Parabolic, 3, 5),
            form(Family::Elliptic, 4, 2),
            form(Family::Elliptic, 6, 3),
            form(Family::Elliptic, 4, 8),
            form(Family::Unitary, 4, 4),
            form(Family::Unitary, 3, 9),
            form(Family::Unitary, 4, 16),
        ]
    })
}

fn spaces() -> &'static [PolarSpace] {
    static S: OnceLock<Vec<PolarSpace>> = OnceLock::new();
    S.get_or_init(|| {
        [
            (Family::Symplectic, 4, 2),
            (Family::Symplectic, 4, 3),
            (Family::Symplectic, 6, 2),
            (Family::Hyperbolic, 4, 3),
            (Family::Hyperbolic, 6, 2),
            (Family::Parabolic, 5, 3),
            (Family::Elliptic, 6, 2),
            (Family::Unitary, 4, 4),
            (Family::Unitary, 5, 4),
        ]
        .into_iter()
        .map(|(fam, d, q)| PolarSpace::new(form(fam, d, q)).unwrap())
        .collect()
    })
}

pub struct Affine {
    pub epsilon: i8,
    pub m: usize,
    pub q: u64,
    pub space: PolarSpace,
    pub graph: PolarGraph,
    /// Lex indices of Aff(M), one sorted set per maximal M.
    pub affs: Vec<Vec<usize>>,
    pub cliques: Vec<Vec<usize>>,
}

pub fn affine() -> &'static [Affine] {
    static A: OnceLock<Vec<Affine>> = OnceLock::new();
    A.get_or_init(|| {
        [(1, 2, 2), (-1, 2, 2), (1, 2, 3), (-1, 2, 3), (-1, 3, 2)]
            .into_iter()
            .map(|(epsilon, m, q)| {
                let fam = if epsilon > 0 {
                    Family::Hyperbolic
                } else {
                    Family::Elliptic
                };
                let space = PolarSpace::new(form(fam, 2 * m, q)).unwrap();
                let graph = affine_polar_graph(m, epsilon, field(q)).unwrap();
                let f = space.field().clone();
                let affs = space
                    .maximals()
                    .iter()
                    .map(|mx| {
                        let mut s: Vec<usize> = mx
                            .subspace()
                            .elements(&f)
                            .iter()
                            .map(|v| graph.index_of(v).unwrap())
                            .collect();
                        s.sort_unstable();
                        s
                    })
                    .collect();
                let cliques = maximal_cliques(&graph, 1);
                Affine {
                    epsilon,
                    m,
                    q,
                    space,
                    graph,
                    affs,
                    cliques,
                }
            })
            .collect()
    })
}

fn random_vector(f: &FieldContext, dim: usize, codes: &[u32]) -> Vector {
    Vector(
        (0..dim)
            .map(|i| f.elem(codes[i] % f.order()).unwrap())
            .collect(),
    )
}

fn codes(n: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(any::<u32>(), n)
}

pub fn field_axioms() -> PropResult {
    run((0..fields().len(), codes(3)), |(i, c)| {
        let f = &*fields()[i];
        let q = f.order();
        let [a, b, x] = [0, 1, 2].map(|j| f.elem(c[j] % q).unwrap());
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.add(f.add(a, b), x), f.add(a, f.add(b, x)));
        prop_assert_eq!(f.mul(f.mul(a, b), x), f.mul(a, f.mul(b, x)));
        prop_assert_eq!(f.mul(a, f.add(b, x)), f.add(f.mul(a, b), f.mul(a, x)));
        prop_assert_eq!(f.add(a, Elem::ZERO), a);
        prop_assert_eq!(f.mul(a, Elem::ONE), a);
        prop_assert_eq!(f.add(a, f.neg(a)), Elem::ZERO);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if !a.is_zero() {
            let inv = f.inv(a).unwrap();
            prop_assert_eq!(f.mul(a, inv), Elem::ONE);
            prop_assert_eq!(f.pow(a, q as u64 - 1), Elem::ONE);
        } else {
            prop_assert!(f.inv(a).is_err());
        }
        // Frobenius x -> x^p
        let p = f.characteristic() as u64;
        let fr = |y: Elem| f.pow(y, p);
        prop_assert_eq!(fr(f.add(a, b)), f.add(fr(a), fr(b)));
        prop_assert_eq!(fr(f.mul(a, b)), f.mul(fr(a), fr(b)));
        prop_assert_eq!(f.pow(a, q as u64), a);
        let mut y = a;
        for _ in 0..f.degree() {
            y = fr(y);
        }
        prop_assert_eq!(y, a);
        if let Some(r) = f.sqrt_order() {
            let s = f.frobenius_sqrt(a).unwrap();
            prop_assert_eq!(s, f.pow(a, r as u64));
            prop_assert_eq!(f.frobenius_sqrt(s).unwrap(), a);
            let n = f.norm(a).unwrap();
            prop_assert_eq!(f.frobenius_sqrt(n).unwrap(), n);
        }
        Ok(())
    })
}

pub fn polarisation() -> PropResult {
    run((0..forms().len(), codes(3 * 6 + 1)), |(i, c)| {
        let form = &forms()[i];
        let f = &**form.field();
        let d = form.dim();
        let u = random_vector(f, d, &c[0..]);
        let v = random_vector(f, d, &c[6..]);
        let w = random_vector(f, d, &c[12..]);
        let a = f.elem(c[18] % f.order()).unwrap();
        let b = |x: &Vector, y: &Vector| form.orthogonality(x, y).unwrap();
        // linear in the first argument for every kind
        prop_assert_eq!(b(&u.add(f, &w), &v), f.add(b(&u, &v), b(&w, &v)));
        prop_assert_eq!(b(&u.scale(f, a), &v), f.mul(a, b(&u, &v)));
        match form.kind() {
            FormKind::Quadratic => {
                let qf = |x: &Vector| form.eval_q(x).unwrap();
                prop_assert_eq!(form.polarise(&u, &v).unwrap(), b(&u, &v));
                prop_assert_eq!(
                    f.sub(f.sub(qf(&u.add(f, &v)), qf(&u)), qf(&v)),
                    b(&u, &v)
                );
                prop_assert_eq!(b(&u, &v), b(&v, &u));
                prop_assert_eq!(qf(&u.scale(f, a)), f.mul(f.mul(a, a), qf(&u)));
                prop_assert_eq!(b(&u, &u), f.add(qf(&u), qf(&u)));
            }
            FormKind::Symplectic => {
                prop_assert_eq!(b(&u, &u), Elem::ZERO);
                prop_assert_eq!(b(&u, &v), f.neg(b(&v, &u)));
            }
            FormKind::Hermitian => {
                let s = |x: Elem| f.frobenius_sqrt(x).unwrap();
                prop_assert_eq!(b(&u, &v.scale(f, a)), f.mul(s(a), b(&u, &v)));
                prop_assert_eq!(b(&v, &u), s(b(&u, &v)));
            }
        }
        Ok(())
    })
}

pub fn perp() -> PropResult {
    run((0..forms().len(), 1usize..4, codes(18)), |(i, k, c)| {
        let form = &forms()[i];
        let f = &**form.field();
        let d = form.dim();
        let gens: Vec<Vector> = (0..k).map(|j| random_vector(f, d, &c[6 * j..])).collect();
        let u = Subspace::span(f, d, &gens);
        let up = form.perp_subspace(&u);
        prop_assert_eq!(up.dim() + u.dim(), d);
        let upp = form.perp_subspace(&up);
        prop_assert_eq!(upp.dim(), u.dim());
        prop_assert!(upp.contains_subspace(f, &u));
        for x in u.basis() {
            for y in up.basis() {
                prop_assert!(form.orthogonality(x, y).unwrap().is_zero());
            }
        }
        Ok(())
    })
}

pub fn axiom_three() -> PropResult {
    run((0..spaces().len(), any::<usize>(), any::<usize>()), |(i, pi, mi)| {
        let space = &spaces()[i];
        let n = space.rank() as isize;
        let p = pi % space.points().len();
        let m = &space.maximals()[mi % space.maximals().len()];
        prop_assert_eq!(m.proj_dim(), n - 1);
        if m.contains_point(p) {
            return Ok(());
        }
        let through_p: Vec<_> = space
            .maximals()
            .iter()
            .filter(|x| x.contains_point(p))
            .collect();
        prop_assert!(!through_p.is_empty());
        prop_assert!(through_p.iter().all(|x| x.proj_dim() == n - 1));
        let close: Vec<_> = through_p
            .iter()
            .filter(|x| space.meet(x, m).proj_dim() == n - 2)
            .collect();
        prop_assert_eq!(close.len(), 1);
        let meet = space.meet(close[0], m);
        let collinear: Vec<usize> = m
            .points()
            .iter()
            .copied()
            .filter(|&x| space.collinear(p, x))
            .collect();
        prop_assert_eq!(meet.points(), &collinear[..]);
        Ok(())
    })
}

pub fn maximal_dimension() -> PropResult {
    run((0..spaces().len(), any::<usize>(), any::<usize>()), |(i, pi, qi)| {
        let space = &spaces()[i];
        let n = space.rank() as isize;
        let npts = space.points().len();
        let p = pi % npts;
        let nbrs: Vec<usize> = (0..npts).filter(|&x| x != p && space.collinear(p, x)).collect();
        let x = nbrs[qi % nbrs.len()];
        let line = space.span_closure(&[&[p], &[x]]).unwrap();
        prop_assert_eq!(line.proj_dim(), 1);
        let holders: Vec<_> = space
            .maximals()
            .iter()
            .filter(|mx| mx.contains(&line))
            .collect();
        prop_assert!(!holders.is_empty());
        prop_assert!(holders.iter().all(|mx| mx.proj_dim() == n - 1));
        Ok(())
    })
}

pub fn shift_automorphism() -> PropResult {
    run((0..affine().len(), any::<usize>(), any::<usize>(), any::<usize>()), |(i, a, x, y)| {
        let af = &affine()[i];
        let g = &af.graph;
        let f = &**g.field().unwrap();
        let n = g.order();
        let (a, x, y) = (g.vertex(a % n), x % n, y % n);
        let shift = |v: usize| g.index_of(&g.vertex(v).add(f, a)).unwrap();
        prop_assert_eq!(g.adjacent(x, y), g.adjacent(shift(x), shift(y)));
        Ok(())
    })
}

pub fn unique_maximal_clique() -> PropResult {
    run((0..affine().len(), any::<usize>(), any::<usize>()), |(i, ci, vi)| {
        let af = &affine()[i];
        let g = &af.graph;
        let f = &**g.field().unwrap();
        prop_assert_eq!(af.cliques.len(), af.affs.len() * g.order() / af.affs[0].len());
        let clique = &af.cliques[ci % af.cliques.len()];
        let v = g.vertex(clique[vi % clique.len()]);
        let mut diff: Vec<usize> = clique
            .iter()
            .map(|&x| g.index_of(&g.vertex(x).sub(f, v)).unwrap())
            .collect();
        diff.sort_unstable();
        prop_assert_eq!(af.affs.iter().filter(|s| **s == diff).count(), 1);
        Ok(())
    })
}

pub fn elliptic_trichotomy() -> PropResult {
    let elliptic: Vec<usize> = (0..affine().len())
        .filter(|&i| affine()[i].epsilon < 0)
        .collect();
    run(
        (0..elliptic.len(), any::<usize>(), any::<usize>(), any::<usize>()),
        |(e, mi, vi, zi)| {
            let af = &affine()[elliptic[e]];
            let g = &af.graph;
            let f = &**g.field().unwrap();
            let n = g.order();
            let mi = mi % af.affs.len();
            let v = g.vertex(vi % n);
            let z = zi % n;
            let shifted: BTreeSet<usize> = af.affs[mi]
                .iter()
                .map(|&x| g.index_of(&g.vertex(x).add(f, v)).unwrap())
                .collect();
            let count = shifted.iter().filter(|&&x| g.adjacent(z, x)).count();
            let q = af.q as usize;
            let w = g.vertex(z).sub(f, v);
            let m = &af.space.maximals()[mi];
            let expected = if m.subspace().contains(f, &w) {
                q.pow(af.m as u32 - 1) - 1
            } else if af.space.form().perp_subspace(m.subspace()).contains(f, &w) {
                0
            } else {
                q.pow(af.m as u32 - 2)
            };
            prop_assert_eq!(count, expected);
            Ok(())
        },
    )
}

pub struct Witness {
    pub graph: PolarGraph,
    pub params: SrgParams,
    pub f: Eigenfunction,
}

fn witnesses() -> &'static [Witness] {
    static W: OnceLock<Vec<Witness>> = OnceLock::new();
    W.get_or_init(|| {
        let mut out = Vec::new();
        for (fam, d, q) in [
            (Family::Symplectic, 4, 3),
            (Family::Hyperbolic, 4, 3),
            (Family::Unitary, 4, 4),
        ] {
            let space = PolarSpace::new(form(fam, d, q)).unwrap();
            let graph = collinearity_graph(&space).unwrap();
            let params = srg_check(&graph).unwrap();
            let (l, m, n) = default_polar_witness(&space).unwrap();
            let f = theta1_polar(&space, &l, &m, &n).unwrap();
            if fam == Family::Unitary {
                let f2 = theta2_unitary(&graph, None).unwrap();
                out.push(Witness {
                    graph: graph.clone(),
                    params,
                    f: f2,
                });
            }
            out.push(Witness { graph, params, f });
        }
        let af = &affine()[1];
        let params = srg_check(&af.graph).unwrap();
        let m = &af.space.maximals()[0];
        let t = least_valid_t(&af.space, m).unwrap();
        let f = theta1_elliptic(&af.graph, &af.space, &Vector::zero(4), m, &t).unwrap();
        out.push(Witness {
            graph: af.graph.clone(),
            params,
            f,
        });
        out
    })
}

pub fn eigen_scaling() -> PropResult {
    let nonzero = (-1000i64..1000).prop_filter("nonzero", |x| *x != 0);
    run((0..witnesses().len(), nonzero.clone(), nonzero), |(i, a, b)| {
        let w = &witnesses()[i];
        let c = BigRational::new(BigInt::from(a), BigInt::from(b));
        let g = w.f.scaled(&c).unwrap();
        prop_assert_eq!(g.support(), w.f.support());
        let r0 = verify_eigenfunction(&w.graph, &w.params, &w.f).unwrap();
        let r1 = verify_eigenfunction(&w.graph, &w.params, &g).unwrap();
        prop_assert_eq!(r0, r1);
        for (v, x) in w.f.values() {
            prop_assert_eq!(g.value(*v), x * &c);
        }
        prop_assert!(w.f.scaled(&BigRational::from_integer(0.into())).is_err());
        Ok(())
    })
}

pub const SUITES: &[(&str, fn() -> PropResult)] = &[
    ("field axioms and Frobenius", field_axioms),
    ("polarisation identities", polarisation),
    ("perp dimension and double perp", perp),
    ("Axiom III uniqueness", axiom_three),
    ("maximal dimension", maximal_dimension),
    ("affine shift automorphism", shift_automorphism),
    ("unique maximal clique", unique_maximal_clique),
    ("elliptic neighbour trichotomy", elliptic_trichotomy),
    ("eigenfunction scaling", eigen_scaling),
];
