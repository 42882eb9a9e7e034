use std::collections::BTreeMap;
use std::sync::Arc;

use crate::forms::Family;
use crate::gf::{Elem, FieldContext};
use crate::graph::{
    clique_info, max_intersecting_delsarte_pair, spectrum, CliqueInfo, GraphKind, PolarGraph,
    Provenance, SrgParams,
};
use crate::linalg::Vector;
use crate::polar::{PolarSpace, SingularSubspace};

use super::{EigenError, Eigenfunction};

fn check_sigma(
    space: &PolarSpace,
    l: &SingularSubspace,
    m: &SingularSubspace,
    n: &SingularSubspace,
) -> Result<(), EigenError> {
    let expected = space.rank() as isize - 2;
    if l.proj_dim() != expected {
        return Err(EigenError::WrongDimension {
            expected,
            actual: l.proj_dim(),
        });
    }
    let sigma = space.sigma(l);
    if m == n || !sigma.contains(&m) || !sigma.contains(&n) {
        return Err(EigenError::NotInSigmaL);
    }
    Ok(())
}

/// The least (n−2)-dimensional singular subspace L and the first two maximals through it.
pub fn default_polar_witness(
    space: &PolarSpace,
) -> Result<(SingularSubspace, SingularSubspace, SingularSubspace), EigenError> {
    let rank = space.rank() as isize;
    let l = space.singular_subspaces(rank - 2)?[0].clone();
    let sigma = space.sigma(&l);
    if sigma.len() < 2 {
        return Err(EigenError::NotInSigmaL);
    }
    let (m, n) = (sigma[0].clone(), sigma[1].clone());
    Ok((l, m, n))
}

/// +1 on M∖L, −1 on N∖L, for L of dimension n−2 and distinct M, N ∈ Σ_L.
pub fn theta1_polar(
    space: &PolarSpace,
    l: &SingularSubspace,
    m: &SingularSubspace,
    n: &SingularSubspace,
) -> Result<Eigenfunction, EigenError> {
    check_sigma(space, l, m, n)?;
    let q = space.descriptor().q as i64;
    let theta1 = q.pow(space.rank() as u32 - 1) - 1;
    Eigenfunction::signed_indicator(
        &m.difference(l),
        &n.difference(l),
        theta1,
        Some(Provenance::of_space(space)),
    )
}

/// +1 on C0∖C, −1 on C1∖C where C = C0 ∩ C1. `cliques` should hold every Delsarte
/// clique of `g`; the pair must meet in the largest intersection among them.
pub fn theta1_from_clique_pair(
    g: &PolarGraph,
    params: &SrgParams,
    cliques: &[CliqueInfo],
    c0: &CliqueInfo,
    c1: &CliqueInfo,
) -> Result<Eigenfunction, EigenError> {
    let s = spectrum(params)?;
    let c0 = clique_info(g, &c0.vertices, params, &s);
    let c1 = clique_info(g, &c1.vertices, params, &s);
    if !c0.is_delsarte || !c1.is_delsarte {
        return Err(EigenError::NotDelsarte);
    }
    let (a, b) = max_intersecting_delsarte_pair(cliques)?;
    let expected = a.intersection(&b).len();
    let common = c0.intersection(&c1);
    if c0 == c1 || common.len() < expected {
        return Err(EigenError::NotMaxIntersection {
            found: common.len(),
            expected,
        });
    }
    let minus = |c: &CliqueInfo| -> Vec<usize> {
        c.vertices
            .iter()
            .copied()
            .filter(|v| common.binary_search(v).is_err())
            .collect()
    };
    Eigenfunction::signed_indicator(
        &minus(&c0),
        &minus(&c1),
        s.theta1,
        Some(g.provenance().clone()),
    )
}

fn check_affine(g: &PolarGraph, space: &PolarSpace, family: Family) -> Result<(), EigenError> {
    let p = g.provenance();
    let d = space.descriptor();
    if p.kind != GraphKind::Affine
        || p.family != Some(family)
        || d.family != family
        || p.dim != d.dim
        || p.q != d.q
        || p.modulus != space.field().modulus()
    {
        return Err(EigenError::GraphMismatch {
            expected: space.label(),
            found: g.label().to_string(),
        });
    }
    Ok(())
}

fn vertex_of(g: &PolarGraph, v: &Vector) -> usize {
    g.index_of(v).expect("every vector is a vertex of an affine graph")
}

/// +1 on v + Aff*(M∖L), −1 on v + Aff*(N∖L) in VO+(2m, q).
pub fn theta1_hyperbolic(
    g: &PolarGraph,
    space: &PolarSpace,
    v: &Vector,
    l: &SingularSubspace,
    m: &SingularSubspace,
    n: &SingularSubspace,
) -> Result<Eigenfunction, EigenError> {
    check_affine(g, space, Family::Hyperbolic)?;
    check_sigma(space, l, m, n)?;
    let f = space.field();
    let lift = |s: &SingularSubspace| -> Vec<usize> {
        let mut out: Vec<usize> = s
            .difference(l)
            .into_iter()
            .flat_map(|p| {
                let rep = &space.points()[p].rep;
                f.nonzero_elements()
                    .map(|c| vertex_of(g, &v.add(f, &rep.scale(f, c))))
                    .collect::<Vec<_>>()
            })
            .collect();
        out.sort_unstable();
        out
    };
    let q = f.order() as i64;
    let rank = space.rank() as u32;
    let theta1 = q.pow(rank) - q.pow(rank - 1) - 1;
    Eigenfunction::signed_indicator(&lift(m), &lift(n), theta1, Some(g.provenance().clone()))
}

/// The lexicographically least t in Aff(M)^⊥ ∖ Aff(M).
pub fn least_valid_t(space: &PolarSpace, m: &SingularSubspace) -> Option<Vector> {
    let f = space.field();
    let perp = space.form().perp_subspace(m.subspace());
    perp.elements(f)
        .into_iter()
        .find(|t| !m.subspace().contains(f, t))
}

/// +1 on v + Aff(M), −1 on t + v + Aff(M) in VO−(2m, q), for M maximal and
/// t ∈ Aff(M)^⊥ ∖ Aff(M).
pub fn theta1_elliptic(
    g: &PolarGraph,
    space: &PolarSpace,
    v: &Vector,
    m: &SingularSubspace,
    t: &Vector,
) -> Result<Eigenfunction, EigenError> {
    check_affine(g, space, Family::Elliptic)?;
    let expected = space.rank() as isize - 1;
    if m.proj_dim() != expected {
        return Err(EigenError::WrongDimension {
            expected,
            actual: m.proj_dim(),
        });
    }
    let f = space.field();
    let u = m.subspace();
    if !space.form().perp_subspace(u).contains(f, t) {
        return Err(EigenError::TNotInPerp);
    }
    if u.contains(f, t) {
        return Err(EigenError::TInAffM);
    }
    let elems = u.elements(f);
    let shift = |by: &Vector| -> Vec<usize> {
        let mut out: Vec<usize> = elems.iter().map(|x| vertex_of(g, &by.add(f, x))).collect();
        out.sort_unstable();
        out
    };
    let q = f.order() as i64;
    let theta1 = q.pow(space.rank() as u32) - 1;
    Eigenfunction::signed_indicator(
        &shift(v),
        &shift(&t.add(f, v)),
        theta1,
        Some(g.provenance().clone()),
    )
}

/// T0 = {[(1, sγ, 0, 0)]} and T1 = {[(0, 0, 1, sγ)]} over γ with γ^(√q+1) = 1, where
/// s = 1 for even q and s = β^((√q−1)/2) for odd q. `beta` defaults to the least
/// primitive element.
pub fn unitary_pair(
    field: &Arc<FieldContext>,
    beta: Option<Elem>,
) -> Result<(Vec<Vector>, Vec<Vector>), EigenError> {
    let norm_one = field.norm_one_subgroup()?;
    let s = if field.characteristic() == 2 {
        Elem::ONE
    } else {
        field.epsilon_unit_for(beta.unwrap_or_else(|| field.primitive_element()))?
    };
    let (z, one) = (Elem::ZERO, Elem::ONE);
    let mut t0: Vec<Vector> = Vec::new();
    let mut t1: Vec<Vector> = Vec::new();
    for &g in &norm_one.elements {
        let x = field.mul(s, g);
        t0.push(Vector(vec![one, x, z, z]));
        t1.push(Vector(vec![z, z, one, x]));
    }
    t0.sort();
    t1.sort();
    Ok((t0, t1))
}

/// The θ2 = −(√q+1) eigenfunction of U(4, q): +1 on T0, −1 on T1.
pub fn theta2_unitary(g: &PolarGraph, beta: Option<Elem>) -> Result<Eigenfunction, EigenError> {
    let p = g.provenance();
    let field = match (p.family, g.field()) {
        (Some(Family::Unitary), Some(f)) if p.dim == 4 => f.clone(),
        _ => {
            return Err(EigenError::GraphMismatch {
                expected: "U(4,q)".into(),
                found: g.label().to_string(),
            })
        }
    };
    let (t0, t1) = unitary_pair(&field, beta)?;
    let index = |vs: &[Vector]| -> Result<Vec<usize>, EigenError> {
        vs.iter()
            .map(|v| {
                g.index_of(v)
                    .ok_or_else(|| EigenError::Format(format!("{v:?} is not an isotropic point")))
            })
            .collect()
    };
    let r = field.sqrt_order().expect("unitary field has square order") as i64;
    Eigenfunction::signed_indicator(&index(&t0)?, &index(&t1)?, -(r + 1), Some(p.clone()))
}

/// Histogram of (|N(u) ∩ T0|, |N(u) ∩ T1|) over vertices u outside T0 ∪ T1.
pub fn neighbour_dichotomy(
    g: &PolarGraph,
    t0: &[usize],
    t1: &[usize],
) -> BTreeMap<(usize, usize), usize> {
    let (b0, b1) = (g.bitset(t0), g.bitset(t1));
    let mut hist = BTreeMap::new();
    for u in (0..g.order()).filter(|&u| !b0.contains(u) && !b1.contains(u)) {
        *hist
            .entry((g.neighbours_in(u, &b0), g.neighbours_in(u, &b1)))
            .or_insert(0) += 1;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::verify_eigenfunction;
    use crate::forms::standard_form;
    use crate::graph::{
        affine_polar_graph, collinearity_graph, delsarte_cliques, srg_check, unitary_graph,
    };

    fn gf(q: u64) -> Arc<FieldContext> {
        FieldContext::from_order(q).unwrap()
    }

    fn space(family: Family, dim: usize, q: u64) -> PolarSpace {
        PolarSpace::new(standard_form(family, dim, gf(q)).unwrap()).unwrap()
    }

    fn check(g: &PolarGraph, f: &Eigenfunction) -> (usize, bool) {
        let p = srg_check(g).unwrap();
        let r = verify_eigenfunction(g, &p, f).unwrap();
        (r.support_size, r.tight)
    }

    #[test]
    fn polar_constructions() {
        for (family, q, support) in [
            (Family::Symplectic, 2, 4),
            (Family::Hyperbolic, 3, 6),
            (Family::Unitary, 9, 18),
        ] {
            let s = space(family, 4, q);
            let g = collinearity_graph(&s).unwrap();
            let (l, m, n) = default_polar_witness(&s).unwrap();
            let f = theta1_polar(&s, &l, &m, &n).unwrap();
            assert_eq!(check(&g, &f), (support, true), "{}", s.label());
        }
    }

    #[test]
    fn polar_witness_errors() {
        let s = space(Family::Symplectic, 4, 2);
        let (l, m, _) = default_polar_witness(&s).unwrap();
        assert!(matches!(
            theta1_polar(&s, &l, &m, &m),
            Err(EigenError::NotInSigmaL)
        ));
        assert!(matches!(
            theta1_polar(&s, &m, &m, &m),
            Err(EigenError::WrongDimension { .. })
        ));
    }

    #[test]
    fn clique_pair_matches_polar() {
        let s = space(Family::Symplectic, 4, 2);
        let g = collinearity_graph(&s).unwrap();
        let p = srg_check(&g).unwrap();
        let cliques = delsarte_cliques(&g, &p, &spectrum(&p).unwrap());
        let (c0, c1) = max_intersecting_delsarte_pair(&cliques).unwrap();
        let f = theta1_from_clique_pair(&g, &p, &cliques, &c0, &c1).unwrap();
        let l = s.meet(
            &s.span_closure(&[&c0.vertices]).unwrap(),
            &s.span_closure(&[&c1.vertices]).unwrap(),
        );
        let m = s.span_closure(&[&c0.vertices]).unwrap();
        let n = s.span_closure(&[&c1.vertices]).unwrap();
        assert_eq!(f, theta1_polar(&s, &l, &m, &n).unwrap());
        // two disjoint lines do not meet maximally
        let disjoint = cliques
            .iter()
            .find(|c| c.intersection(&cliques[0]).is_empty())
            .unwrap();
        assert!(matches!(
            theta1_from_clique_pair(&g, &p, &cliques, &cliques[0], disjoint),
            Err(EigenError::NotMaxIntersection { found: 0, expected: 1 })
        ));
    }

    #[test]
    fn hyperbolic_construction() {
        for (q, support) in [(2, 4), (3, 12)] {
            let s = space(Family::Hyperbolic, 4, q);
            let g = affine_polar_graph(2, 1, gf(q)).unwrap();
            let (l, m, n) = default_polar_witness(&s).unwrap();
            let f = theta1_hyperbolic(&g, &s, &Vector::zero(4), &l, &m, &n).unwrap();
            assert_eq!(check(&g, &f), (support, true));
        }
        let s = space(Family::Hyperbolic, 4, 2);
        let g = affine_polar_graph(2, 1, gf(2)).unwrap();
        let (l, m, n) = default_polar_witness(&s).unwrap();
        let ones = Vector(vec![Elem::ONE; 4]);
        let f = theta1_hyperbolic(&g, &s, &ones, &l, &m, &n).unwrap();
        assert_eq!(check(&g, &f), (4, true));
    }

    #[test]
    fn elliptic_construction() {
        for (q, support) in [(2, 4), (3, 6)] {
            let s = space(Family::Elliptic, 4, q);
            let g = affine_polar_graph(2, -1, gf(q)).unwrap();
            let m = &s.maximals()[0];
            let t = least_valid_t(&s, m).unwrap();
            let f = theta1_elliptic(&g, &s, &Vector::zero(4), m, &t).unwrap();
            assert_eq!(check(&g, &f), (support, true));
            let inside = m.basis()[0].clone();
            assert!(matches!(
                theta1_elliptic(&g, &s, &Vector::zero(4), m, &inside),
                Err(EigenError::TInAffM)
            ));
        }
    }

    #[test]
    fn unitary_constructions() {
        for (q, support, zero, one) in [(4, 6, 12, 27), (9, 8, 144, 128)] {
            let g = unitary_graph(gf(q)).unwrap();
            let f = theta2_unitary(&g, None).unwrap();
            assert_eq!(check(&g, &f), (support, true));
            let (t0, t1) = f.parts();
            let hist = neighbour_dichotomy(&g, &t0, &t1);
            assert!(hist.keys().all(|k| *k == (0, 0) || *k == (1, 1)));
            // for odd q the (0, 0) case does occur, e.g. [(1, 0, 1, 1)] at q = 9
            assert_eq!(hist, BTreeMap::from([((0, 0), zero), ((1, 1), one)]));
            assert!(t0
                .iter()
                .all(|&a| t1.iter().all(|&b| g.adjacent(a, b))));
        }
    }

    #[test]
    fn unitary_pair_is_beta_independent_at_q9() {
        let f = gf(9);
        let reference = unitary_pair(&f, None).unwrap();
        for beta in f.primitive_elements() {
            assert_eq!(unitary_pair(&f, Some(beta)).unwrap(), reference);
        }
    }
}
