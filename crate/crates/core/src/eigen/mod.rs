//! Eigenfunctions of strongly regular graphs, the weight-distribution bound,
//! and the minimum-support constructions.

mod constructions;
mod io;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::FormError;
use crate::gf::GfError;
use crate::graph::{spectrum, GraphError, PolarGraph, Provenance, SrgParams};
use crate::polar::PolarError;

pub use constructions::{
    default_polar_witness, least_valid_t, neighbour_dichotomy, theta1_elliptic,
    theta1_from_clique_pair, theta1_hyperbolic, theta1_polar, theta2_unitary, unitary_pair,
};
pub use io::EigenfunctionFile;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("not a {theta}-eigenfunction: at vertex {vertex}, theta*f = {lhs} but the neighbour sum is {rhs}")]
    NotAnEigenfunction {
        vertex: usize,
        theta: i64,
        lhs: String,
        rhs: String,
    },
    #[error("the function is identically zero")]
    ZeroFunction,
    #[error("{theta} is not a non-principal eigenvalue (theta1 = {theta1}, theta2 = {theta2})")]
    NotNonPrincipal { theta: i64, theta1: i64, theta2: i64 },
    #[error("vertex {vertex} out of range for a graph on {order} vertices")]
    VertexOutOfRange { vertex: usize, order: usize },
    #[error("function belongs to {expected}, not {found}")]
    GraphMismatch { expected: String, found: String },
    #[error("expected a subspace of projective dimension {expected}, got {actual}")]
    WrongDimension { expected: isize, actual: isize },
    #[error("subspace is not a maximal containing L, or M = N")]
    NotInSigmaL,
    #[error("clique is not a Delsarte clique")]
    NotDelsarte,
    #[error("cliques meet in {found} vertices, the maximum is {expected}")]
    NotMaxIntersection { found: usize, expected: usize },
    #[error("t is not in the perp of Aff(M)")]
    TNotInPerp,
    #[error("t lies in Aff(M)")]
    TInAffM,
    #[error("malformed eigenfunction: {0}")]
    Format(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// A nonzero function on the vertices with a declared eigenvalue. Only nonzero
/// values are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eigenfunction {
    values: BTreeMap<usize, BigRational>,
    theta: i64,
    provenance: Option<Provenance>,
}

impl Eigenfunction {
    pub fn new(
        values: BTreeMap<usize, BigRational>,
        theta: i64,
        provenance: Option<Provenance>,
    ) -> Result<Self, EigenError> {
        let values: BTreeMap<_, _> = values.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        if values.is_empty() {
            return Err(EigenError::ZeroFunction);
        }
        Ok(Eigenfunction {
            values,
            theta,
            provenance,
        })
    }

    /// +1 on `plus`, −1 on `minus`.
    pub fn signed_indicator(
        plus: &[usize],
        minus: &[usize],
        theta: i64,
        provenance: Option<Provenance>,
    ) -> Result<Self, EigenError> {
        let one = BigRational::from_integer(BigInt::from(1));
        let mut values = BTreeMap::new();
        for &v in plus {
            values.insert(v, one.clone());
        }
        for &v in minus {
            if values.insert(v, -one.clone()).is_some() {
                return Err(EigenError::Format(format!("vertex {v} is in both parts")));
            }
        }
        Self::new(values, theta, provenance)
    }

    pub fn theta(&self) -> i64 {
        self.theta
    }

    pub fn with_theta(&self, theta: i64) -> Self {
        Eigenfunction {
            theta,
            ..self.clone()
        }
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn values(&self) -> &BTreeMap<usize, BigRational> {
        &self.values
    }

    pub fn value(&self, v: usize) -> BigRational {
        self.values.get(&v).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Sorted support.
    pub fn support(&self) -> Vec<usize> {
        self.values.keys().copied().collect()
    }

    pub fn support_size(&self) -> usize {
        self.values.len()
    }

    /// Vertices with positive and negative values.
    pub fn parts(&self) -> (Vec<usize>, Vec<usize>) {
        let pos = self.values.iter().filter(|(_, x)| x.is_positive()).map(|(&v, _)| v);
        let neg = self.values.iter().filter(|(_, x)| x.is_negative()).map(|(&v, _)| v);
        (pos.collect(), neg.collect())
    }

    /// c·f for nonzero c.
    pub fn scaled(&self, c: &BigRational) -> Result<Self, EigenError> {
        if c.is_zero() {
            return Err(EigenError::ZeroFunction);
        }
        Ok(Eigenfunction {
            values: self.values.iter().map(|(&v, x)| (v, x * c)).collect(),
            theta: self.theta,
            provenance: self.provenance.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WdbReport {
    pub theta: i64,
    /// None for the principal eigenvalue k.
    pub bound: Option<u64>,
    pub support_size: usize,
    pub tight: bool,
}

/// 1 + |θ| + |((θ − λ)θ − k)/μ| for θ ∈ {θ1, θ2}. Checked against 2(θ1 + 1) and −2θ2.
pub fn wdb(theta: i64, params: &SrgParams) -> Result<u64, EigenError> {
    let s = spectrum(params)?;
    if theta != s.theta1 && theta != s.theta2 {
        return Err(EigenError::NotNonPrincipal {
            theta,
            theta1: s.theta1,
            theta2: s.theta2,
        });
    }
    let t = BigInt::from(theta);
    let third = BigRational::new(
        (&t - BigInt::from(params.lambda)) * &t - BigInt::from(params.k),
        BigInt::from(params.mu),
    );
    let bound = BigRational::from_integer(BigInt::from(1) + t.abs()) + third.abs();
    let expected = if theta == s.theta1 {
        2 * (s.theta1 + 1)
    } else {
        -2 * s.theta2
    };
    assert_eq!(
        bound,
        BigRational::from_integer(BigInt::from(expected)),
        "weight-distribution bound for {params:?} at {theta}"
    );
    Ok(expected as u64)
}

/// Checks θ·f(γ) = Σ_{δ ~ γ} f(δ) at every vertex and reports the support against the bound.
/// The least violating vertex is reported.
pub fn verify_eigenfunction(
    g: &PolarGraph,
    params: &SrgParams,
    f: &Eigenfunction,
) -> Result<WdbReport, EigenError> {
    if let Some(p) = f.provenance() {
        if p != g.provenance() {
            return Err(EigenError::GraphMismatch {
                expected: p.label.clone(),
                found: g.label().to_string(),
            });
        }
    }
    let n = g.order();
    if let Some((&vertex, _)) = f.values.range(n..).next() {
        return Err(EigenError::VertexOutOfRange { vertex, order: n });
    }
    let theta = BigRational::from_integer(BigInt::from(f.theta));
    let entries: Vec<(usize, &BigRational)> = f.values.iter().map(|(&v, x)| (v, x)).collect();
    let violation = (0..n).into_par_iter().find_map_first(|v| {
        let lhs = &theta * f.value(v);
        let rhs = entries
            .iter()
            .filter(|(u, _)| g.adjacent(v, *u))
            .fold(BigRational::zero(), |acc, (_, x)| acc + *x);
        (lhs != rhs).then(|| EigenError::NotAnEigenfunction {
            vertex: v,
            theta: f.theta,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        })
    });
    if let Some(e) = violation {
        return Err(e);
    }
    let bound = if f.theta == params.k as i64 {
        None
    } else {
        Some(wdb(f.theta, params)?)
    };
    let support_size = f.support_size();
    Ok(WdbReport {
        theta: f.theta,
        bound,
        support_size,
        tight: bound == Some(support_size as u64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{standard_form, Family};
    use crate::gf::FieldContext;
    use crate::graph::{collinearity_graph, srg_check};
    use crate::polar::PolarSpace;

    fn sp42() -> (PolarSpace, PolarGraph, SrgParams) {
        let f = FieldContext::from_order(2).unwrap();
        let s = PolarSpace::new(standard_form(Family::Symplectic, 4, f).unwrap()).unwrap();
        let g = collinearity_graph(&s).unwrap();
        let p = srg_check(&g).unwrap();
        (s, g, p)
    }

    #[test]
    fn wdb_examples() {
        assert_eq!(wdb(1, &SrgParams::new(15, 6, 1, 3)).unwrap(), 4);
        assert_eq!(wdb(-3, &SrgParams::new(15, 6, 1, 3)).unwrap(), 6);
        assert_eq!(wdb(-3, &SrgParams::new(45, 12, 3, 3)).unwrap(), 6);
        assert_eq!(wdb(1, &SrgParams::new(16, 5, 0, 2)).unwrap(), 4);
        assert!(matches!(
            wdb(2, &SrgParams::new(15, 6, 1, 3)),
            Err(EigenError::NotNonPrincipal { .. })
        ));
    }

    #[test]
    fn all_ones_is_principal() {
        let (_, g, p) = sp42();
        let ones: Vec<usize> = (0..g.order()).collect();
        let f = Eigenfunction::signed_indicator(&ones, &[], 6, None).unwrap();
        let r = verify_eigenfunction(&g, &p, &f).unwrap();
        assert_eq!(r.bound, None);
        assert!(!r.tight);
    }

    #[test]
    fn delta_function_and_wrong_theta() {
        let (s, g, p) = sp42();
        let (l, m, n) = default_polar_witness(&s).unwrap();
        let f = theta1_polar(&s, &l, &m, &n).unwrap();
        let r = verify_eigenfunction(&g, &p, &f).unwrap();
        assert_eq!((r.support_size, r.bound, r.tight), (4, Some(4), true));
        let err = verify_eigenfunction(&g, &p, &f.with_theta(2)).unwrap_err();
        assert!(matches!(err, EigenError::NotAnEigenfunction { .. }));
    }

    #[test]
    fn least_violating_vertex_is_reported() {
        let (_, g, p) = sp42();
        // a single spike at the last vertex fails first at its least neighbour
        let last = g.order() - 1;
        let f = Eigenfunction::signed_indicator(&[last], &[], 1, None).unwrap();
        let first_neighbour = g.neighbors(last).ones().next().unwrap();
        match verify_eigenfunction(&g, &p, &f) {
            Err(EigenError::NotAnEigenfunction { vertex, .. }) => {
                assert_eq!(vertex, first_neighbour.min(last))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_and_out_of_range() {
        assert!(matches!(
            Eigenfunction::new(BTreeMap::new(), 1, None),
            Err(EigenError::ZeroFunction)
        ));
        let (_, g, p) = sp42();
        let f = Eigenfunction::signed_indicator(&[99], &[], 1, None).unwrap();
        assert!(matches!(
            verify_eigenfunction(&g, &p, &f),
            Err(EigenError::VertexOutOfRange { vertex: 99, .. })
        ));
        assert!(f.scaled(&BigRational::zero()).is_err());
    }
}
