//! Polar, affine polar and unitary graphs with dense bitset adjacency.

mod cliques;
mod export;
mod srg;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{standard_form, Family, Form, FormError};
use crate::gf::{FieldContext, GfError};
use crate::linalg::{all_vectors, projective_points, Vector};
use crate::polar::{PolarError, PolarSpace};

pub use cliques::{
    clique_info, delsarte_cliques, enumerate_cliques, max_intersecting_delsarte_pair,
    maximal_cliques, CliqueInfo,
};
pub use export::{edge_list, graph6, GraphJson};
pub use srg::{
    affine_closed_form, affine_delsarte_size_formula, affine_literal_labels, det_vanishes,
    modular_nullity, polar_closed_form, spectrum, srg_check, SpectrumInfo, SrgParams,
};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("collinearity graph needs rank at least 2, {label} has rank {rank}")]
    RankTooLow { label: String, rank: usize },
    #[error("vertex {vertex} has degree {degree}, vertex 0 has degree {expected}")]
    NotRegular {
        vertex: usize,
        degree: usize,
        expected: usize,
    },
    #[error(
        "vertices {u} and {v} ({relation}) have {common} common neighbours, expected {expected}"
    )]
    NotStronglyRegular {
        u: usize,
        v: usize,
        relation: &'static str,
        common: usize,
        expected: usize,
    },
    #[error("graph or its complement is disconnected")]
    Imprimitive,
    #[error("eigenvalues of {0:?} are irrational")]
    IrrationalEigenvalues(SrgParams),
    #[error("parameters {0:?} give non-integral multiplicities")]
    InfeasibleMultiplicities(SrgParams),
    #[error("fewer than two Delsarte cliques")]
    FewerThanTwoCliques,
    #[error("graph would have {vertices} vertices, above the cap of {cap}")]
    CapExceeded { vertices: usize, cap: usize },
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Field(#[from] GfError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    /// Γ(Π) on the points of a polar space.
    Collinearity,
    /// VO^ε(2m, q) on all vectors.
    Affine,
    /// Built from an explicit edge list.
    Custom,
}

/// Where a graph came from. `param` is the rank n for collinearity graphs and
/// m for affine graphs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: GraphKind,
    pub family: Option<Family>,
    pub label: String,
    pub q: u32,
    pub dim: usize,
    pub param: usize,
    pub order: Option<(u32, u32)>,
    pub modulus: Vec<u32>,
}

impl Provenance {
    /// Provenance of the collinearity graph of `space`.
    pub fn of_space(space: &PolarSpace) -> Self {
        let d = space.descriptor();
        Provenance {
            kind: GraphKind::Collinearity,
            family: Some(d.family),
            label: space.label(),
            q: d.q,
            dim: d.dim,
            param: d.rank,
            order: Some(d.order),
            modulus: space.field().modulus().to_vec(),
        }
    }

    /// Short identifier usable in file names, e.g. `sp_4_2` or `vo-_4_3`.
    pub fn slug(&self) -> String {
        match (self.kind, self.family) {
            (GraphKind::Affine, Some(fam)) => {
                format!("vo{}_{}_{}", &fam.short_name()[1..], self.dim, self.q)
            }
            (_, Some(fam)) => format!("{}_{}_{}", fam.short_name(), self.dim, self.q),
            _ => self.label.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PolarGraph {
    provenance: Provenance,
    field: Option<Arc<FieldContext>>,
    vertices: Vec<Vector>,
    index: HashMap<Vector, usize>,
    adjacency: Vec<FixedBitSet>,
}

impl PolarGraph {
    /// A graph on `0..n` with the given edges.
    pub fn from_edges(label: &str, n: usize, edges: &[(usize, usize)]) -> PolarGraph {
        let mut adjacency = vec![FixedBitSet::with_capacity(n); n];
        for &(u, v) in edges {
            if u != v {
                adjacency[u].insert(v);
                adjacency[v].insert(u);
            }
        }
        PolarGraph {
            provenance: Provenance {
                kind: GraphKind::Custom,
                family: None,
                label: label.to_string(),
                q: 0,
                dim: 0,
                param: 0,
                order: None,
                modulus: Vec::new(),
            },
            field: None,
            vertices: Vec::new(),
            index: HashMap::new(),
            adjacency,
        }
    }

    fn new(
        provenance: Provenance,
        field: Arc<FieldContext>,
        vertices: Vec<Vector>,
        adjacency: Vec<FixedBitSet>,
    ) -> PolarGraph {
        let index = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        PolarGraph {
            provenance,
            field: Some(field),
            vertices,
            index,
            adjacency,
        }
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn label(&self) -> &str {
        &self.provenance.label
    }

    pub fn field(&self) -> Option<&Arc<FieldContext>> {
        self.field.as_ref()
    }

    pub fn order(&self) -> usize {
        self.adjacency.len()
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vector {
        &self.vertices[i]
    }

    /// Index of a vertex given by its vector (normalized first for point graphs).
    pub fn index_of(&self, v: &Vector) -> Option<usize> {
        match (self.provenance.kind, &self.field) {
            (GraphKind::Collinearity, Some(f)) => self.index.get(&v.normalized(f)?).copied(),
            _ => self.index.get(v).copied(),
        }
    }

    pub fn neighbors(&self, v: usize) -> &FixedBitSet {
        &self.adjacency[v]
    }

    pub fn adjacency(&self) -> &[FixedBitSet] {
        &self.adjacency
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].count_ones(..)
    }

    /// Number of neighbours of `v` inside `set`.
    pub fn neighbours_in(&self, v: usize, set: &FixedBitSet) -> usize {
        self.adjacency[v].intersection_count(set)
    }

    pub fn edge_count(&self) -> usize {
        (0..self.order()).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    /// Bitset over the vertices containing `set`.
    pub fn bitset(&self, set: &[usize]) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(self.order());
        for &v in set {
            b.insert(v);
        }
        b
    }
}

impl fmt::Display for PolarGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} vertices)", self.provenance.label, self.order())
    }
}

/// Γ(Π): points of the space, adjacent iff distinct and collinear.
pub fn collinearity_graph(space: &PolarSpace) -> Result<PolarGraph, GraphError> {
    if space.rank() < 2 {
        return Err(GraphError::RankTooLow {
            label: space.label(),
            rank: space.rank(),
        });
    }
    let adjacency: Vec<FixedBitSet> = space
        .orthogonality_rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.set(i, false);
            r
        })
        .collect();
    let provenance = Provenance::of_space(space);
    let form = space.form();
    let vertices = space.points().iter().map(|p| p.rep.clone()).collect();
    Ok(PolarGraph::new(provenance, form.field().clone(), vertices, adjacency))
}

/// VO^ε(2m, q): all vectors, x ~ y iff x ≠ y and Q(x − y) = 0.
pub fn affine_polar_graph(
    m: usize,
    epsilon: i8,
    field: Arc<FieldContext>,
) -> Result<PolarGraph, GraphError> {
    let family = if epsilon >= 0 {
        Family::Hyperbolic
    } else {
        Family::Elliptic
    };
    let form = standard_form(family, 2 * m, field.clone())?;
    affine_graph_of(&form, m)
}

fn affine_graph_of(form: &Form, m: usize) -> Result<PolarGraph, GraphError> {
    let f = form.field().clone();
    let q = f.order();
    let dim = form.dim();
    let vertices: Vec<Vector> = all_vectors(&f, dim).collect();
    let n = vertices.len();
    let singular: Vec<bool> = vertices
        .iter()
        .map(|v| !v.is_zero() && form.q_unchecked(v).is_zero())
        .collect();
    let sub_table: Vec<Vec<u32>> = f
        .elements()
        .map(|a| f.elements().map(|b| f.sub(a, b).code()).collect())
        .collect();
    let adjacency: Vec<FixedBitSet> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = &vertices[i];
            let mut row = FixedBitSet::with_capacity(n);
            for (j, y) in vertices.iter().enumerate() {
                let diff = x.0.iter().zip(&y.0).fold(0usize, |acc, (a, b)| {
                    acc * q as usize + sub_table[a.code() as usize][b.code() as usize] as usize
                });
                if singular[diff] {
                    row.insert(j);
                }
            }
            row
        })
        .collect();
    let provenance = Provenance {
        kind: GraphKind::Affine,
        family: Some(form.family()),
        label: format!("VO{}({},{})", &form.family().symbol()[1..], dim, q),
        q,
        dim,
        param: m,
        order: None,
        modulus: f.modulus().to_vec(),
    };
    Ok(PolarGraph::new(provenance, f, vertices, adjacency))
}

/// U(4, q): isotropic points of the Hermitian form Σ u_i v_i^√q, adjacent iff orthogonal.
/// Built directly from the form, without enumerating lines.
pub fn unitary_graph(field: Arc<FieldContext>) -> Result<PolarGraph, GraphError> {
    let form = standard_form(Family::Unitary, 4, field.clone())?;
    let reps: Vec<Vector> = projective_points(&field, 4)
        .into_iter()
        .filter(|v| form.is_singular_vector(v))
        .collect();
    let conj: Vec<Vector> = reps.iter().map(|v| form.functional(v)).collect();
    let n = reps.len();
    let adjacency: Vec<FixedBitSet> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = FixedBitSet::with_capacity(n);
            for (j, u) in reps.iter().enumerate() {
                if i != j && u.dot(&field, &conj[i]).is_zero() {
                    row.insert(j);
                }
            }
            row
        })
        .collect();
    let r = field.sqrt_order().expect("checked by standard_form");
    let provenance = Provenance {
        kind: GraphKind::Collinearity,
        family: Some(Family::Unitary),
        label: form.label(),
        q: field.order(),
        dim: 4,
        param: 2,
        order: Some((field.order(), r)),
        modulus: field.modulus().to_vec(),
    };
    Ok(PolarGraph::new(provenance, field, reps, adjacency))
}
