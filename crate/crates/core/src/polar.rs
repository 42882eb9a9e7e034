//! Points and singular subspaces of an embedded polar space.
//!
//! Singular subspaces are enumerated by breadth-first closure: every
//! `d`-dimensional subspace is extended by each point orthogonal to all of it,
//! canonicalized, and deduplicated. Output is sorted, so the result does not
//! depend on how the frontier is split across worker threads.

use std::collections::HashMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::{Cache, CacheError};
use crate::forms::{Family, Form};
use crate::gf::FieldContext;
use crate::linalg::{projective_points, Subspace, Vector};

#[derive(Debug, Error)]
pub enum PolarError {
    #[error("projective dimension {requested} out of range for a rank-{rank} space")]
    DimensionOutOfRange { requested: isize, rank: usize },
    #[error("order is not well defined: {0}")]
    OrderNotWellDefined(String),
    #[error("subspace is not totally singular")]
    NotSingular,
    #[error("expected a subspace of projective dimension {expected}, got {actual}")]
    WrongDimension { expected: isize, actual: isize },
    #[error("points are not pairwise collinear")]
    NotPairwiseCollinear,
    #[error("the form has no singular points")]
    NoSingularPoints,
    #[error("point index {0} out of range")]
    BadPointIndex(usize),
    #[error(transparent)]
    Cache(#[from] CacheError),
}

/// A singular projective point; `rep` has first nonzero coordinate 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjectivePoint {
    pub rep: Vector,
    pub index: usize,
}

/// A totally singular subspace with the sorted indices of its points.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SingularSubspace {
    subspace: Subspace,
    points: Vec<usize>,
}

impl SingularSubspace {
    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn basis(&self) -> &[Vector] {
        self.subspace.basis()
    }

    pub fn proj_dim(&self) -> isize {
        self.subspace.proj_dim()
    }

    /// Sorted point indices.
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn contains_point(&self, p: usize) -> bool {
        self.points.binary_search(&p).is_ok()
    }

    pub fn contains(&self, other: &SingularSubspace) -> bool {
        other.points.iter().all(|&p| self.contains_point(p))
    }

    /// Points of `self` not in `other`, sorted.
    pub fn difference(&self, other: &SingularSubspace) -> Vec<usize> {
        self.points
            .iter()
            .copied()
            .filter(|&p| !other.contains_point(p))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarSpaceDescriptor {
    pub family: Family,
    pub dim: usize,
    pub q: u32,
    pub rank: usize,
    /// The order pair (q, t).
    pub order: (u32, u32),
    /// Table parameter e as `[numerator, denominator]`.
    pub parameter_e: (u32, u32),
    pub point_count: usize,
    pub maximal_count: usize,
}

impl PolarSpaceDescriptor {
    pub fn t(&self) -> u32 {
        self.order.1
    }
}

/// The parameter e of the family, as a fraction.
pub fn parameter_e(family: Family, dim: usize) -> (u32, u32) {
    match family {
        Family::Symplectic | Family::Parabolic => (1, 1),
        Family::Hyperbolic => (0, 1),
        Family::Elliptic => (2, 1),
        Family::Unitary if dim.is_multiple_of(2) => (1, 2),
        Family::Unitary => (3, 2),
    }
}

/// The t of the order (q, t) listed for the family.
pub fn expected_t(family: Family, dim: usize, q: u32) -> Option<u32> {
    match family {
        Family::Symplectic | Family::Parabolic => Some(q),
        Family::Hyperbolic => Some(1),
        Family::Elliptic => Some(q * q),
        Family::Unitary => {
            let r = (q as f64).sqrt().round() as u32;
            (r * r == q).then(|| if dim.is_multiple_of(2) { r } else { q * r })
        }
    }
}

#[derive(Debug)]
pub struct PolarSpace {
    form: Form,
    points: Vec<ProjectivePoint>,
    index: HashMap<Vector, usize>,
    orthogonal: Vec<FixedBitSet>,
    empty: SingularSubspace,
    /// `levels[d]` holds the singular subspaces of projective dimension `d`.
    levels: Vec<Vec<SingularSubspace>>,
    descriptor: PolarSpaceDescriptor,
}

impl PolarSpace {
    pub fn new(form: Form) -> Result<Self, PolarError> {
        Self::build(form, None)
    }

    /// Builds the space, reading and writing the subspace cache when one is given.
    pub fn build(form: Form, cache: Option<&Cache>) -> Result<Self, PolarError> {
        let f = form.field().clone();
        let reps: Vec<Vector> = projective_points(&f, form.dim())
            .into_iter()
            .filter(|v| form.is_singular_vector(v))
            .collect();
        if reps.is_empty() {
            return Err(PolarError::NoSingularPoints);
        }
        let index: HashMap<Vector, usize> =
            reps.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let functionals: Vec<Vector> = reps.iter().map(|v| form.functional(v)).collect();
        let n = reps.len();
        let orthogonal: Vec<FixedBitSet> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = FixedBitSet::with_capacity(n);
                for (j, rep) in reps.iter().enumerate() {
                    if rep.dot(&f, &functionals[i]).is_zero() {
                        row.insert(j);
                    }
                }
                row
            })
            .collect();
        let points = reps
            .into_iter()
            .enumerate()
            .map(|(index, rep)| ProjectivePoint { rep, index })
            .collect();

        let mut space = PolarSpace {
            empty: SingularSubspace {
                subspace: Subspace::zero(form.dim()),
                points: Vec::new(),
            },
            form,
            points,
            index,
            orthogonal,
            levels: Vec::new(),
            descriptor: PolarSpaceDescriptor {
                family: Family::Symplectic,
                dim: 0,
                q: 0,
                rank: 0,
                order: (0, 0),
                parameter_e: (0, 1),
                point_count: 0,
                maximal_count: 0,
            },
        };

        let cached = match cache {
            Some(c) => c.load_subspaces(&space.form)?,
            None => None,
        };
        match cached {
            Some(bases) => space.levels = space.levels_from_bases(bases)?,
            None => space.enumerate_levels(),
        }
        space.descriptor = space.compute_descriptor()?;
        if let Some(c) = cache {
            c.store_subspaces(&space)?;
        }
        Ok(space)
    }

    fn enumerate_levels(&mut self) {
        let f = self.form.field().clone();
        let mut frontier: Vec<SingularSubspace> = self
            .points
            .iter()
            .map(|p| SingularSubspace {
                subspace: Subspace::span(&f, self.form.dim(), std::slice::from_ref(&p.rep)),
                points: vec![p.index],
            })
            .collect();
        while !frontier.is_empty() {
            let mut next: Vec<Subspace> = frontier
                .par_iter()
                .flat_map_iter(|s| self.extensions(&f, s))
                .collect();
            next.sort();
            next.dedup();
            self.levels.push(frontier);
            frontier = next
                .into_par_iter()
                .map(|sub| self.attach_points(sub))
                .collect();
        }
    }

    /// All singular subspaces one dimension above `s` that contain it.
    fn extensions(&self, f: &FieldContext, s: &SingularSubspace) -> Vec<Subspace> {
        let mut candidates = self.orthogonal[s.points[0]].clone();
        for b in s.basis() {
            candidates.intersect_with(&self.orthogonal[self.index[b]]);
        }
        for &p in &s.points {
            candidates.set(p, false);
        }
        let mut out = Vec::new();
        while let Some(p) = candidates.ones().next() {
            let mut rows = s.basis().to_vec();
            rows.push(self.points[p].rep.clone());
            let ext = Subspace::span(f, self.form.dim(), &rows);
            for v in ext.points(f) {
                candidates.set(self.index[&v], false);
            }
            out.push(ext);
        }
        out
    }

    fn attach_points(&self, subspace: Subspace) -> SingularSubspace {
        let f = self.form.field();
        let mut points: Vec<usize> = subspace
            .points(f)
            .iter()
            .map(|v| self.index[v])
            .collect();
        points.sort_unstable();
        SingularSubspace { subspace, points }
    }

    fn levels_from_bases(
        &self,
        bases: Vec<Vec<Vector>>,
    ) -> Result<Vec<Vec<SingularSubspace>>, PolarError> {
        let mut levels: Vec<Vec<SingularSubspace>> = Vec::new();
        for basis in bases {
            let sub = self.singular_subspace(&basis)?;
            let d = sub.proj_dim() as usize;
            if levels.len() <= d {
                levels.resize(d + 1, Vec::new());
            }
            levels[d].push(sub);
        }
        for level in &mut levels {
            level.sort();
        }
        Ok(levels)
    }

    fn compute_descriptor(&self) -> Result<PolarSpaceDescriptor, PolarError> {
        let rank = self.levels.len();
        let maximals = &self.levels[rank - 1];
        // t + 1 maximals over every (n−2)-dimensional singular subspace
        let lower: &[SingularSubspace] = if rank >= 2 {
            &self.levels[rank - 2]
        } else {
            std::slice::from_ref(&self.empty)
        };
        let mut t_plus_one = None;
        for l in lower {
            let count = maximals.iter().filter(|m| m.contains(l)).count();
            match t_plus_one {
                None => t_plus_one = Some(count),
                Some(c) if c != count => {
                    return Err(PolarError::OrderNotWellDefined(format!(
                        "{c} and {count} maximals over distinct (n-2)-subspaces"
                    )))
                }
                _ => {}
            }
        }
        let t_plus_one = t_plus_one.unwrap_or(0);
        if t_plus_one < 2 {
            return Err(PolarError::OrderNotWellDefined(format!(
                "t + 1 = {t_plus_one}"
            )));
        }
        Ok(PolarSpaceDescriptor {
            family: self.form.family(),
            dim: self.form.dim(),
            q: self.form.q(),
            rank,
            order: (self.form.q(), t_plus_one as u32 - 1),
            parameter_e: parameter_e(self.form.family(), self.form.dim()),
            point_count: self.points.len(),
            maximal_count: maximals.len(),
        })
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn field(&self) -> &Arc<FieldContext> {
        self.form.field()
    }

    pub fn descriptor(&self) -> &PolarSpaceDescriptor {
        &self.descriptor
    }

    pub fn rank(&self) -> usize {
        self.descriptor.rank
    }

    pub fn label(&self) -> String {
        self.form.label()
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    /// Index of the point spanned by `v`, if `v` is a nonzero singular vector.
    pub fn point_index(&self, v: &Vector) -> Option<usize> {
        self.index.get(&v.normalized(self.field())?).copied()
    }

    /// Whether distinct points `a` and `b` are collinear.
    pub fn collinear(&self, a: usize, b: usize) -> bool {
        a != b && self.orthogonal[a].contains(b)
    }

    /// Rows of the orthogonality relation (each point is orthogonal to itself).
    pub fn orthogonality_rows(&self) -> &[FixedBitSet] {
        &self.orthogonal
    }

    /// Singular subspaces of projective dimension `d` (−1 gives the empty subspace).
    pub fn singular_subspaces(&self, d: isize) -> Result<&[SingularSubspace], PolarError> {
        if d == -1 {
            return Ok(std::slice::from_ref(&self.empty));
        }
        if d < -1 || d as usize >= self.levels.len() {
            return Err(PolarError::DimensionOutOfRange {
                requested: d,
                rank: self.levels.len(),
            });
        }
        Ok(&self.levels[d as usize])
    }

    pub fn maximals(&self) -> &[SingularSubspace] {
        &self.levels[self.levels.len() - 1]
    }

    /// Validates a spanning set and returns the singular subspace it spans.
    pub fn singular_subspace(&self, vectors: &[Vector]) -> Result<SingularSubspace, PolarError> {
        let f = self.field();
        let sub = Subspace::span(f, self.form.dim(), vectors);
        if !self.form.is_totally_singular(sub.basis()) {
            return Err(PolarError::NotSingular);
        }
        Ok(self.attach_points(sub))
    }

    /// Σ_L: maximals strictly containing `l`.
    pub fn sigma(&self, l: &SingularSubspace) -> Vec<&SingularSubspace> {
        self.maximals()
            .iter()
            .filter(|m| m.contains(l) && m.points.len() > l.points.len())
            .collect()
    }

    /// Δ_L: the pairs (M∖L, N∖L) for distinct M < N in Σ_L. Needs dim L = n − 2.
    pub fn delta(&self, l: &SingularSubspace) -> Result<Vec<(Vec<usize>, Vec<usize>)>, PolarError> {
        let expected = self.rank() as isize - 2;
        if l.proj_dim() != expected {
            return Err(PolarError::WrongDimension {
                expected,
                actual: l.proj_dim(),
            });
        }
        let sigma = self.sigma(l);
        let mut out = Vec::new();
        for (i, m) in sigma.iter().enumerate() {
            for n in &sigma[i + 1..] {
                out.push((m.difference(l), n.difference(l)));
            }
        }
        Ok(out)
    }

    /// [X1, X2, …]: the span of pairwise collinear points, given by index.
    pub fn span_closure(&self, sets: &[&[usize]]) -> Result<SingularSubspace, PolarError> {
        let mut reps = Vec::new();
        for &p in sets.iter().flat_map(|s| s.iter()) {
            let pt = self.points.get(p).ok_or(PolarError::BadPointIndex(p))?;
            reps.push(pt.rep.clone());
        }
        self.singular_subspace(&reps)
            .map_err(|_| PolarError::NotPairwiseCollinear)
    }

    /// Intersection of two singular subspaces.
    pub fn meet(&self, a: &SingularSubspace, b: &SingularSubspace) -> SingularSubspace {
        let sub = a.subspace.intersect(self.field(), &b.subspace);
        self.attach_points(sub)
    }
}
