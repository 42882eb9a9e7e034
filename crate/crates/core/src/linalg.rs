//! Vectors and subspaces of GF(q)^d in canonical reduced row-echelon form.

use crate::gf::{Elem, FieldContext};

/// A coordinate vector. Derived ordering is lexicographic on element codes,
/// which is the canonical vector order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vector(pub Vec<Elem>);

impl Vector {
    pub fn zero(dim: usize) -> Self {
        Vector(vec![Elem::ZERO; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[i] = Elem::ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|e| e.is_zero())
    }

    pub fn add(&self, f: &FieldContext, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| f.add(a, b)).collect())
    }

    pub fn sub(&self, f: &FieldContext, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| f.sub(a, b)).collect())
    }

    pub fn scale(&self, f: &FieldContext, c: Elem) -> Vector {
        Vector(self.0.iter().map(|&a| f.mul(c, a)).collect())
    }

    /// Standard dot product Σ a_i b_i.
    pub fn dot(&self, f: &FieldContext, other: &Vector) -> Elem {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Elem::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
    }

    /// Scalar multiple whose first nonzero coordinate is 1; `None` for the zero vector.
    pub fn normalized(&self, f: &FieldContext) -> Option<Vector> {
        let lead = *self.0.iter().find(|e| !e.is_zero())?;
        let inv = f.inv(lead).expect("lead is nonzero");
        Some(self.scale(f, inv))
    }

    /// Position of this vector in the lexicographic enumeration of GF(q)^d.
    pub fn lex_index(&self, q: u32) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, e| acc * q as usize + e.code() as usize)
    }

    pub fn from_lex_index(mut index: usize, q: u32, dim: usize) -> Vector {
        let mut coords = vec![Elem::ZERO; dim];
        for slot in coords.iter_mut().rev() {
            *slot = Elem::from_code((index % q as usize) as u32);
            index /= q as usize;
        }
        Vector(coords)
    }
}

/// All vectors of GF(q)^d in lexicographic order.
pub fn all_vectors(f: &FieldContext, dim: usize) -> impl Iterator<Item = Vector> + '_ {
    let q = f.order();
    let total = (q as usize).pow(dim as u32);
    (0..total).map(move |i| Vector::from_lex_index(i, q, dim))
}

/// Representatives (first nonzero coordinate 1) of all projective points of
/// PG(d−1, q), in lexicographic order of the representatives.
pub fn projective_points(f: &FieldContext, dim: usize) -> Vec<Vector> {
    all_vectors(f, dim)
        .filter(|v| v.0.iter().find(|e| !e.is_zero()) == Some(&Elem::ONE))
        .collect()
}

/// Reduced row-echelon form of `rows`, zero rows dropped.
pub fn rref(f: &FieldContext, rows: &[Vector]) -> Vec<Vector> {
    let mut m: Vec<Vector> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.dim());
    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(sel) = (pivot_row..m.len()).find(|&r| !m[r].0[col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, sel);
        let inv = f.inv(m[pivot_row].0[col]).expect("pivot is nonzero");
        m[pivot_row] = m[pivot_row].scale(f, inv);
        let pr = m[pivot_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != pivot_row && !row.0[col].is_zero() {
                let c = row.0[col];
                *row = row.sub(f, &pr.scale(f, c));
            }
        }
        pivot_row += 1;
        if pivot_row == m.len() {
            break;
        }
    }
    m.truncate(pivot_row);
    m
}

/// Basis (canonical) of {x : c·x = 0 for every functional c in `rows`}.
pub fn nullspace(f: &FieldContext, dim: usize, rows: &[Vector]) -> Subspace {
    let r = rref(f, rows);
    let pivots: Vec<usize> = r
        .iter()
        .map(|row| row.0.iter().position(|e| !e.is_zero()).unwrap())
        .collect();
    let basis: Vec<Vector> = (0..dim)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut x = Vector::unit(dim, free);
            for (row, &pc) in r.iter().zip(&pivots) {
                x.0[pc] = f.neg(row.0[free]);
            }
            x
        })
        .collect();
    Subspace::span(f, dim, &basis)
}

/// A subspace held by its canonical reduced row-echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subspace {
    basis: Vec<Vector>,
    ambient: usize,
}

impl Subspace {
    pub fn span(f: &FieldContext, ambient: usize, vectors: &[Vector]) -> Subspace {
        Subspace {
            basis: rref(f, vectors),
            ambient,
        }
    }

    pub fn zero(ambient: usize) -> Subspace {
        Subspace {
            basis: Vec::new(),
            ambient,
        }
    }

    pub fn whole(f: &FieldContext, ambient: usize) -> Subspace {
        let basis: Vec<Vector> = (0..ambient).map(|i| Vector::unit(ambient, i)).collect();
        Subspace::span(f, ambient, &basis)
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Vector-space dimension.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Projective dimension (`dim − 1`; −1 for the zero subspace).
    pub fn proj_dim(&self) -> isize {
        self.basis.len() as isize - 1
    }

    pub fn contains(&self, f: &FieldContext, v: &Vector) -> bool {
        let mut r = v.clone();
        for row in &self.basis {
            let pc = row.0.iter().position(|e| !e.is_zero()).unwrap();
            if !r.0[pc].is_zero() {
                let c = r.0[pc];
                r = r.sub(f, &row.scale(f, c));
            }
        }
        r.is_zero()
    }

    pub fn contains_subspace(&self, f: &FieldContext, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(f, v))
    }

    pub fn join(&self, f: &FieldContext, other: &Subspace) -> Subspace {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Subspace::span(f, self.ambient, &rows)
    }

    /// Annihilator under the standard dot product.
    pub fn annihilator(&self, f: &FieldContext) -> Subspace {
        nullspace(f, self.ambient, &self.basis)
    }

    pub fn intersect(&self, f: &FieldContext, other: &Subspace) -> Subspace {
        let mut rows = self.annihilator(f).basis;
        rows.extend(other.annihilator(f).basis);
        nullspace(f, self.ambient, &rows)
    }

    /// Every vector of the subspace, in lexicographic order of coefficient tuples.
    pub fn elements(&self, f: &FieldContext) -> Vec<Vector> {
        let q = f.order();
        let n = (q as usize).pow(self.dim() as u32);
        let mut out: Vec<Vector> = (0..n)
            .map(|i| {
                let coeffs = Vector::from_lex_index(i, q, self.dim());
                self.basis
                    .iter()
                    .zip(&coeffs.0)
                    .fold(Vector::zero(self.ambient), |acc, (b, &c)| {
                        acc.add(f, &b.scale(f, c))
                    })
            })
            .collect();
        out.sort();
        out
    }

    /// Normalized representatives of the projective points of the subspace, sorted.
    pub fn points(&self, f: &FieldContext) -> Vec<Vector> {
        let mut pts: Vec<Vector> = self
            .elements(f)
            .into_iter()
            .filter(|v| v.0.iter().find(|e| !e.is_zero()) == Some(&Elem::ONE))
            .collect();
        pts.sort();
        pts
    }
}
