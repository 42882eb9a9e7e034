//! Canonical symplectic, quadratic and Hermitian forms of the classical polar spaces.
//!
//! Quadratic forms are stored as upper-triangular coefficient matrices
//! (`Q(x) = Σ_{i≤j} c_ij x_i x_j`), which keeps characteristic 2 uniform with
//! odd characteristic. Symplectic and Hermitian forms are stored as Gram matrices.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Elem, FieldContext, GfError};
use crate::linalg::{all_vectors, nullspace, Subspace, Vector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("{family} forms cannot live in dimension {dim}")]
    BadDimensionParity { family: Family, dim: usize },
    #[error(
        "parabolic O({dim},{q}) over even q is not supported; its collinearity graph is that of \
         Sp({sp_dim},{q}), use --family sp instead"
    )]
    ParabolicEvenCharacteristic { dim: usize, sp_dim: usize, q: u32 },
    #[error("operation needs a {expected} form, got {actual}")]
    KindMismatch { expected: &'static str, actual: FormKind },
    #[error("vector of dimension {actual} used with a form of dimension {expected}")]
    DimMismatch { expected: usize, actual: usize },
    #[error("form is degenerate")]
    Degenerate,
    #[error(transparent)]
    Field(#[from] GfError),
}

/// The classical families of Table-1 polar spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "sp")]
    Symplectic,
    #[serde(rename = "o+")]
    Hyperbolic,
    #[serde(rename = "o")]
    Parabolic,
    #[serde(rename = "o-")]
    Elliptic,
    #[serde(rename = "u")]
    Unitary,
}

impl Family {
    pub fn short_name(self) -> &'static str {
        match self {
            Family::Symplectic => "sp",
            Family::Hyperbolic => "o+",
            Family::Parabolic => "o",
            Family::Elliptic => "o-",
            Family::Unitary => "u",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Family::Symplectic => "Sp",
            Family::Hyperbolic => "O+",
            Family::Parabolic => "O",
            Family::Elliptic => "O-",
            Family::Unitary => "U",
        }
    }

    /// Vector-space dimension of the rank-`n` member of the family (small unitary for U).
    pub fn ambient_dim(self, rank: usize) -> usize {
        match self {
            Family::Symplectic | Family::Hyperbolic | Family::Unitary => 2 * rank,
            Family::Parabolic => 2 * rank + 1,
            Family::Elliptic => 2 * rank + 2,
        }
    }

    /// Type ε of the quadratic form (0 for parabolic), `None` for non-quadratic families.
    pub fn epsilon(self) -> Option<i8> {
        match self {
            Family::Hyperbolic => Some(1),
            Family::Parabolic => Some(0),
            Family::Elliptic => Some(-1),
            Family::Symplectic | Family::Unitary => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Symplectic,
    Quadratic,
    Hermitian,
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormKind::Symplectic => "symplectic",
            FormKind::Quadratic => "quadratic",
            FormKind::Hermitian => "hermitian",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Form {
    family: Family,
    kind: FormKind,
    dim: usize,
    field: Arc<FieldContext>,
    /// Upper-triangular for quadratic forms, Gram matrix otherwise.
    coefficients: Vec<Vec<Elem>>,
}

/// Least `(a, b)` in element order with `t² + a t + b` irreducible over the field.
fn elliptic_tail(f: &FieldContext) -> (Elem, Elem) {
    for a in f.elements() {
        for b in f.elements() {
            let has_root = f
                .elements()
                .any(|t| f.add(f.add(f.mul(t, t), f.mul(a, t)), b).is_zero());
            if !has_root {
                return (a, b);
            }
        }
    }
    unreachable!("every finite field has an irreducible quadratic")
}

/// Canonical form of the given family in dimension `dim` over `field`.
pub fn standard_form(family: Family, dim: usize, field: Arc<FieldContext>) -> Result<Form, FormError> {
    let bad = || FormError::BadDimensionParity { family, dim };
    let mut c = vec![vec![Elem::ZERO; dim]; dim];
    let kind = match family {
        Family::Symplectic => {
            if dim < 2 || !dim.is_multiple_of(2) {
                return Err(bad());
            }
            let minus_one = field.neg(Elem::ONE);
            for i in (0..dim).step_by(2) {
                c[i][i + 1] = Elem::ONE;
                c[i + 1][i] = minus_one;
            }
            FormKind::Symplectic
        }
        Family::Hyperbolic => {
            if dim < 2 || !dim.is_multiple_of(2) {
                return Err(bad());
            }
            for i in (0..dim).step_by(2) {
                c[i][i + 1] = Elem::ONE;
            }
            FormKind::Quadratic
        }
        Family::Parabolic => {
            if dim < 3 || dim % 2 != 1 {
                return Err(bad());
            }
            if field.characteristic() == 2 {
                return Err(FormError::ParabolicEvenCharacteristic {
                    dim,
                    sp_dim: dim - 1,
                    q: field.order(),
                });
            }
            c[0][0] = Elem::ONE;
            for i in (1..dim).step_by(2) {
                c[i][i + 1] = Elem::ONE;
            }
            FormKind::Quadratic
        }
        Family::Elliptic => {
            if dim < 2 || !dim.is_multiple_of(2) {
                return Err(bad());
            }
            for i in (0..dim - 2).step_by(2) {
                c[i][i + 1] = Elem::ONE;
            }
            let (a, b) = elliptic_tail(&field);
            c[dim - 2][dim - 2] = Elem::ONE;
            c[dim - 2][dim - 1] = a;
            c[dim - 1][dim - 1] = b;
            FormKind::Quadratic
        }
        Family::Unitary => {
            if dim < 2 {
                return Err(bad());
            }
            if field.sqrt_order().is_none() {
                return Err(GfError::OddExtensionDegree(field.order()).into());
            }
            for (i, row) in c.iter_mut().enumerate() {
                row[i] = Elem::ONE;
            }
            FormKind::Hermitian
        }
    };
    Ok(Form {
        family,
        kind,
        dim,
        field,
        coefficients: c,
    })
}

impl Form {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> &Arc<FieldContext> {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.order()
    }

    pub fn epsilon(&self) -> Option<i8> {
        self.family.epsilon()
    }

    pub fn coefficients(&self) -> &[Vec<Elem>] {
        &self.coefficients
    }

    fn check_dim(&self, v: &Vector) -> Result<(), FormError> {
        if v.dim() != self.dim {
            return Err(FormError::DimMismatch {
                expected: self.dim,
                actual: v.dim(),
            });
        }
        Ok(())
    }

    /// Q(v) for a quadratic form.
    pub fn eval_q(&self, v: &Vector) -> Result<Elem, FormError> {
        if self.kind != FormKind::Quadratic {
            return Err(FormError::KindMismatch {
                expected: "quadratic",
                actual: self.kind,
            });
        }
        self.check_dim(v)?;
        Ok(self.q_unchecked(v))
    }

    pub(crate) fn q_unchecked(&self, v: &Vector) -> Elem {
        let f = &*self.field;
        let mut acc = Elem::ZERO;
        for i in 0..self.dim {
            if v.0[i].is_zero() {
                continue;
            }
            let mut row = Elem::ZERO;
            for j in i..self.dim {
                let c = self.coefficients[i][j];
                if !c.is_zero() {
                    row = f.add(row, f.mul(c, v.0[j]));
                }
            }
            acc = f.add(acc, f.mul(v.0[i], row));
        }
        acc
    }

    /// B(u, w) = Q(u + w) − Q(u) − Q(w).
    pub fn polarise(&self, u: &Vector, w: &Vector) -> Result<Elem, FormError> {
        let f = &*self.field;
        let quw = self.eval_q(&u.add(f, w))?;
        self.check_dim(w)?;
        Ok(f.sub(f.sub(quw, self.q_unchecked(u)), self.q_unchecked(w)))
    }

    /// Gram pairing, conjugating the second argument for Hermitian forms.
    pub fn eval_pairing(&self, u: &Vector, w: &Vector) -> Result<Elem, FormError> {
        if self.kind == FormKind::Quadratic {
            return Err(FormError::KindMismatch {
                expected: "symplectic or hermitian",
                actual: self.kind,
            });
        }
        self.check_dim(u)?;
        self.check_dim(w)?;
        Ok(u.dot(&self.field, &self.functional(w)))
    }

    /// The form that defines orthogonality: polarisation for quadratic forms,
    /// the pairing otherwise.
    pub fn orthogonality(&self, u: &Vector, w: &Vector) -> Result<Elem, FormError> {
        self.check_dim(u)?;
        self.check_dim(w)?;
        Ok(u.dot(&self.field, &self.functional(w)))
    }

    /// Coefficients `c` with `orthogonality(x, s) = c · x` for all `x`.
    pub fn functional(&self, s: &Vector) -> Vector {
        let f = &*self.field;
        let c = &self.coefficients;
        let d = self.dim;
        let coords = (0..d)
            .map(|i| {
                (0..d).fold(Elem::ZERO, |acc, j| {
                    let coef = match self.kind {
                        FormKind::Quadratic => match i.cmp(&j) {
                            std::cmp::Ordering::Less => c[i][j],
                            std::cmp::Ordering::Greater => c[j][i],
                            std::cmp::Ordering::Equal => f.add(c[i][i], c[i][i]),
                        },
                        _ => c[i][j],
                    };
                    if coef.is_zero() || s.0[j].is_zero() {
                        return acc;
                    }
                    let sj = match self.kind {
                        FormKind::Hermitian => f.frobenius_sqrt(s.0[j]).expect("q is a square"),
                        _ => s.0[j],
                    };
                    f.add(acc, f.mul(coef, sj))
                })
            })
            .collect();
        Vector(coords)
    }

    /// Whether `v` is singular (quadratic) or isotropic (symplectic, Hermitian).
    pub fn is_singular_vector(&self, v: &Vector) -> bool {
        match self.kind {
            FormKind::Quadratic => self.q_unchecked(v).is_zero(),
            FormKind::Symplectic => true,
            FormKind::Hermitian => v.dot(&self.field, &self.functional(v)).is_zero(),
        }
    }

    /// Whether the form vanishes identically on the span of `vectors`.
    pub fn is_totally_singular(&self, vectors: &[Vector]) -> bool {
        vectors.iter().all(|v| self.is_singular_vector(v))
            && vectors.iter().enumerate().all(|(i, u)| {
                vectors[i + 1..]
                    .iter()
                    .all(|w| u.dot(&self.field, &self.functional(w)).is_zero())
            })
    }

    /// S^⊥ = {u : B(u, s) = 0 for all s ∈ S}.
    pub fn perp(&self, set: &[Vector]) -> Result<Subspace, FormError> {
        for s in set {
            self.check_dim(s)?;
        }
        let rows: Vec<Vector> = set.iter().map(|s| self.functional(s)).collect();
        Ok(nullspace(&self.field, self.dim, &rows))
    }

    pub fn perp_subspace(&self, u: &Subspace) -> Subspace {
        self.perp(u.basis()).expect("dimensions agree")
    }

    pub fn is_nondegenerate(&self) -> bool {
        let radical = self.perp_subspace(&Subspace::whole(&self.field, self.dim));
        match self.kind {
            FormKind::Quadratic => radical
                .elements(&self.field)
                .iter()
                .all(|v| v.is_zero() || !self.q_unchecked(v).is_zero()),
            _ => radical.dim() == 0,
        }
    }

    /// Number of nonzero singular vectors, by enumeration.
    pub fn count_singular_vectors(&self) -> usize {
        all_vectors(&self.field, self.dim)
            .filter(|v| !v.is_zero() && self.is_singular_vector(v))
            .count()
    }

    pub fn label(&self) -> String {
        format!("{}({},{})", self.family.symbol(), self.dim, self.q())
    }

    pub fn to_json(&self) -> FormJson {
        let f = &*self.field;
        FormJson {
            kind: self.kind,
            family: self.family,
            epsilon: self.epsilon(),
            dim: self.dim,
            q: f.order(),
            p: f.characteristic(),
            k: f.degree(),
            modulus: f.modulus().to_vec(),
            coefficients: self
                .coefficients
                .iter()
                .map(|row| row.iter().map(|&e| f.coeffs(e)).collect())
                .collect(),
        }
    }
}

/// Serialized form. Elements are little-endian coefficient vectors over GF(p).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormJson {
    pub kind: FormKind,
    pub family: Family,
    pub epsilon: Option<i8>,
    pub dim: usize,
    pub q: u32,
    pub p: u32,
    pub k: u32,
    pub modulus: Vec<u32>,
    pub coefficients: Vec<Vec<Vec<u32>>>,
}
