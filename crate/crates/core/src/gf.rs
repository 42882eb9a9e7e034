//! Exact arithmetic in GF(p^k).
//!
//! An element is a coefficient vector over GF(p) of length `k`, reduced modulo a
//! fixed monic irreducible polynomial. Vectors are packed into a single integer
//! code `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`; integer order on codes is the
//! canonical element order (lexicographic on the coefficient vector read from
//! the highest degree down), so `0 < 1 < ... < p-1 < x < x+1 < ...`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Default upper bound on `p^k` accepted by [`FieldContext::new`].
pub const DEFAULT_FIELD_CAP: u64 = 1 << 20;

/// Largest extension degree representable under the default cap (`2^20`).
const MAX_DEGREE: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u64),
    #[error("extension degree must be at least 1")]
    DegreeZero,
    #[error("field order {p}^{k} exceeds the configured cap {cap}")]
    CapExceeded { p: u64, k: u32, cap: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    ContextMismatch,
    #[error("q = {0} is not a square (odd extension degree)")]
    OddExtensionDegree(u32),
    #[error("operation requires odd characteristic, field has characteristic 2")]
    EvenCharacteristic,
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("invalid coefficient vector {0:?} for GF({1})")]
    BadCoefficients(Vec<u32>, u32),
}

/// A field element as its packed coefficient code. Only meaningful together
/// with the [`FieldContext`] that produced it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn code(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Callers guarantee `code < q` for the field in use.
    pub(crate) fn from_code(code: u32) -> Elem {
        Elem(code)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power `q` into `(p, k)`.
pub fn prime_power(q: u64) -> Result<(u32, u32), GfError> {
    if q < 2 {
        return Err(GfError::NotPrimePower(q));
    }
    let mut p = 2;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    let (mut rest, mut k) = (q, 0u32);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    if rest != 1 {
        return Err(GfError::NotPrimePower(q));
    }
    Ok((p as u32, k))
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `m` over GF(p). Coefficients low to high.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (j, &mj) in m.iter().enumerate() {
                let t = (lead as u64 * mj as u64) % p as u64;
                r[shift + j] = ((r[shift + j] as u64 + p as u64 - t) % p as u64) as u32;
            }
        }
        r.pop();
    }
    while r.last() == Some(&0) {
        r.pop();
    }
    r
}

fn digits_of(code: u64, p: u32, len: usize) -> Vec<u32> {
    let mut c = code;
    (0..len)
        .map(|_| {
            let d = (c % p as u64) as u32;
            c /= p as u64;
            d
        })
        .collect()
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut divisor = digits_of(code, p, d);
            divisor.push(1);
            if poly_rem(poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Immutable description of GF(p^k).
#[derive(Debug, Clone)]
pub struct FieldContext {
    p: u32,
    k: u32,
    order: u32,
    /// Monic modulus, coefficients low to high, length `k + 1`.
    modulus: Vec<u32>,
    primitive: Elem,
}

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldContext {}

impl FieldContext {
    pub fn new(p: u32, k: u32) -> Result<Arc<Self>, GfError> {
        Self::with_cap(p, k, DEFAULT_FIELD_CAP)
    }

    /// Builds GF(q) from a prime power `q`.
    pub fn from_order(q: u64) -> Result<Arc<Self>, GfError> {
        let (p, k) = prime_power(q)?;
        Self::new(p, k)
    }

    pub fn with_cap(p: u32, k: u32, cap: u64) -> Result<Arc<Self>, GfError> {
        if !is_prime(p as u64) {
            return Err(GfError::NonPrimeCharacteristic(p as u64));
        }
        if k == 0 {
            return Err(GfError::DegreeZero);
        }
        let order = (p as u64)
            .checked_pow(k)
            .filter(|&o| o <= cap && o <= 1 << MAX_DEGREE)
            .ok_or(GfError::CapExceeded { p: p as u64, k, cap })?;

        let modulus = (0..order)
            .map(|code| {
                let mut poly = digits_of(code, p, k as usize);
                poly.push(1);
                poly
            })
            .find(|poly| is_irreducible(poly, p))
            .expect("an irreducible polynomial of every degree exists");

        let mut ctx = FieldContext {
            p,
            k,
            order: order as u32,
            modulus,
            primitive: Elem::ONE,
        };
        let group = order - 1;
        let factors = prime_factors(group);
        ctx.primitive = (1..ctx.order)
            .map(Elem)
            .find(|&g| factors.iter().all(|&r| ctx.pow(g, group / r) != Elem::ONE))
            .expect("the multiplicative group is cyclic");
        Ok(Arc::new(ctx))
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    /// Field size q.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Modulus coefficients, low degree first, including the leading 1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// √q when k is even.
    pub fn sqrt_order(&self) -> Option<u32> {
        self.k.is_multiple_of(2).then(|| self.p.pow(self.k / 2))
    }

    /// The least primitive element in element order.
    pub fn primitive_element(&self) -> Elem {
        self.primitive
    }

    pub fn is_primitive(&self, g: Elem) -> bool {
        if g.is_zero() {
            return false;
        }
        let group = self.order as u64 - 1;
        prime_factors(group)
            .iter()
            .all(|&r| self.pow(g, group / r) != Elem::ONE)
    }

    /// All primitive elements in element order.
    pub fn primitive_elements(&self) -> Vec<Elem> {
        self.elements().filter(|&g| self.is_primitive(g)).collect()
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.order).map(Elem)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (1..self.order).map(Elem)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem(n.rem_euclid(self.p as i64) as u32)
    }

    /// Element with the given code, if in range.
    pub fn elem(&self, code: u32) -> Option<Elem> {
        (code < self.order).then_some(Elem(code))
    }

    /// Little-endian coefficient vector (constant term first), length `k`.
    pub fn coeffs(&self, a: Elem) -> Vec<u32> {
        digits_of(a.0 as u64, self.p, self.k as usize)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Elem, GfError> {
        if coeffs.len() > self.k as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(GfError::BadCoefficients(coeffs.to_vec(), self.order));
        }
        let code = coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.p as u64 + c as u64);
        Ok(Elem(code as u32))
    }

    fn decode(&self, a: Elem, out: &mut [u32; MAX_DEGREE]) {
        let mut c = a.0;
        for slot in out.iter_mut().take(self.k as usize) {
            *slot = c % self.p;
            c /= self.p;
        }
    }

    fn encode(&self, digits: &[u32]) -> Elem {
        Elem(
            digits[..self.k as usize]
                .iter()
                .rev()
                .fold(0u32, |acc, &d| acc * self.p + d),
        )
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return Elem(a.0 ^ b.0);
        }
        if self.k == 1 {
            return Elem((a.0 + b.0) % self.p);
        }
        let (mut x, mut y) = ([0u32; MAX_DEGREE], [0u32; MAX_DEGREE]);
        self.decode(a, &mut x);
        self.decode(b, &mut y);
        for i in 0..self.k as usize {
            x[i] = (x[i] + y[i]) % self.p;
        }
        self.encode(&x)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if self.p == 2 {
            return a;
        }
        if self.k == 1 {
            return Elem((self.p - a.0) % self.p);
        }
        let mut x = [0u32; MAX_DEGREE];
        self.decode(a, &mut x);
        for d in x.iter_mut().take(self.k as usize) {
            *d = (self.p - *d) % self.p;
        }
        self.encode(&x)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return Elem::ZERO;
        }
        let p = self.p as u64;
        if self.k == 1 {
            return Elem(((a.0 as u64 * b.0 as u64) % p) as u32);
        }
        let k = self.k as usize;
        let (mut x, mut y) = ([0u32; MAX_DEGREE], [0u32; MAX_DEGREE]);
        self.decode(a, &mut x);
        self.decode(b, &mut y);
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..k {
            if x[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] = (prod[i + j] + x[i] as u64 * y[j] as u64) % p;
            }
        }
        // x^k = -(m_0 + ... + m_{k-1} x^{k-1})
        for top in (k..2 * k - 1).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for j in 0..k {
                let t = c * self.modulus[j] as u64 % p;
                prod[top - k + j] = (prod[top - k + j] + p - t) % p;
            }
        }
        let mut out = [0u32; MAX_DEGREE];
        for i in 0..k {
            out[i] = prod[i] as u32;
        }
        self.encode(&out)
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = Elem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, GfError> {
        if a.is_zero() {
            return Err(GfError::DivisionByZero);
        }
        Ok(self.pow(a, self.order as u64 - 2))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// The involution x ↦ x^√q (conjugation over GF(√q)).
    pub fn frobenius_sqrt(&self, x: Elem) -> Result<Elem, GfError> {
        let r = self.sqrt_order().ok_or(GfError::OddExtensionDegree(self.order))?;
        Ok(self.pow(x, r as u64))
    }

    /// The norm x ↦ x^(√q+1) onto GF(√q).
    pub fn norm(&self, x: Elem) -> Result<Elem, GfError> {
        let r = self.sqrt_order().ok_or(GfError::OddExtensionDegree(self.order))?;
        Ok(self.pow(x, r as u64 + 1))
    }

    pub fn norm_one_subgroup(&self) -> Result<NormOneSubgroup, GfError> {
        let r = self.sqrt_order().ok_or(GfError::OddExtensionDegree(self.order))?;
        let elements = self
            .nonzero_elements()
            .filter(|&d| self.pow(d, r as u64 + 1) == Elem::ONE)
            .collect();
        Ok(NormOneSubgroup { elements })
    }

    /// ε = β^((√q−1)/2) for the canonical primitive β.
    pub fn epsilon_unit(&self) -> Result<Elem, GfError> {
        self.epsilon_unit_for(self.primitive)
    }

    /// ε computed from an arbitrary primitive element β.
    pub fn epsilon_unit_for(&self, beta: Elem) -> Result<Elem, GfError> {
        let r = self.sqrt_order().ok_or(GfError::OddExtensionDegree(self.order))?;
        if self.p == 2 {
            return Err(GfError::EvenCharacteristic);
        }
        let eps = self.pow(beta, (r as u64 - 1) / 2);
        let minus_one = self.neg(Elem::ONE);
        assert_eq!(self.pow(eps, r as u64 + 1), minus_one);
        assert_eq!(
            self.pow(eps, r as u64),
            self.neg(self.inv(eps).expect("ε is nonzero"))
        );
        Ok(eps)
    }

    /// Human-readable polynomial form, e.g. `x^2+2x+1`.
    pub fn format(&self, a: Elem) -> String {
        if self.k == 1 || a.0 < self.p {
            return a.0.to_string();
        }
        let coeffs = self.coeffs(a);
        let mut terms = Vec::new();
        for (i, &c) in coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            terms.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}{mono}"),
            });
        }
        terms.join("+")
    }
}

impl fmt::Display for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.order)
    }
}

/// The subgroup {δ : δ^(√q+1) = 1} of GF(q)*, sorted in element order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormOneSubgroup {
    pub elements: Vec<Elem>,
}

impl NormOneSubgroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.elements.binary_search(&x).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// An element bundled with its field, for context-checked arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Arc<FieldContext>,
    value: Elem,
}

impl FieldElement {
    pub fn new(field: Arc<FieldContext>, value: Elem) -> Self {
        FieldElement { field, value }
    }

    pub fn value(&self) -> Elem {
        self.value
    }

    pub fn field(&self) -> &Arc<FieldContext> {
        &self.field
    }

    pub fn arith(&self, other: &FieldElement, op: ArithOp) -> Result<FieldElement, GfError> {
        if self.field != other.field {
            return Err(GfError::ContextMismatch);
        }
        let f = &self.field;
        let (a, b) = (self.value, other.value);
        let value = match op {
            ArithOp::Add => f.add(a, b),
            ArithOp::Sub => f.sub(a, b),
            ArithOp::Mul => f.mul(a, b),
            ArithOp::Div => f.div(a, b)?,
        };
        Ok(FieldElement::new(self.field.clone(), value))
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        FieldElement::new(self.field.clone(), self.field.pow(self.value, e))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field.format(self.value))
    }
}
