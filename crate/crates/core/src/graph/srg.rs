use fixedbitset::FixedBitSet;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GraphError, PolarGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SrgParams {
    pub v: u64,
    pub k: u64,
    pub lambda: u64,
    pub mu: u64,
}

impl SrgParams {
    pub fn new(v: u64, k: u64, lambda: u64, mu: u64) -> Self {
        SrgParams { v, k, lambda, mu }
    }

    /// k(k − λ − 1) = (v − k − 1)μ
    pub fn is_feasible(&self) -> bool {
        self.k < self.v
            && self.lambda < self.k.max(1)
            && self.k * (self.k - self.lambda - 1) == (self.v - self.k - 1) * self.mu
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumInfo {
    pub k: i64,
    pub theta1: i64,
    pub theta2: i64,
    pub mult_theta1: u64,
    pub mult_theta2: u64,
}

impl SpectrumInfo {
    /// −θ2, the m of the clique bound.
    pub fn m(&self) -> i64 {
        -self.theta2
    }

    /// 1 + k/(−θ2) when it is an integer.
    pub fn delsarte_size(&self) -> Option<u64> {
        (self.k % self.m() == 0).then(|| (1 + self.k / self.m()) as u64)
    }

    /// μ/(−θ2) when it is an integer.
    pub fn delsarte_nexus(&self, params: &SrgParams) -> Option<u64> {
        let m = self.m() as u64;
        params.mu.is_multiple_of(m).then(|| params.mu / m)
    }
}

fn connected(n: usize, neighbours: impl Fn(usize) -> FixedBitSet) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = FixedBitSet::with_capacity(n);
    seen.insert(0);
    let mut frontier = vec![0];
    while let Some(v) = frontier.pop() {
        let mut fresh = neighbours(v);
        fresh.difference_with(&seen);
        seen.union_with(&fresh);
        frontier.extend(fresh.ones());
    }
    seen.count_ones(..) == n
}

/// Verifies strong regularity over every vertex pair.
pub fn srg_check(g: &PolarGraph) -> Result<SrgParams, GraphError> {
    let n = g.order();
    if n == 0 {
        return Err(GraphError::Imprimitive);
    }
    let k = g.degree(0);
    if let Some(v) = (1..n).find(|&v| g.degree(v) != k) {
        return Err(GraphError::NotRegular {
            vertex: v,
            degree: g.degree(v),
            expected: k,
        });
    }
    let complement = |v: usize| {
        let mut row = g.neighbors(v).clone();
        row.toggle_range(..);
        row.set(v, false);
        row
    };
    if k == 0 || k == n - 1 || !connected(n, |v| g.neighbors(v).clone()) || !connected(n, complement)
    {
        return Err(GraphError::Imprimitive);
    }
    let first_nonadjacent = (1..n).find(|&v| !g.adjacent(0, v)).expect("k < n - 1");
    let first_adjacent = g.neighbors(0).ones().next().expect("k > 0");
    let lambda = g.neighbors(0).intersection_count(g.neighbors(first_adjacent));
    let mu = g.neighbors(0).intersection_count(g.neighbors(first_nonadjacent));
    let violation = (0..n)
        .into_par_iter()
        .filter_map(|u| {
            (u + 1..n).find_map(|v| {
                let common = g.neighbors(u).intersection_count(g.neighbors(v));
                let (relation, expected) = if g.adjacent(u, v) {
                    ("adjacent", lambda)
                } else {
                    ("non-adjacent", mu)
                };
                (common != expected).then_some(GraphError::NotStronglyRegular {
                    u,
                    v,
                    relation,
                    common,
                    expected,
                })
            })
        })
        .find_first(|_| true);
    match violation {
        Some(e) => Err(e),
        None => Ok(SrgParams::new(n as u64, k as u64, lambda as u64, mu as u64)),
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Eigenvalues k > θ1 > 0 > θ2 with multiplicities, from the parameters alone.
pub fn spectrum(params: &SrgParams) -> Result<SpectrumInfo, GraphError> {
    let (v, k, l, m) = (
        params.v as i64,
        params.k as i64,
        params.lambda as i64,
        params.mu as i64,
    );
    let disc = (l - m) * (l - m) + 4 * (k - m);
    if disc <= 0 {
        return Err(GraphError::IrrationalEigenvalues(*params));
    }
    let s = isqrt(disc as u64) as i64;
    if s * s != disc {
        return Err(GraphError::IrrationalEigenvalues(*params));
    }
    let theta1 = (l - m + s) / 2;
    let theta2 = (l - m - s) / 2;
    // f + g = v − 1 and k + fθ1 + gθ2 = 0
    let num = 2 * k + (v - 1) * (l - m);
    if num % s != 0 || ((v - 1) - num / s) % 2 != 0 {
        return Err(GraphError::InfeasibleMultiplicities(*params));
    }
    let f = ((v - 1) - num / s) / 2;
    let g = ((v - 1) + num / s) / 2;
    if f <= 0 || g <= 0 || theta1 <= 0 || theta2 >= 0 {
        return Err(GraphError::InfeasibleMultiplicities(*params));
    }
    Ok(SpectrumInfo {
        k,
        theta1,
        theta2,
        mult_theta1: f as u64,
        mult_theta2: g as u64,
    })
}

/// (θ1, θ2) = (q^(n−1) − 1, −t·q^(n−2) − 1) for the collinearity graph of a rank-n space.
pub fn polar_closed_form(q: u64, n: u32, t: u64) -> (i64, i64) {
    let q = q as i64;
    (q.pow(n - 1) - 1, -(t as i64) * q.pow(n - 2) - 1)
}

/// The eigenvalue pair as labelled for VO^ε(2m, q): (ε(q−1)q^(m−1) − 1, −εq^(m−1) − 1).
/// For ε = −1 the first entry is the negative one.
pub fn affine_literal_labels(q: u64, m: u32, epsilon: i8) -> (i64, i64) {
    let (q, e) = (q as i64, epsilon as i64);
    (e * (q - 1) * q.pow(m - 1) - 1, -e * q.pow(m - 1) - 1)
}

/// The same eigenvalues sorted so that θ1 > 0 > θ2.
pub fn affine_closed_form(q: u64, m: u32, epsilon: i8) -> (i64, i64) {
    let (a, b) = affine_literal_labels(q, m, epsilon);
    (a.max(b), a.min(b))
}

/// 1 + (q^m − ε)(q^(m−1) + ε)/(εq^(m−1) + 1), evaluated literally. Negative for ε = −1.
pub fn affine_delsarte_size_formula(q: u64, m: u32, epsilon: i8) -> BigRational {
    let (q, e) = (q as i64, epsilon as i64);
    let num = (q.pow(m) - e) * (q.pow(m - 1) + e);
    let den = e * q.pow(m - 1) + 1;
    BigRational::one() + BigRational::new(num.into(), den.into())
}

// Primes just below 2^62 for the modular determinant.
fn modular_primes() -> impl Iterator<Item = u64> {
    (1..(1u64 << 62)).rev().step_by(2).filter(|&n| is_prime_u64(n))
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

// Deterministic Miller-Rabin for 64-bit inputs.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'base: for &b in &BASES {
        let mut x = pow_mod(b, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'base;
            }
        }
        return false;
    }
    true
}

fn shifted_matrix(g: &PolarGraph, theta: i64, p: u64) -> Vec<Vec<u64>> {
    let diag = theta.rem_euclid(p as i64) as u64;
    let diag = (p - diag) % p;
    (0..g.order())
        .map(|i| {
            (0..g.order())
                .map(|j| {
                    if i == j {
                        diag
                    } else {
                        g.adjacent(i, j) as u64
                    }
                })
                .collect()
        })
        .collect()
}

/// Rank of a square matrix over GF(p); also returns the determinant.
fn rank_mod(mut a: Vec<Vec<u64>>, p: u64) -> (usize, u64) {
    let n = a.len();
    let mut rank = 0;
    let mut det = 1u64;
    for col in 0..n {
        let Some(piv) = (rank..n).find(|&r| a[r][col] != 0) else {
            det = 0;
            continue;
        };
        if piv != rank {
            a.swap(piv, rank);
            det = (p - det) % p;
        }
        det = mul_mod(det, a[rank][col], p);
        let inv = pow_mod(a[rank][col], p - 2, p);
        let pivot_row = a[rank].clone();
        for r in rank + 1..n {
            let factor = mul_mod(a[r][col], inv, p);
            if factor == 0 {
                continue;
            }
            for (x, &y) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x = (*x + p - mul_mod(factor, y, p)) % p;
            }
        }
        rank += 1;
    }
    (rank, det)
}

/// Nullity of A − θI over GF(p).
pub fn modular_nullity(g: &PolarGraph, theta: i64, p: u64) -> usize {
    g.order() - rank_mod(shifted_matrix(g, theta, p), p).0
}

/// Whether det(A − θI) = 0 over the integers. The determinant is reduced modulo
/// enough 62-bit primes that their product exceeds twice the Hadamard bound.
pub fn det_vanishes(g: &PolarGraph, theta: i64) -> bool {
    let n = g.order();
    // log2 of the Hadamard bound ∏ ||row||
    let bits: f64 = (0..n)
        .map(|v| 0.5 * ((g.degree(v) as f64) + (theta * theta) as f64).log2())
        .sum::<f64>()
        + 2.0;
    let needed = (bits / 61.0).ceil().max(1.0) as usize;
    modular_primes()
        .take(needed)
        .collect::<Vec<_>>()
        .into_par_iter()
        .all(|p| rank_mod(shifted_matrix(g, theta, p), p).1 == 0)
}
