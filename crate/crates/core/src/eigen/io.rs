//! Eigenfunction files: JSON with `[vertex, numerator, denominator]` entries, or
//! CSV with header `vertex,value` and values written as `p` or `p/q`.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{EigenError, Eigenfunction};
use crate::graph::Provenance;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenfunctionFile {
    pub graph: Option<Provenance>,
    pub theta: i64,
    pub entries: Vec<(usize, i64, i64)>,
}

impl EigenfunctionFile {
    pub fn from_function(f: &Eigenfunction) -> Result<Self, EigenError> {
        let entries = f
            .values()
            .iter()
            .map(|(&v, x)| match (x.numer().to_i64(), x.denom().to_i64()) {
                (Some(n), Some(d)) => Ok((v, n, d)),
                _ => Err(EigenError::Format(format!("value at {v} does not fit in 64 bits"))),
            })
            .collect::<Result<_, _>>()?;
        Ok(EigenfunctionFile {
            graph: f.provenance().cloned(),
            theta: f.theta(),
            entries,
        })
    }

    pub fn to_function(&self) -> Result<Eigenfunction, EigenError> {
        let mut values = BTreeMap::new();
        for &(v, n, d) in &self.entries {
            if d == 0 {
                return Err(EigenError::Format(format!("zero denominator at vertex {v}")));
            }
            if values
                .insert(v, BigRational::new(BigInt::from(n), BigInt::from(d)))
                .is_some()
            {
                return Err(EigenError::Format(format!("vertex {v} listed twice")));
            }
        }
        Eigenfunction::new(values, self.theta, self.graph.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("eigenfunction serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EigenError> {
        serde_json::from_str(text).map_err(|e| EigenError::Format(e.to_string()))
    }
}

impl Eigenfunction {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,value\n");
        for (v, x) in self.values() {
            writeln!(out, "{v},{x}").expect("writing to a string");
        }
        out
    }

    /// Parses the CSV form; θ and provenance are not part of it.
    pub fn from_csv(
        text: &str,
        theta: i64,
        provenance: Option<Provenance>,
    ) -> Result<Self, EigenError> {
        let bad = |line: usize, msg: &str| EigenError::Format(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "vertex,value" => {}
            _ => return Err(bad(1, "expected header vertex,value")),
        }
        let mut values = BTreeMap::new();
        for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
            let (v, x) = line
                .split_once(',')
                .ok_or_else(|| bad(i + 1, "expected two fields"))?;
            let v: usize = v.trim().parse().map_err(|_| bad(i + 1, "bad vertex"))?;
            let x: BigRational = x.trim().parse().map_err(|_| bad(i + 1, "bad value"))?;
            if x.denom() == &BigInt::from(0) {
                return Err(bad(i + 1, "zero denominator"));
            }
            if values.insert(v, x).is_some() {
                return Err(bad(i + 1, "vertex listed twice"));
            }
        }
        Eigenfunction::new(values, theta, provenance)
    }
}
