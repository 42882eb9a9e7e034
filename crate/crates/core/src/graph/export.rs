use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{PolarGraph, Provenance};

/// One "u v" line per edge with u < v, in index order.
pub fn edge_list(g: &PolarGraph) -> String {
    let mut out = String::new();
    for u in 0..g.order() {
        for v in g.neighbors(u).ones().filter(|&v| v > u) {
            writeln!(out, "{u} {v}").expect("writing to a string");
        }
    }
    out
}

fn graph6_size(n: usize, out: &mut Vec<u8>) {
    if n <= 62 {
        out.push(n as u8 + 63);
    } else if n <= 258_047 {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    } else {
        out.extend([126, 126]);
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    }
}

/// graph6 encoding: size header, then the upper triangle column by column
/// packed six bits per byte.
pub fn graph6(g: &PolarGraph) -> String {
    let n = g.order();
    let mut out = Vec::new();
    graph6_size(n, &mut out);
    let (mut byte, mut filled) = (0u8, 0);
    for j in 1..n {
        for i in 0..j {
            byte = (byte << 1) | g.adjacent(i, j) as u8;
            filled += 1;
            if filled == 6 {
                out.push(byte + 63);
                byte = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push((byte << (6 - filled)) + 63);
    }
    String::from_utf8(out).expect("graph6 is printable ASCII")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub provenance: Provenance,
    pub vertex_count: usize,
    /// Vertex coordinates as coefficient lists; empty for graphs without coordinates.
    pub vertices: Vec<Vec<Vec<u32>>>,
    pub edges: Vec<[usize; 2]>,
}

impl GraphJson {
    pub fn new(g: &PolarGraph) -> Self {
        let vertices = match g.field() {
            Some(f) => g
                .vertices()
                .iter()
                .map(|v| v.0.iter().map(|&e| f.coeffs(e)).collect())
                .collect(),
            None => Vec::new(),
        };
        let edges = (0..g.order())
            .flat_map(|u| g.neighbors(u).ones().filter(move |&v| v > u).map(move |v| [u, v]))
            .collect();
        GraphJson {
            provenance: g.provenance().clone(),
            vertex_count: g.order(),
            vertices,
            edges,
        }
    }
}
