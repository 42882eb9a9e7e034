use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GraphError, PolarGraph, SpectrumInfo, SrgParams};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CliqueInfo {
    pub vertices: Vec<usize>,
    pub is_delsarte: bool,
    /// Common number of neighbours every outside vertex has in the clique, if constant.
    pub nexus: Option<u64>,
}

impl CliqueInfo {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn intersection(&self, other: &CliqueInfo) -> Vec<usize> {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.vertices, &other.vertices);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }
}

/// Describes a vertex set: its nexus and whether it is a Delsarte clique of `g`.
pub fn clique_info(
    g: &PolarGraph,
    vertices: &[usize],
    params: &SrgParams,
    spectrum: &SpectrumInfo,
) -> CliqueInfo {
    let mut vertices = vertices.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    let set = g.bitset(&vertices);
    let is_clique = vertices
        .iter()
        .all(|&v| g.neighbours_in(v, &set) == vertices.len() - 1);
    let mut counts = (0..g.order())
        .filter(|v| !set.contains(*v))
        .map(|v| g.neighbours_in(v, &set) as u64);
    let nexus = counts.next().and_then(|c| counts.all(|d| d == c).then_some(c));
    let is_delsarte = is_clique
        && spectrum.delsarte_size() == Some(vertices.len() as u64)
        && nexus.is_some()
        && nexus == spectrum.delsarte_nexus(params);
    CliqueInfo {
        vertices,
        is_delsarte,
        nexus,
    }
}

fn extend_cliques(
    g: &PolarGraph,
    current: &mut Vec<usize>,
    candidates: &FixedBitSet,
    s: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == s {
        out.push(current.clone());
        return;
    }
    if current.len() + candidates.count_ones(..) < s {
        return;
    }
    for v in candidates.ones() {
        let mut next = candidates.clone();
        next.intersect_with(g.neighbors(v));
        next.set_range(..v + 1, false);
        current.push(v);
        extend_cliques(g, current, &next, s, out);
        current.pop();
    }
}

/// Every clique of exactly `s` vertices, each sorted, in lexicographic order.
pub fn enumerate_cliques(g: &PolarGraph, s: usize) -> Vec<Vec<usize>> {
    if s == 0 {
        return vec![Vec::new()];
    }
    (0..g.order())
        .into_par_iter()
        .flat_map_iter(|v| {
            let mut candidates = g.neighbors(v).clone();
            candidates.set_range(..v + 1, false);
            let mut out = Vec::new();
            extend_cliques(g, &mut vec![v], &candidates, s, &mut out);
            out
        })
        .collect()
}

fn bron_kerbosch(
    g: &PolarGraph,
    r: &mut Vec<usize>,
    mut p: FixedBitSet,
    mut x: FixedBitSet,
    min_size: usize,
    out: &mut Vec<Vec<usize>>,
) {
    let p_count = p.count_ones(..);
    if r.len() + p_count < min_size {
        return;
    }
    if p_count == 0 {
        if x.count_ones(..) == 0 {
            let mut c = r.clone();
            c.sort_unstable();
            out.push(c);
        }
        return;
    }
    let pivot = p
        .ones()
        .chain(x.ones())
        .max_by_key(|&u| (g.neighbours_in(u, &p), std::cmp::Reverse(u)))
        .expect("p is nonempty");
    let mut branch = p.clone();
    branch.difference_with(g.neighbors(pivot));
    for v in branch.ones() {
        let mut np = p.clone();
        np.intersect_with(g.neighbors(v));
        let mut nx = x.clone();
        nx.intersect_with(g.neighbors(v));
        r.push(v);
        bron_kerbosch(g, r, np, nx, min_size, out);
        r.pop();
        p.set(v, false);
        x.insert(v);
    }
}

/// All maximal cliques with at least `min_size` vertices, sorted.
pub fn maximal_cliques(g: &PolarGraph, min_size: usize) -> Vec<Vec<usize>> {
    let n = g.order();
    let mut all: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .flat_map_iter(|v| {
            let mut p = g.neighbors(v).clone();
            p.set_range(..v + 1, false);
            let mut x = g.neighbors(v).clone();
            x.set_range(v.., false);
            let mut out = Vec::new();
            bron_kerbosch(g, &mut vec![v], p, x, min_size, &mut out);
            out
        })
        .collect();
    all.sort_unstable();
    all
}

/// The cliques of size 1 + k/(−θ2), each with its nexus. Empty when the bound is not an integer.
pub fn delsarte_cliques(
    g: &PolarGraph,
    params: &SrgParams,
    spectrum: &SpectrumInfo,
) -> Vec<CliqueInfo> {
    let Some(size) = spectrum.delsarte_size() else {
        return Vec::new();
    };
    let size = size as usize;
    maximal_cliques(g, size)
        .into_par_iter()
        .filter(|c| c.len() == size)
        .map(|c| clique_info(g, &c, params, spectrum))
        .collect()
}

/// Two distinct Delsarte cliques with the largest intersection; the first such pair
/// in canonical order wins ties.
pub fn max_intersecting_delsarte_pair(
    cliques: &[CliqueInfo],
) -> Result<(CliqueInfo, CliqueInfo), GraphError> {
    let delsarte: Vec<&CliqueInfo> = cliques.iter().filter(|c| c.is_delsarte).collect();
    let mut best: Option<(usize, usize, usize)> = None;
    for i in 0..delsarte.len() {
        for j in i + 1..delsarte.len() {
            let size = delsarte[i].intersection(delsarte[j]).len();
            if best.is_none_or(|(b, _, _)| size > b) {
                best = Some((size, i, j));
            }
        }
    }
    let (_, i, j) = best.ok_or(GraphError::FewerThanTwoCliques)?;
    Ok((delsarte[i].clone(), delsarte[j].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{standard_form, Family};
    use crate::gf::FieldContext;
    use crate::graph::{affine_polar_graph, collinearity_graph, spectrum, srg_check};
    use crate::polar::PolarSpace;

    fn polar(family: Family, dim: usize, q: u64) -> (PolarSpace, PolarGraph) {
        let f = FieldContext::from_order(q).unwrap();
        let s = PolarSpace::new(standard_form(family, dim, f).unwrap()).unwrap();
        let g = collinearity_graph(&s).unwrap();
        (s, g)
    }

    fn analyse(g: &PolarGraph) -> (SrgParams, SpectrumInfo, Vec<CliqueInfo>) {
        let p = srg_check(g).unwrap();
        let s = spectrum(&p).unwrap();
        let c = delsarte_cliques(g, &p, &s);
        (p, s, c)
    }

    #[test]
    fn sp42_cliques_are_lines() {
        let (space, g) = polar(Family::Symplectic, 4, 2);
        let (_, _, cliques) = analyse(&g);
        assert_eq!(cliques.len(), 15);
        assert!(cliques.iter().all(|c| c.is_delsarte && c.nexus == Some(1)));
        let lines: Vec<Vec<usize>> = space
            .maximals()
            .iter()
            .map(|m| m.points().to_vec())
            .collect();
        let mut found: Vec<Vec<usize>> = cliques.iter().map(|c| c.vertices.clone()).collect();
        found.sort();
        let mut lines = lines;
        lines.sort();
        assert_eq!(found, lines);
        let (a, b) = max_intersecting_delsarte_pair(&cliques).unwrap();
        assert_eq!(a.intersection(&b).len(), 1);
    }

    #[test]
    fn hyperbolic_quadric_pairs() {
        let (_, g) = polar(Family::Hyperbolic, 4, 2);
        let (_, _, cliques) = analyse(&g);
        assert_eq!(cliques.len(), 6);
        let (a, b) = max_intersecting_delsarte_pair(&cliques).unwrap();
        assert_eq!(a.intersection(&b).len(), 1);
        let disjoint = cliques
            .iter()
            .filter(|c| c.intersection(&cliques[0]).is_empty())
            .count();
        assert_eq!(disjoint, 2);
    }

    #[test]
    fn unitary_cliques_have_five_points() {
        let (_, g) = polar(Family::Unitary, 4, 4);
        let (_, _, cliques) = analyse(&g);
        assert_eq!(cliques.len(), 27);
        assert!(cliques.iter().all(|c| c.len() == 5 && c.is_delsarte));
    }

    #[test]
    fn affine_hyperbolic_cliques() {
        let f = FieldContext::from_order(2).unwrap();
        let g = affine_polar_graph(2, 1, f).unwrap();
        let (_, _, cliques) = analyse(&g);
        assert!(!cliques.is_empty());
        assert!(cliques.iter().all(|c| c.len() == 4 && c.is_delsarte));
        let (a, b) = max_intersecting_delsarte_pair(&cliques).unwrap();
        assert_eq!(a.intersection(&b).len(), 2);
    }

    #[test]
    fn clebsch_has_no_delsarte_cliques() {
        let f = FieldContext::from_order(2).unwrap();
        let g = affine_polar_graph(2, -1, f).unwrap();
        let (_, _, cliques) = analyse(&g);
        assert!(cliques.is_empty());
        assert!(matches!(
            max_intersecting_delsarte_pair(&cliques),
            Err(GraphError::FewerThanTwoCliques)
        ));
    }

    #[test]
    fn clique_enumeration_on_small_graphs() {
        let c4 = PolarGraph::from_edges("C4", 4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(
            enumerate_cliques(&c4, 2),
            vec![vec![0, 1], vec![0, 3], vec![1, 2], vec![2, 3]]
        );
        assert!(enumerate_cliques(&c4, 3).is_empty());
        assert_eq!(maximal_cliques(&c4, 0).len(), 4);
        let (_, g) = polar(Family::Symplectic, 4, 2);
        // every edge lies on exactly one line
        assert_eq!(enumerate_cliques(&g, 2).len(), 45);
        assert_eq!(enumerate_cliques(&g, 3).len(), 15);
    }
}
