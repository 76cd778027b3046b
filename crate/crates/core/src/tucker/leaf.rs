//! The path-following graph on labelled simplices.
//!
//! A simplex is *alternating* when its labels have distinct magnitudes and
//! alternate in sign once sorted by magnitude; its sign is the sign of the
//! smallest label. With `(d, s)` the carrier hemisphere of a simplex, the nodes are
//!
//! * agreeable alternating `(d-1)`-simplices with sign `s`,
//! * `d`-simplices with an alternating facet of sign `s`,
//! * alternating `d`-simplices.
//!
//! A `d`-simplex `κ` of `H_d^s` and its facet `ρ` are joined when `ρ` is
//! alternating with sign `s`. Every node has degree two except the two poles
//! `±g e_0` and the simplices holding a complementary edge, which have degree one.

use super::label::{Labeller, VertexLabel};
use super::triangulation::{Simplex, Triangulation, Vertex};
use rustc_hash::FxHashMap;
use std::cell::RefCell;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// Alternating, one below its carrier dimension, sign agreeing with the carrier.
    AgreeableFacet,
    /// Full-dimensional in its carrier, not alternating, no complementary edge.
    AlmostAlternating,
    /// Alternating and full-dimensional in its carrier.
    Alternating,
    /// Full-dimensional, holding a complementary edge.
    Terminal,
}

/// Labels sorted by magnitude, or `None` when magnitudes repeat or a label is zero.
fn sorted_distinct(labels: &[i32]) -> Option<Vec<i32>> {
    let mut l = labels.to_vec();
    l.sort_by_key(|v| v.abs());
    if l.iter().any(|&v| v == 0) || l.windows(2).any(|w| w[0].abs() == w[1].abs()) {
        return None;
    }
    Some(l)
}

pub fn is_alternating(labels: &[i32]) -> bool {
    match sorted_distinct(labels) {
        Some(l) => l.windows(2).all(|w| w[0].signum() != w[1].signum()),
        None => false,
    }
}

/// Sign of the smallest-magnitude label.
pub fn simplex_sign(labels: &[i32]) -> i32 {
    labels.iter().min_by_key(|v| v.abs()).map_or(0, |v| v.signum())
}

pub fn has_complementary_pair(labels: &[i32]) -> bool {
    labels.iter().any(|&a| a != 0 && labels.contains(&-a))
}

pub struct LeafGraph<'a, L: Labeller + ?Sized> {
    pub tri: Triangulation,
    labeller: &'a L,
    cache: RefCell<FxHashMap<Vertex, VertexLabel>>,
}

impl<'a, L: Labeller + ?Sized> LeafGraph<'a, L> {
    pub fn new(tri: Triangulation, labeller: &'a L) -> Self {
        Self { tri, labeller, cache: RefCell::new(FxHashMap::default()) }
    }

    pub fn vertex_label(&self, z: &Vertex) -> VertexLabel {
        if let Some(l) = self.cache.borrow().get(z) {
            return *l;
        }
        let l = self.labeller.label(z);
        self.cache.borrow_mut().insert(z.clone(), l);
        l
    }

    pub fn labelled_vertices(&self) -> usize {
        self.cache.borrow().len()
    }

    fn labels(&self, s: &[Vertex]) -> Vec<i32> {
        s.iter()
            .map(|z| match self.vertex_label(z) {
                VertexLabel::Label(l) => l,
                VertexLabel::Solution => 0,
            })
            .collect()
    }

    pub fn simplex_labels(&self, s: &[Vertex]) -> Vec<i32> {
        self.labels(s)
    }

    pub fn node_kind(&self, s: &[Vertex]) -> Option<NodeKind> {
        self.inspect(s).0
    }

    /// Graph neighbours of a simplex, assuming it is a node.
    pub fn neighbours(&self, s: &[Vertex]) -> Vec<Simplex> {
        self.inspect(s).1
    }

    /// Node kind and neighbours in one pass over the labels.
    pub fn inspect(&self, s: &[Vertex]) -> (Option<NodeKind>, Vec<Simplex>) {
        if s.is_empty() {
            return (None, Vec::new());
        }
        let (d, sign) = Triangulation::carrier(s);
        let dim = s.len() - 1;
        let labels = self.labels(s);
        let alternating = is_alternating(&labels);
        let mut out = Vec::new();
        if dim == d {
            // facet j drops vertex j
            for j in 0..s.len() {
                if s.len() == 1 {
                    break;
                }
                let mut fl = labels.clone();
                fl.remove(j);
                if is_alternating(&fl) && simplex_sign(&fl) == sign {
                    let mut f = s.to_vec();
                    f.remove(j);
                    out.push(f);
                }
            }
            let kind = if alternating {
                if d < self.tri.n {
                    out.extend(self.tri.cofaces(s, d + 1, simplex_sign(&labels)));
                }
                Some(NodeKind::Alternating)
            } else if out.is_empty() {
                None
            } else if has_complementary_pair(&labels) {
                Some(NodeKind::Terminal)
            } else {
                Some(NodeKind::AlmostAlternating)
            };
            (kind, out)
        } else if dim + 1 == d && alternating && simplex_sign(&labels) == sign {
            (Some(NodeKind::AgreeableFacet), self.tri.cofaces(s, d, sign))
        } else {
            (None, out)
        }
    }

    /// A complementary edge inside the simplex, if any.
    pub fn complementary_edge(&self, s: &[Vertex]) -> Option<(Vertex, Vertex)> {
        let labels = self.labels(s);
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                if labels[i] != 0 && labels[i] == -labels[j] {
                    return Some((s[i].clone(), s[j].clone()));
                }
            }
        }
        None
    }

    /// Every simplex of the triangulation, grouped by dimension. Small grids only.
    pub fn all_simplices(&self) -> Vec<Vec<Simplex>> {
        let tri = self.tri;
        let mut layers: Vec<Vec<Simplex>> = vec![tri.vertices().into_iter().map(|z| vec![z]).collect()];
        let nbrs: HashMap<Vertex, Vec<Vertex>> = tri.vertices().into_iter().map(|z| (z.clone(), tri.neighbours(&z))).collect();
        while let Some(top) = layers.last() {
            let mut next = std::collections::BTreeSet::new();
            for s in top {
                let last = s.last().unwrap();
                for w in &nbrs[last] {
                    if w > last && s.iter().all(|v| nbrs[v].contains(w)) {
                        let mut k = s.clone();
                        k.push(w.clone());
                        if tri.is_simplex(&k) {
                            next.insert(k);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            layers.push(next.into_iter().collect());
        }
        layers
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternation_rules() {
        assert!(is_alternating(&[1]));
        assert!(is_alternating(&[-2, 1, 3]));
        assert!(!is_alternating(&[1, 2]));
        assert!(!is_alternating(&[1, -1]));
        assert_eq!(simplex_sign(&[3, -1, 2]), -1);
        assert!(has_complementary_pair(&[2, 1, -2]));
        assert!(!has_complementary_pair(&[2, 1, 2]));
    }

    #[test]
    fn n1_graph_degrees() {
        let tri = Triangulation::new(1, 4);
        // label +1 on z_0 > 0 side, a flip at the far side forces an edge
        let lab = (1usize, |z: &[i32]| {
            if z[0] > 0 || (z[0] == 0 && z[1] > 0) {
                VertexLabel::Label(1)
            } else {
                VertexLabel::Label(-1)
            }
        });
        let g = LeafGraph::new(tri, &lab);
        let mut ones = 0;
        for layer in g.all_simplices() {
            for s in layer {
                if g.node_kind(&s).is_some() {
                    let deg = g.neighbours(&s).len();
                    assert!(deg <= 2);
                    ones += usize::from(deg == 1);
                }
            }
        }
        assert_eq!(ones % 2, 0);
        assert!(ones >= 2);
    }
}
