//! Undirected simple graphs over `0..n` and the graph families built from
//! channels, joint sources and Markov chains.

use std::fmt::Write as _;

use crate::bitset::VertexSet;
use crate::chain::{AdjacencyMatrix, StochasticMatrix, TransitionMatrix};
use crate::error::{Error, Result};
use crate::jointsource::JointDistribution;

/// Undirected graph without self-loops, stored as one bit row per vertex.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<VertexSet>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.len())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![VertexSet::empty(n); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|v| {
                let mut row = VertexSet::full(n);
                row.remove(v);
                row
            })
            .collect();
        Self { adj }
    }

    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<Self> {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Invalid(format!(
                    "edge {{{u},{v}}} outside vertex range 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::Invalid(format!("self-loop at vertex {u}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert_ne!(u, v);
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(VertexSet::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn complement(&self) -> Graph {
        let n = self.len();
        let adj = self
            .adj
            .iter()
            .enumerate()
            .map(|(v, row)| {
                let mut c = VertexSet::full(n);
                c.difference_with(row);
                c.remove(v);
                c
            })
            .collect();
        Graph { adj }
    }

    /// `[S]^2 ⊆ E`. The empty set and singletons are cliques.
    pub fn is_clique(&self, s: &VertexSet) -> bool {
        s.iter().all(|v| {
            let mut rest = s.clone();
            rest.remove(v);
            rest.is_subset(&self.adj[v])
        })
    }

    /// `[S]^2 ∩ E = ∅`.
    pub fn is_independent(&self, s: &VertexSet) -> bool {
        s.iter().all(|v| !self.adj[v].intersects(s))
    }

    /// Subgraph induced by `vertices`, relabelled `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut g = Graph::empty(vertices.len());
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// First edge (lexicographic) of `self` that is missing from `other`.
    pub fn first_edge_not_in(&self, other: &Graph) -> Option<(usize, usize)> {
        self.edges().find(|&(u, v)| !other.has_edge(u, v))
    }

    /// Edge-set inclusion `E(self) ⊆ E(other)` on the same vertex set.
    pub fn is_edge_subset_of(&self, other: &Graph) -> bool {
        self.len() == other.len()
            && self
                .adj
                .iter()
                .zip(&other.adj)
                .all(|(a, b)| a.is_subset(b))
    }

    /// Strong (normal) product: distinct tuples are adjacent iff every
    /// coordinate pair is equal or adjacent.
    pub fn normal_product(&self, k: usize, vertex_cap: usize) -> Result<Graph> {
        let n = self.len();
        let total = product_size(n, k, vertex_cap)?;
        let closed: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                let mut row = self.adj[v].clone();
                row.insert(v);
                row.to_vec()
            })
            .collect();
        let mut adj = Vec::with_capacity(total);
        for code in 0..total {
            let tuple = decode_tuple(code, n, k);
            let lists: Vec<&[usize]> = tuple.iter().map(|&c| closed[c].as_slice()).collect();
            let mut row = VertexSet::empty(total);
            for_each_tuple(&lists, n, |b| row.insert(b));
            row.remove(code);
            adj.push(row);
        }
        Ok(Graph { adj })
    }

    /// Co-normal product: distinct tuples are adjacent iff some coordinate
    /// pair is adjacent.
    pub fn conormal_product(&self, k: usize, vertex_cap: usize) -> Result<Graph> {
        let n = self.len();
        let total = product_size(n, k, vertex_cap)?;
        let far: Vec<Vec<usize>> = (0..n)
            .map(|v| (0..n).filter(|&u| !self.has_edge(u, v)).collect())
            .collect();
        let mut adj = Vec::with_capacity(total);
        for code in 0..total {
            let tuple = decode_tuple(code, n, k);
            let lists: Vec<&[usize]> = tuple.iter().map(|&c| far[c].as_slice()).collect();
            let mut row = VertexSet::full(total);
            // tuples that avoid adjacency in every coordinate, including `code` itself
            for_each_tuple(&lists, n, |b| row.remove(b));
            adj.push(row);
        }
        Ok(Graph { adj })
    }

    /// One `u v` pair per line, 0-based, `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn to_dot(&self, name: &str, labels: Option<&[String]>) -> String {
        let mut out = format!("graph {name} {{\n");
        for v in 0..self.len() {
            match labels.and_then(|l| l.get(v)) {
                Some(label) => {
                    let _ = writeln!(out, "  {v} [label={}];", dot_quote(label));
                }
                None => {
                    let _ = writeln!(out, "  {v};");
                }
            }
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {u} -- {v};");
        }
        out.push_str("}\n");
        out
    }
}

fn dot_quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}

fn product_size(n: usize, k: usize, cap: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::Invalid("product exponent must be at least 1".into()));
    }
    match checked_power(n, k) {
        Some(total) if total <= cap => Ok(total),
        _ => Err(Error::cap(
            "graph product",
            (n as u128).saturating_pow(k as u32),
            cap,
        )),
    }
}

pub(crate) fn checked_power(n: usize, k: usize) -> Option<usize> {
    let k = u32::try_from(k).ok()?;
    n.checked_pow(k)
}

/// Mixed-radix index of a tuple; the first coordinate is most significant.
pub fn encode_tuple(tuple: &[usize], radix: usize) -> usize {
    tuple.iter().fold(0, |acc, &c| acc * radix + c)
}

pub fn decode_tuple(mut code: usize, radix: usize, k: usize) -> Vec<usize> {
    let mut t = vec![0; k];
    for slot in t.iter_mut().rev() {
        *slot = code % radix;
        code /= radix;
    }
    t
}

/// Visits the codes of every tuple in the Cartesian product of `lists`.
fn for_each_tuple(lists: &[&[usize]], radix: usize, mut f: impl FnMut(usize)) {
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    let k = lists.len();
    let mut idx = vec![0usize; k];
    loop {
        let code = idx
            .iter()
            .zip(lists)
            .fold(0, |acc, (&i, l)| acc * radix + l[i]);
        f(code);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < lists[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Graph on targets where two targets are adjacent iff their accessor sets
/// are disjoint.
pub(crate) fn disjoint_accessor_graph(accessors: &[VertexSet]) -> Graph {
    let n = accessors.len();
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if !accessors[u].intersects(&accessors[v]) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Confusion graph of a channel: inputs are adjacent iff some output has
/// mass above `threshold` under both.
pub fn confusion_graph(w: &StochasticMatrix, threshold: f64) -> Graph {
    let outputs: Vec<VertexSet> = (0..w.rows())
        .map(|x| VertexSet::from_indices(w.cols(), (0..w.cols()).filter(|&y| w.get(x, y) > threshold)))
        .collect();
    let n = w.rows();
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if outputs[u].intersects(&outputs[v]) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Characteristic graph of a pair `(X, Z)`: `x, x'` are adjacent iff no side
/// information value `z` is jointly possible with both.
pub fn characteristic_graph_pair(q: &JointDistribution, threshold: f64) -> Graph {
    let supports: Vec<VertexSet> = (0..q.nx())
        .map(|x| VertexSet::from_indices(q.nz(), (0..q.nz()).filter(|&z| q.get(x, z) > threshold)))
        .collect();
    disjoint_accessor_graph(&supports)
}

/// Characteristic graph of a Markov chain: `x1, x2` are adjacent iff no state
/// accesses both.
pub fn characteristic_graph_chain(a: &AdjacencyMatrix) -> Graph {
    disjoint_accessor_graph(&a.predecessor_sets())
}

/// Characteristic graph after discarding transitions of probability `<= epsilon`.
pub fn epsilon_characteristic_graph(p: &TransitionMatrix, epsilon: f64) -> Result<Graph> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Invalid(format!("epsilon {epsilon} outside [0, 1)")));
    }
    Ok(characteristic_graph_chain(&p.adjacency(epsilon)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::cycle4_chain;

    fn edges(g: &Graph) -> Vec<(usize, usize)> {
        g.edges().collect()
    }

    #[test]
    fn complement_of_complete_is_empty() {
        assert_eq!(Graph::complete(4).complement(), Graph::empty(4));
        assert_eq!(Graph::empty(5).complement(), Graph::complete(5));
    }

    #[test]
    fn complement_of_cycle4_characteristic_graph() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(edges(&g.complement()), vec![(0, 2), (0, 3), (1, 2), (1, 3)]);
        assert_eq!(g.complement().complement(), g);
    }

    #[test]
    fn clique_and_independence_membership() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(g.is_clique(&VertexSet::from_indices(4, [0, 1])));
        assert!(!g.is_clique(&VertexSet::from_indices(4, [0, 2])));
        assert!(g.is_independent(&VertexSet::from_indices(4, [0, 2])));
        for v in 0..4 {
            let s = VertexSet::from_indices(4, [v]);
            assert!(g.is_clique(&s) && g.is_independent(&s));
        }
        let e = VertexSet::empty(4);
        assert!(g.is_clique(&e) && g.is_independent(&e));
    }

    #[test]
    fn from_edges_rejects_loops_and_range() {
        assert!(Graph::from_edges(3, [(1, 1)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn confusion_graph_of_lumping_is_isolated_cliques() {
        let w = StochasticMatrix::new(vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(edges(&confusion_graph(&w, 1e-12)), vec![(0, 1), (2, 3)]);
        let id = StochasticMatrix::identity(3);
        assert_eq!(confusion_graph(&id, 1e-12), Graph::empty(3));
        let pos = StochasticMatrix::new(vec![vec![0.5, 0.5]; 3]).unwrap();
        assert_eq!(confusion_graph(&pos, 1e-12), Graph::complete(3));
    }

    #[test]
    fn characteristic_pair_extremes() {
        let id = JointDistribution::new(vec![
            vec![1.0 / 3.0, 0.0, 0.0],
            vec![0.0, 1.0 / 3.0, 0.0],
            vec![0.0, 0.0, 1.0 / 3.0],
        ])
        .unwrap();
        assert_eq!(characteristic_graph_pair(&id, 1e-12), Graph::complete(3));
        let indep = JointDistribution::new(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert_eq!(characteristic_graph_pair(&indep, 1e-12), Graph::empty(2));
    }

    #[test]
    fn cycle4_characteristic_graph() {
        let p = cycle4_chain();
        let g = characteristic_graph_chain(&p.support());
        assert_eq!(edges(&g), vec![(0, 1), (2, 3)]);
        let q = JointDistribution::from_chain(&p).unwrap();
        assert_eq!(characteristic_graph_pair(&q, 1e-12), g);
    }

    #[test]
    fn characteristic_graph_of_positive_chain_is_empty() {
        let p = TransitionMatrix::new(vec![vec![0.2, 0.3, 0.5]; 3]).unwrap();
        assert_eq!(characteristic_graph_chain(&p.support()), Graph::empty(3));
    }

    #[test]
    fn deterministic_cycle_gives_complete_graph() {
        let p = TransitionMatrix::new(vec![
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        let a = p.support();
        let g = characteristic_graph_chain(&a);
        // brute force over the definition
        for x1 in 0..4 {
            for x2 in (x1 + 1)..4 {
                let separated = (0..4).all(|x| !(a.get(x, x1) && a.get(x, x2)));
                assert_eq!(g.has_edge(x1, x2), separated);
            }
        }
        assert_eq!(g, Graph::complete(4));
    }

    #[test]
    fn epsilon_graphs() {
        let eps = 0.1;
        let p = TransitionMatrix::new(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]]).unwrap();
        assert_eq!(epsilon_characteristic_graph(&p, eps).unwrap(), Graph::complete(2));
        let cycle4 = cycle4_chain();
        assert_eq!(
            epsilon_characteristic_graph(&cycle4, 0.0).unwrap(),
            characteristic_graph_chain(&cycle4.adjacency(0.0))
        );
        assert_eq!(epsilon_characteristic_graph(&cycle4, 0.6).unwrap(), Graph::complete(4));
        assert!(epsilon_characteristic_graph(&cycle4, 1.0).is_err());
    }

    #[test]
    fn products_at_k1_are_identity() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3), (1, 2)]).unwrap();
        assert_eq!(g.normal_product(1, 1 << 10).unwrap(), g);
        assert_eq!(g.conormal_product(1, 1 << 10).unwrap(), g);
    }

    #[test]
    fn normal_product_of_isolated_cliques() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let p = g.normal_product(2, 1 << 10).unwrap();
        assert_eq!(p.len(), 16);
        // brute force
        for a in 0..16 {
            for b in 0..16 {
                if a == b {
                    continue;
                }
                let (ta, tb) = (decode_tuple(a, 4, 2), decode_tuple(b, 4, 2));
                let close = ta.iter().zip(&tb).all(|(&x, &y)| x == y || g.has_edge(x, y));
                assert_eq!(p.has_edge(a, b), close);
            }
        }
        // four isolated cliques of size four
        assert_eq!(p.edge_count(), 4 * 6);
        for v in 0..16 {
            assert_eq!(p.degree(v), 3);
        }
        assert_eq!(Graph::empty(3).normal_product(3, 1 << 10).unwrap(), Graph::empty(27));
    }

    #[test]
    fn conormal_product_brute_force() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let p = g.conormal_product(2, 1 << 10).unwrap();
        let mut expected = 0;
        for a in 0..16 {
            for b in (a + 1)..16 {
                let (ta, tb) = (decode_tuple(a, 4, 2), decode_tuple(b, 4, 2));
                let adj = ta.iter().zip(&tb).any(|(&x, &y)| g.has_edge(x, y));
                assert_eq!(p.has_edge(a, b), adj);
                expected += adj as usize;
            }
        }
        assert_eq!(p.edge_count(), expected);
        assert_eq!(
            Graph::complete(3).conormal_product(2, 1 << 10).unwrap(),
            Graph::complete(9)
        );
    }

    #[test]
    fn product_cap_is_enforced() {
        let g = Graph::complete(4);
        assert!(matches!(
            g.normal_product(6, 1000),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn tuple_codes_are_msd_first() {
        assert_eq!(encode_tuple(&[1, 0, 2], 3), 9 + 2);
        assert_eq!(decode_tuple(11, 3, 3), vec![1, 0, 2]);
    }

    #[test]
    fn exports() {
        let g = Graph::from_edges(3, [(0, 2), (0, 1)]).unwrap();
        assert_eq!(g.to_edge_list(), "0 1\n0 2\n");
        let dot = g.to_dot("G", Some(&["a\"b".to_string()]));
        assert!(dot.contains("0 [label=\"a\\\"b\"];"));
        assert!(dot.contains("  0 -- 2;"));
    }
}
